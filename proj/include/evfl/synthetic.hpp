#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evfl/dataset.hpp"

namespace evfl {

/// One vehicle population: a true linear process y = x·w* + e over uniform inputs.
struct PopulationSpec {
    std::string tag;          ///< e.g. "city", "highway"
    Vec true_weights;         ///< w*, one entry per feature
    std::vector<std::pair<double, double>> feature_ranges; ///< uniform [lo, hi]; lo == hi makes a constant feature
    double noise_sigma = 0.0; ///< stddev of the white noise e(t)
    int n_members = 1;
};

/// Input-spike injection: a fraction of records get one feature bumped by
/// +-spike_sigma times that feature's distribution stddev.
struct AnomalySpec {
    double rate = 0.0;        ///< in [0, 1)
    double spike_sigma = 5.0; ///< spike magnitude in units of feature sigma
};

struct SyntheticFleetConfig {
    std::vector<PopulationSpec> populations;
    std::size_t records_per_member = 1000;
    AnomalySpec anomaly;
    std::uint64_t seed = 0;
};

struct SyntheticMember {
    TripDataset data;
    std::vector<std::uint8_t> anomaly_mask; ///< ground truth, one flag per record
    Vec true_weights;                       ///< the generating population's w*
};

struct SyntheticFleet {
    std::vector<SyntheticMember> members;
    std::vector<TripDataset> datasets() const;
};

/// Deterministic in cfg: the same seed yields byte-identical fleets.
/// Spikes corrupt the stored input only; y keeps the uncorrupted value, so an
/// anomalous record is a genuinely misleading training sample.
SyntheticFleet generate_synthetic_fleet(const SyntheticFleetConfig& cfg);

void validate(const SyntheticFleetConfig& cfg);

} // namespace evfl
