#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "evfl/vec.hpp"

namespace evfl {

/// One time-stamped sample: input feature vector x and observed output y.
struct TripRecord {
    std::int64_t t = 0; ///< sample index within its dataset (0-based, gapless)
    Vec x;              ///< m input features; a "constant" feature is literally 1.0
    double y = 0.0;     ///< remaining battery volume (%) for real data
};

/// Ordered per-vehicle time series.
struct TripDataset {
    std::string trip_id;
    std::vector<std::string> feature_names; ///< column names, one per feature
    std::string output_name = "output";
    std::vector<TripRecord> records;
    std::string population_tag; ///< ground-truth label for synthetic fleets ("" = none)

    std::size_t size() const { return records.size(); }
    std::size_t feature_dim() const { return records.empty() ? 0 : records.front().x.size(); }
};

/// Content equality on the (x, y) series; ids/names/tags are not compared.
bool same_series(const TripDataset& a, const TripDataset& b);

/// Load a trip from CSV. `schema` is the ordered list of input feature names;
/// `output_column` names the y column. A "constant" schema entry missing from
/// the header is synthesized as 1.0.
TripDataset load_trip_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& schema,
                          const std::string& output_column);

/// Write header + one row per record. Numbers are shortest round-trip text,
/// so save/load reproduces every double exactly.
void save_trip_csv(const TripDataset& ds, const std::filesystem::path& path);

/// First n_train records and the next n_test consecutive records, order
/// preserved, no shuffling. The halves get rebased 0-based indices.
std::pair<TripDataset, TripDataset>
split_train_test(const TripDataset& ds, std::size_t n_train, std::size_t n_test);

/// Per-feature mean/stddev fitted on training records only (population form).
struct NormalizationStats {
    Vec mean;
    Vec stddev;
    std::vector<bool> zero_deviation; ///< flagged features pass through mean-subtracted only
};

NormalizationStats fit_normalizer(const TripDataset& train);

/// z-score inputs with train stats; y is left untouched.
TripDataset apply_normalizer(const TripDataset& ds, const NormalizationStats& stats);

} // namespace evfl
