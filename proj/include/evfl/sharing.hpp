#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evfl/vec.hpp"

namespace evfl {

/// A member's learned result at one iteration, as seen by its peers.
struct GradientRecord {
    std::string member_id;
    std::int64_t iteration = 0;
    Vec g;
};

enum class ZeroNormPolicy { Reject, TreatAsDissimilar };

struct SharingConfig {
    double threshold = 0.2; ///< mu, eligibility cutoff on rho
    ZeroNormPolicy zero_norm_policy = ZeroNormPolicy::TreatAsDissimilar;
};

void validate(const SharingConfig& cfg);

/// Direction similarity rho = 1 - || a/||a|| - b/||b|| || in [-1, 1].
/// A zero-norm argument either throws (Reject) or yields -1, so a converged
/// member neither donates nor pollutes aggregation.
double similarity(const Vec& a, const Vec& b,
                  ZeroNormPolicy policy = ZeroNormPolicy::TreatAsDissimilar);

/// Candidates with similarity(reference.g, c.g) >= mu, original order kept.
std::vector<GradientRecord>
eligible_gradients(const GradientRecord& reference,
                   const std::vector<GradientRecord>& candidates,
                   const SharingConfig& cfg);

/// Element-wise mean of the eligible learned results; nullopt when empty
/// (the caller then leaves the receiving model unchanged).
std::optional<Vec> aggregate_shared(const std::vector<GradientRecord>& eligible);

} // namespace evfl
