#include "evfl/sharing.hpp"

#include <cmath>

namespace evfl {

void validate(const SharingConfig& cfg) {
    if (!(cfg.threshold <= 1.0) || !std::isfinite(cfg.threshold))
        throw ConfigError("similarity threshold mu must be a finite value <= 1");
}

double similarity(const Vec& a, const Vec& b, ZeroNormPolicy policy) {
    require_same_dim(a, b, "similarity");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        if (policy == ZeroNormPolicy::Reject)
            throw NumericError("similarity: zero-norm learned result");
        return -1.0;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] / na - b[i] / nb;
        sq += d * d;
    }
    return 1.0 - std::sqrt(sq);
}

std::vector<GradientRecord>
eligible_gradients(const GradientRecord& reference,
                   const std::vector<GradientRecord>& candidates,
                   const SharingConfig& cfg) {
    validate(cfg);
    std::vector<GradientRecord> eligible;
    for (const auto& c : candidates) {
        if (c.g.size() != reference.g.size())
            throw ShapeError("eligible_gradients: member '" + c.member_id + "' has dimension " +
                             std::to_string(c.g.size()) + ", expected " +
                             std::to_string(reference.g.size()));
        if (similarity(reference.g, c.g, cfg.zero_norm_policy) >= cfg.threshold)
            eligible.push_back(c);
    }
    return eligible;
}

std::optional<Vec> aggregate_shared(const std::vector<GradientRecord>& eligible) {
    if (eligible.empty()) return std::nullopt;
    const std::size_t dim = eligible.front().g.size();
    Vec avg(dim, 0.0);
    for (const auto& rec : eligible) {
        if (rec.g.size() != dim)
            throw ShapeError("aggregate_shared: member '" + rec.member_id + "' has dimension " +
                             std::to_string(rec.g.size()) + ", expected " + std::to_string(dim));
        add_scaled(avg, rec.g, 1.0);
    }
    const double n = static_cast<double>(eligible.size());
    for (double& v : avg) v /= n;
    return avg;
}

} // namespace evfl
