#include "evfl/anomaly.hpp"

#include <algorithm>
#include <cmath>

namespace evfl {

void validate(const DetectorConfig& cfg) {
    if (cfg.window < 2) throw ConfigError("detector window K must be >= 2");
    if (!(cfg.width > 0.0)) throw ConfigError("detector width theta must be > 0");
    if (cfg.sigma_floor < 0.0) throw ConfigError("sigma_floor must be >= 0");
}

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("sliding window capacity must be >= 1");
}

void SlidingWindow::push(const Vec& x) {
    if (!buf_.empty() && x.size() != buf_.front().size())
        throw ShapeError("sliding window holds " + std::to_string(buf_.front().size()) +
                         "-dim entries, got " + std::to_string(x.size()));
    if (buf_.size() == capacity_) buf_.pop_front();
    buf_.push_back(x);
}

WindowStats window_stats(const SlidingWindow& w) {
    if (!w.full())
        throw DataError("window_stats: window holds " + std::to_string(w.size()) + " of " +
                        std::to_string(w.capacity()) + " entries");
    const std::size_t m = w.feature_dim();
    const double k = static_cast<double>(w.size());

    WindowStats stats;
    stats.mean.assign(m, 0.0);
    stats.stddev.assign(m, 0.0);
    for (const auto& x : w.entries())
        for (std::size_t j = 0; j < m; ++j) stats.mean[j] += x[j];
    for (std::size_t j = 0; j < m; ++j) stats.mean[j] /= k;
    for (const auto& x : w.entries())
        for (std::size_t j = 0; j < m; ++j) {
            const double d = x[j] - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    for (std::size_t j = 0; j < m; ++j) stats.stddev[j] = std::sqrt(stats.stddev[j] / k);
    return stats;
}

int PredictiveRegion::first_violation(const Vec& x) const {
    require_same_dim(x, lower, "predictive region");
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < lower[j] || x[j] > upper[j]) return static_cast<int>(j);
    return -1;
}

PredictiveRegion predictive_region(const Vec& mean, const Vec& stddev,
                                   double width, double sigma_floor) {
    require_same_dim(mean, stddev, "predictive_region");
    PredictiveRegion region;
    region.lower.resize(mean.size());
    region.upper.resize(mean.size());
    for (std::size_t j = 0; j < mean.size(); ++j) {
        const double half = width * std::max(stddev[j], sigma_floor);
        region.lower[j] = mean[j] - half;
        region.upper[j] = mean[j] + half;
    }
    return region;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Warmup: return "warmup";
    case Verdict::Normal: return "normal";
    case Verdict::Anomaly: return "anomaly";
    }
    return "?";
}

DetectionResult detect(SlidingWindow& w, const Vec& x, const DetectorConfig& cfg) {
    validate(cfg);
    if (w.capacity() != cfg.window)
        throw ConfigError("detect: window capacity " + std::to_string(w.capacity()) +
                          " does not match K=" + std::to_string(cfg.window));
    if (w.size() > 0 && x.size() != w.feature_dim())
        throw ShapeError("detect: window holds " + std::to_string(w.feature_dim()) +
                         "-dim entries, got " + std::to_string(x.size()));

    if (w.size() < cfg.window) {
        w.push(x);
        return {Verdict::Warmup, -1};
    }
    const auto stats = window_stats(w);
    const auto region = predictive_region(stats.mean, stats.stddev, cfg.width, cfg.sigma_floor);
    const int violation = region.first_violation(x);
    if (violation >= 0) return {Verdict::Anomaly, violation};
    w.push(x);
    return {Verdict::Normal, -1};
}

} // namespace evfl
