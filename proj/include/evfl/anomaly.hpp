#pragma once

#include <cstddef>
#include <deque>

#include "evfl/vec.hpp"

namespace evfl {

struct DetectorConfig {
    std::size_t window = 10;   ///< K, most recent anomaly-free entries kept
    double width = 3.0;        ///< theta, region half-width in sigmas
    double sigma_floor = 1e-9; ///< lower bound on sigma so constant features don't trap forever; 0 restores the literal region
};

void validate(const DetectorConfig& cfg);

/// Ring buffer of the K most recent anomaly-free input vectors.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buf_.size(); }
    bool full() const { return buf_.size() == capacity_; }
    std::size_t feature_dim() const { return buf_.empty() ? 0 : buf_.front().size(); }

    /// Appends x, evicting the oldest entry when full.
    void push(const Vec& x);

    const std::deque<Vec>& entries() const { return buf_; }

private:
    std::size_t capacity_;
    std::deque<Vec> buf_;
};

struct WindowStats {
    Vec mean;   ///< E_K
    Vec stddev; ///< sigma_K, population form (1/K inside the root)
};

/// Element-wise mean and population stddev of a full window.
WindowStats window_stats(const SlidingWindow& w);

/// Element-wise interval [E_K - theta*sigma, E_K + theta*sigma].
struct PredictiveRegion {
    Vec lower;
    Vec upper;

    bool contains(const Vec& x) const { return first_violation(x) < 0; }
    /// Index of the first feature outside its interval, -1 if none.
    int first_violation(const Vec& x) const;
};

PredictiveRegion predictive_region(const Vec& mean, const Vec& stddev,
                                   double width, double sigma_floor = 0.0);

enum class Verdict { Warmup, Normal, Anomaly };

const char* to_string(Verdict v);

struct DetectionResult {
    Verdict verdict = Verdict::Normal;
    int violating_feature = -1; ///< set on Anomaly
};

/// Classify x against the window's predictive region and update the window:
/// Warmup admits unconditionally until K entries exist; Normal admits; an
/// Anomaly leaves the window untouched, so bursts cannot widen the region.
DetectionResult detect(SlidingWindow& w, const Vec& x, const DetectorConfig& cfg);

} // namespace evfl
