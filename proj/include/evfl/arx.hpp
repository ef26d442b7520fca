#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evfl/dataset.hpp"
#include "evfl/vec.hpp"

namespace evfl {

/// ARX lag structure: n_a output lags, n_b input taps (lags 0..n_b-1) per feature.
struct ArxOrder {
    int n_a = 0;
    int n_b = 1;
};

void validate(const ArxOrder& order);

/// Earliest usable sample index for this lag structure.
inline std::size_t lag_offset(const ArxOrder& order) {
    int off = order.n_a > order.n_b - 1 ? order.n_a : order.n_b - 1;
    return static_cast<std::size_t>(off);
}

inline std::size_t regressor_dim(const ArxOrder& order, std::size_t n_features) {
    return static_cast<std::size_t>(order.n_a) + n_features * static_cast<std::size_t>(order.n_b);
}

/// phi(t) = [y(t-1) .. y(t-n_a), then per feature i: x_i(t) .. x_i(t-n_b+1)].
Vec build_regressor(const TripDataset& history, const ArxOrder& order, std::size_t t);

/// Linear-in-parameters predictor; all regressor coefficients are learnable.
struct LinearModel {
    Vec w;
};

/// The update step taken at one iteration -- the unit shared between members.
struct LearnedResult {
    Vec g;
    std::int64_t iteration = 0;
};

double predict(const LinearModel& model, const Vec& phi);

struct SgdOutcome {
    LinearModel model;                   ///< updated (or unchanged) parameters
    std::optional<LearnedResult> result; ///< the step g, absent when |epsilon| <= delta
    double epsilon = 0.0;                ///< prediction error w·phi - y before the step
};

/// One stochastic-gradient step on the squared one-step prediction error.
/// epsilon = w·phi - y; below the update threshold delta nothing changes,
/// otherwise g = 2*lambda*(y - w·phi)*phi and the new model is w + g.
SgdOutcome sgd_step(const LinearModel& model, const Vec& phi, double y,
                    double lambda, double delta, std::int64_t iteration = 0);

/// (1 - ||y_hat - y|| / ||y - mean(y)||) * 100. May be negative.
double fit_index(const std::vector<double>& y_hat, const std::vector<double>& y);

struct OrderFit {
    ArxOrder order;
    double fit_pct = 0.0;
};

struct OrderSelectionConfig {
    int min_order = 1;
    int max_order = 30;
    bool output_lags = false; ///< candidate k -> n_a = k when set, else n_a = 0
    double tolerance_pct = 2.0; ///< pick the smallest order within this many fit points of the best
    int epochs = 3;
    double lambda = 0.01;
    double delta = 0.0;
};

struct OrderSelection {
    std::vector<OrderFit> table;
    ArxOrder chosen;
    std::string table_csv() const; ///< "order,fit_pct" rows
};

/// Train one model per candidate order on `train` (online SGD passes), score
/// each by fit index, and return the smallest order within tolerance of the best.
OrderSelection select_order(const TripDataset& train, const OrderSelectionConfig& cfg);

} // namespace evfl
