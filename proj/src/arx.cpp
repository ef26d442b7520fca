#include "evfl/arx.hpp"

#include <cmath>
#include <sstream>

namespace evfl {

void validate(const ArxOrder& order) {
    if (order.n_a < 0 || order.n_a > 30)
        throw ConfigError("n_a must be in [0, 30], got " + std::to_string(order.n_a));
    if (order.n_b < 1 || order.n_b > 30)
        throw ConfigError("n_b must be in [1, 30], got " + std::to_string(order.n_b));
}

Vec build_regressor(const TripDataset& history, const ArxOrder& order, std::size_t t) {
    validate(order);
    const std::size_t offset = lag_offset(order);
    if (t < offset || t >= history.size()) {
        throw DataError("insufficient history for lags at t=" + std::to_string(t) +
                        "; earliest usable t is " + std::to_string(offset));
    }
    const std::size_t m = history.feature_dim();
    Vec phi;
    phi.reserve(regressor_dim(order, m));
    for (int k = 1; k <= order.n_a; ++k)
        phi.push_back(history.records[t - static_cast<std::size_t>(k)].y);
    for (std::size_t i = 0; i < m; ++i)
        for (int k = 0; k < order.n_b; ++k)
            phi.push_back(history.records[t - static_cast<std::size_t>(k)].x[i]);
    return phi;
}

double predict(const LinearModel& model, const Vec& phi) {
    require_same_dim(model.w, phi, "predict");
    return dot(model.w, phi);
}

SgdOutcome sgd_step(const LinearModel& model, const Vec& phi, double y,
                    double lambda, double delta, std::int64_t iteration) {
    if (!(lambda > 0.0)) throw ConfigError("learning step lambda must be > 0");
    if (delta < 0.0) throw ConfigError("update threshold delta must be >= 0");
    if (!all_finite(model.w) || !all_finite(phi) || !std::isfinite(y))
        throw NumericError("sgd_step: non-finite input");

    SgdOutcome out;
    out.epsilon = predict(model, phi) - y;
    if (std::abs(out.epsilon) <= delta) {
        out.model = model;
        return out;
    }
    LearnedResult res;
    res.iteration = iteration;
    res.g.resize(phi.size());
    const double scale = -2.0 * lambda * out.epsilon; // 2*lambda*(y - w·phi)
    for (std::size_t i = 0; i < phi.size(); ++i) res.g[i] = scale * phi[i];
    out.model = model;
    add_scaled(out.model.w, res.g, 1.0);
    out.result = std::move(res);
    return out;
}

double fit_index(const std::vector<double>& y_hat, const std::vector<double>& y) {
    if (y_hat.size() != y.size())
        throw ShapeError("fit_index: series lengths differ");
    if (y.size() < 2) throw DataError("fit_index: need at least 2 samples");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
        den += (y[i] - mean) * (y[i] - mean);
    }
    if (den == 0.0) throw DataError("fit_index: degenerate constant output series");
    return (1.0 - std::sqrt(num) / std::sqrt(den)) * 100.0;
}

std::string OrderSelection::table_csv() const {
    std::ostringstream out;
    out << "order,fit_pct\n";
    for (const auto& row : table)
        out << row.order.n_b << ',' << format_double(row.fit_pct) << '\n';
    return out.str();
}

OrderSelection select_order(const TripDataset& train, const OrderSelectionConfig& cfg) {
    if (cfg.min_order < 1 || cfg.max_order > 30 || cfg.min_order > cfg.max_order)
        throw ConfigError("candidate orders must satisfy 1 <= min <= max <= 30");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");

    OrderSelection sel;
    for (int k = cfg.min_order; k <= cfg.max_order; ++k) {
        const ArxOrder order{cfg.output_lags ? k : 0, k};
        const std::size_t offset = lag_offset(order);
        if (offset + 2 > train.size())
            throw DataError("selection set too short for order " + std::to_string(k) +
                            "; earliest usable t is " + std::to_string(offset));

        LinearModel model{Vec(regressor_dim(order, train.feature_dim()), 0.0)};
        for (int epoch = 0; epoch < cfg.epochs; ++epoch)
            for (std::size_t t = offset; t < train.size(); ++t)
                model = sgd_step(model, build_regressor(train, order, t), train.records[t].y,
                                 cfg.lambda, cfg.delta).model;

        std::vector<double> y_hat, y;
        y_hat.reserve(train.size() - offset);
        y.reserve(train.size() - offset);
        for (std::size_t t = offset; t < train.size(); ++t) {
            y_hat.push_back(predict(model, build_regressor(train, order, t)));
            y.push_back(train.records[t].y);
        }
        sel.table.push_back({order, fit_index(y_hat, y)});
    }

    double best = sel.table.front().fit_pct;
    for (const auto& row : sel.table) best = std::max(best, row.fit_pct);
    for (const auto& row : sel.table) {
        if (row.fit_pct >= best - cfg.tolerance_pct) {
            sel.chosen = row.order;
            break;
        }
    }
    return sel;
}

} // namespace evfl
