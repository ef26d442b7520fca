#include "evfl/federation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace evfl {

Strategy strategy_from_string(const std::string& name) {
    std::string s;
    for (char c : name)
        if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(c)));
    if (s == "efl") return Strategy::EFL;
    if (s == "ufl") return Strategy::UFL;
    if (s == "asfl") return Strategy::ASFL;
    if (s == "rfl") return Strategy::RFL;
    if (s == "adfl") return Strategy::ADFL;
    if (s == "sfl") return Strategy::SFL;
    throw ConfigError("unknown strategy '" + name + "'");
}

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::EFL: return "efl";
    case Strategy::UFL: return "ufl";
    case Strategy::ASFL: return "asfl";
    case Strategy::RFL: return "rfl";
    case Strategy::ADFL: return "adfl";
    case Strategy::SFL: return "sfl";
    }
    return "?";
}

bool shares_raw_data(Strategy s) { return s == Strategy::ASFL; }

const char* to_string(Action a) {
    switch (a) {
    case Action::LocalUpdate: return "local_update";
    case Action::SharedUpdate: return "shared_update";
    case Action::GlobalUpdate: return "global_update";
    case Action::CoupledUpdate: return "coupled_update";
    case Action::SkipDelta: return "skip_delta";
    case Action::Excluded: return "excluded";
    case Action::Frozen: return "frozen";
    }
    return "?";
}

void validate(const FederationConfig& cfg) {
    if (cfg.iterations < 1) throw ConfigError("iteration budget must be >= 1");
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        throw ConfigError("learning step lambda must be a positive finite value");
    if (cfg.update_threshold < 0.0 || !std::isfinite(cfg.update_threshold))
        throw ConfigError("update threshold delta must be a finite value >= 0");
    if (cfg.rfl_prox < 0.0) throw ConfigError("rfl_prox must be >= 0");
    if (cfg.asfl_coupling < 0.0) throw ConfigError("asfl_coupling must be >= 0");
    validate(cfg.sharing);
    validate(cfg.detector);
    validate(cfg.order);
    validate(cfg.convergence);
}

RoundLog run_iteration_efl(std::vector<MemberState>& states,
                           const std::vector<RoundSample>& samples,
                           const FederationConfig& cfg,
                           std::size_t iteration,
                           ChannelAudit* audit) {
    if (states.size() != samples.size())
        throw ShapeError("run_iteration_efl: " + std::to_string(states.size()) + " members vs " +
                         std::to_string(samples.size()) + " samples");

    const std::size_t n = states.size();
    RoundLog log;
    log.iteration = iteration;
    log.entries.resize(n);

    std::vector<Vec> before(n);
    for (std::size_t i = 0; i < n; ++i) before[i] = states[i].model.w;

    // Phase 1: detection, then local SGD for anomaly-free members.
    std::vector<GradientRecord> round_gradients;
    std::vector<std::size_t> abnormal;
    for (std::size_t i = 0; i < n; ++i) {
        auto& st = states[i];
        auto& entry = log.entries[i];
        entry.member_id = st.member_id;

        const auto det = detect(st.window, samples[i].x, cfg.detector);
        entry.verdict = det.verdict;
        entry.violating_feature = det.violating_feature;
        entry.epsilon = predict(st.model, samples[i].phi) - samples[i].y;

        if (det.verdict == Verdict::Anomaly) {
            abnormal.push_back(i);
            entry.action = Action::Frozen; // provisional until phase 2
            continue;
        }
        auto outcome = sgd_step(st.model, samples[i].phi, samples[i].y,
                                cfg.learning_rate, cfg.update_threshold,
                                static_cast<std::int64_t>(iteration));
        if (outcome.result) {
            st.model = std::move(outcome.model);
            round_gradients.push_back({st.member_id, static_cast<std::int64_t>(iteration),
                                       outcome.result->g});
            st.last_result = std::move(*outcome.result);
            entry.action = Action::LocalUpdate;
        } else {
            entry.action = Action::SkipDelta;
        }
    }

    // Phase 2: anomalous members pull this iteration's gradients, filter by
    // similarity against their last learned result, and apply the average.
    for (std::size_t j : abnormal) {
        auto& st = states[j];
        auto& entry = log.entries[j];
        if (audit) audit->gradients_sent += round_gradients.size();
        if (!st.last_result) continue; // nothing to compare against: stay frozen

        std::vector<GradientRecord> eligible;
        for (const auto& cand : round_gradients) {
            if (cand.g.size() != st.last_result->g.size())
                throw ShapeError("sharing: member '" + cand.member_id + "' has dimension " +
                                 std::to_string(cand.g.size()) + ", expected " +
                                 std::to_string(st.last_result->g.size()));
            const double rho =
                similarity(st.last_result->g, cand.g, cfg.sharing.zero_norm_policy);
            if (rho >= cfg.sharing.threshold) {
                eligible.push_back(cand);
                entry.donors.push_back(cand.member_id);
                entry.donor_rho.push_back(rho);
            }
        }
        if (auto shared = aggregate_shared(eligible)) {
            add_scaled(st.model.w, *shared, 1.0);
            st.last_result = LearnedResult{std::move(*shared), static_cast<std::int64_t>(iteration)};
            entry.action = Action::SharedUpdate;
        }
        // else: model parameter kept unchanged
    }

    for (std::size_t i = 0; i < n; ++i)
        log.entries[i].model_changed = states[i].model.w != before[i];
    return log;
}

namespace {

// U-FL, R-FL and AD-FL: one global model advanced by the round's mean gradient.
RoundLog round_global(LinearModel& global, std::vector<MemberState>& states,
                      const std::vector<RoundSample>& samples, const FederationConfig& cfg,
                      std::size_t iteration, ChannelAudit& audit) {
    const std::size_t n = states.size();
    RoundLog log;
    log.iteration = iteration;
    log.entries.resize(n);

    const Vec before = global.w;
    Vec mean_g(global.w.size(), 0.0);
    std::size_t contributors = 0;

    for (std::size_t i = 0; i < n; ++i) {
        auto& entry = log.entries[i];
        entry.member_id = states[i].member_id;
        entry.epsilon = predict(global, samples[i].phi) - samples[i].y;

        if (cfg.strategy == Strategy::ADFL) {
            const auto det = detect(states[i].window, samples[i].x, cfg.detector);
            entry.verdict = det.verdict;
            entry.violating_feature = det.violating_feature;
            if (det.verdict == Verdict::Anomaly) {
                entry.action = Action::Excluded;
                continue;
            }
        }
        if (std::abs(entry.epsilon) <= cfg.update_threshold) {
            entry.action = Action::SkipDelta;
            continue;
        }
        double scale = -2.0 * cfg.learning_rate * entry.epsilon;
        if (cfg.strategy == Strategy::RFL)
            scale /= 1.0 + cfg.learning_rate * cfg.rfl_prox; // implicit proximal shrinkage
        add_scaled(mean_g, samples[i].phi, scale);
        ++contributors;
        ++audit.gradients_sent;
        entry.action = Action::GlobalUpdate;
    }
    if (contributors > 0) {
        for (double& v : mean_g) v /= static_cast<double>(contributors);
        add_scaled(global.w, mean_g, 1.0);
    }
    audit.models_sent += n; // synchronous re-broadcast

    const bool changed = global.w != before;
    for (auto& entry : log.entries) entry.model_changed = changed;
    return log;
}

// AS-FL: the server sees every raw sample and nudges per-member models toward
// the fleet parameter mean.
RoundLog round_asfl(std::vector<MemberState>& states, const std::vector<RoundSample>& samples,
                    const FederationConfig& cfg, std::size_t iteration, ChannelAudit& audit) {
    const std::size_t n = states.size();
    RoundLog log;
    log.iteration = iteration;
    log.entries.resize(n);

    const std::size_t dim = states.front().model.w.size();
    Vec mean_w(dim, 0.0);
    for (const auto& st : states) add_scaled(mean_w, st.model.w, 1.0);
    for (double& v : mean_w) v /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        auto& st = states[i];
        auto& entry = log.entries[i];
        entry.member_id = st.member_id;
        audit.raw_samples_sent += 1; // the sample itself goes to the server

        const Vec before = st.model.w;
        entry.epsilon = predict(st.model, samples[i].phi) - samples[i].y;
        if (std::abs(entry.epsilon) > cfg.update_threshold)
            add_scaled(st.model.w, samples[i].phi, -2.0 * cfg.learning_rate * entry.epsilon);
        for (std::size_t d = 0; d < dim; ++d)
            st.model.w[d] += cfg.asfl_coupling * (mean_w[d] - before[d]);
        entry.action = Action::CoupledUpdate;
        entry.model_changed = st.model.w != before;
    }
    return log;
}

// S-FL: every member aggregates its own gradient with all similar peer
// gradients, every round, with no detector in front.
RoundLog round_sfl(std::vector<MemberState>& states, const std::vector<RoundSample>& samples,
                   const FederationConfig& cfg, std::size_t iteration, ChannelAudit& audit) {
    const std::size_t n = states.size();
    RoundLog log;
    log.iteration = iteration;
    log.entries.resize(n);

    std::vector<std::optional<Vec>> grads(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& entry = log.entries[i];
        entry.member_id = states[i].member_id;
        entry.epsilon = predict(states[i].model, samples[i].phi) - samples[i].y;
        if (std::abs(entry.epsilon) <= cfg.update_threshold) {
            entry.action = Action::SkipDelta;
            continue;
        }
        Vec g(samples[i].phi.size());
        const double scale = -2.0 * cfg.learning_rate * entry.epsilon;
        for (std::size_t d = 0; d < g.size(); ++d) g[d] = scale * samples[i].phi[d];
        grads[i] = std::move(g);
    }

    // Snapshot of phase-1 gradients; updates applied only after filtering.
    for (std::size_t i = 0; i < n; ++i) {
        if (!grads[i]) continue;
        auto& entry = log.entries[i];
        const Vec before = states[i].model.w;

        Vec sum = *grads[i]; // own gradient always counts
        std::size_t count = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !grads[j]) continue;
            ++audit.gradients_sent;
            const double rho = similarity(*grads[i], *grads[j], cfg.sharing.zero_norm_policy);
            if (rho >= cfg.sharing.threshold) {
                add_scaled(sum, *grads[j], 1.0);
                ++count;
                entry.donors.push_back(states[j].member_id);
                entry.donor_rho.push_back(rho);
            }
        }
        add_scaled(states[i].model.w, sum, 1.0 / static_cast<double>(count));
        entry.action = Action::SharedUpdate;
        entry.model_changed = states[i].model.w != before;
    }
    return log;
}

} // namespace

StrategyRunResult run_strategy(const std::vector<TripDataset>& fleet, const FederationConfig& cfg) {
    validate(cfg);
    if (fleet.empty()) throw DataError("run_strategy: empty fleet");

    const std::size_t n = fleet.size();
    const std::size_t m = fleet.front().feature_dim();
    for (const auto& ds : fleet)
        if (ds.feature_dim() != m)
            throw ShapeError("member '" + ds.trip_id + "' has " + std::to_string(ds.feature_dim()) +
                             " features, expected " + std::to_string(m));

    const std::size_t offset = lag_offset(cfg.order);
    for (const auto& ds : fleet)
        if (ds.size() < offset + cfg.iterations)
            throw DataError("member '" + ds.trip_id + "' has " + std::to_string(ds.size()) +
                            " records; " + std::to_string(offset + cfg.iterations) +
                            " needed for " + std::to_string(cfg.iterations) +
                            " iterations after lag warmup");

    const std::size_t dim = regressor_dim(cfg.order, m);

    StrategyRunResult result;
    result.strategy = cfg.strategy;
    std::vector<MemberState> states;
    states.reserve(n);
    for (const auto& ds : fleet) {
        states.push_back(MemberState{ds.trip_id, LinearModel{Vec(dim, 0.0)},
                                     SlidingWindow(cfg.detector.window), std::nullopt, offset});
        result.member_ids.push_back(ds.trip_id);
    }
    LinearModel global{Vec(dim, 0.0)};

    result.errors.assign(n, {});
    for (auto& e : result.errors) e.reserve(cfg.iterations);
    std::vector<double> sumsq(n, 0.0);

    std::vector<RoundSample> samples(n);
    for (std::size_t k = 1; k <= cfg.iterations; ++k) {
        const std::size_t t = offset + (k - 1);
        for (std::size_t i = 0; i < n; ++i) {
            samples[i].x = fleet[i].records[t].x;
            samples[i].phi = build_regressor(fleet[i], cfg.order, t);
            samples[i].y = fleet[i].records[t].y;
        }

        RoundLog log;
        switch (cfg.strategy) {
        case Strategy::EFL:
            log = run_iteration_efl(states, samples, cfg, k, &result.audit);
            break;
        case Strategy::UFL:
        case Strategy::RFL:
        case Strategy::ADFL:
            log = round_global(global, states, samples, cfg, k, result.audit);
            break;
        case Strategy::ASFL:
            log = round_asfl(states, samples, cfg, k, result.audit);
            break;
        case Strategy::SFL:
            log = round_sfl(states, samples, cfg, k, result.audit);
            break;
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double eps = log.entries[i].epsilon;
            result.errors[i].push_back(eps);
            sumsq[i] += eps * eps;
            log.entries[i].sqrt_mse_to_date = std::sqrt(sumsq[i] / static_cast<double>(k));
        }
        if (cfg.record_round_logs) result.rounds.push_back(std::move(log));
    }

    const bool single_model = cfg.strategy == Strategy::UFL || cfg.strategy == Strategy::RFL ||
                              cfg.strategy == Strategy::ADFL;
    result.final_models.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        result.final_models.push_back(single_model ? global : states[i].model);

    result.running.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        result.running.push_back(running_sqrt_mse(result.errors[i], cfg.mse_window));
    return result;
}

std::string EvalTable::to_csv() const {
    std::ostringstream out;
    out << "member,sqrt_mse\n";
    for (const auto& row : rows) out << row.member_id << ',' << format_double(row.sqrt_mse) << '\n';
    out << "averaged_result," << format_double(average) << '\n';
    return out.str();
}

EvalTable evaluate(const std::vector<LinearModel>& models,
                   const std::vector<TripDataset>& test_fleet,
                   const FederationConfig& cfg) {
    if (models.size() != test_fleet.size())
        throw ShapeError("evaluate: " + std::to_string(models.size()) + " models vs " +
                         std::to_string(test_fleet.size()) + " test members");
    const std::size_t offset = lag_offset(cfg.order);

    EvalTable table;
    double sum = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& ds = test_fleet[i];
        const std::size_t dim = regressor_dim(cfg.order, ds.feature_dim());
        if (models[i].w.size() != dim)
            throw ShapeError("evaluate: member '" + ds.trip_id + "' model has dimension " +
                             std::to_string(models[i].w.size()) + ", test data needs " +
                             std::to_string(dim));
        if (ds.size() <= offset)
            throw DataError("evaluate: member '" + ds.trip_id + "' test set too short for lags");

        std::vector<double> errors;
        errors.reserve(ds.size() - offset);
        for (std::size_t t = offset; t < ds.size(); ++t)
            errors.push_back(predict(models[i], build_regressor(ds, cfg.order, t)) - ds.records[t].y);
        table.rows.push_back({ds.trip_id, sqrt_mse(errors)});
        sum += table.rows.back().sqrt_mse;
    }
    table.average = sum / static_cast<double>(models.size());
    return table;
}

} // namespace evfl
