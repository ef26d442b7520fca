#include "evfl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace evfl {

using nlohmann::json;

namespace {

json to_json(const ArxOrder& o) { return {{"n_a", o.n_a}, {"n_b", o.n_b}}; }

json to_json(const DetectorConfig& d) {
    return {{"window", d.window}, {"width", d.width}, {"sigma_floor", d.sigma_floor}};
}

json to_json(const SharingConfig& s) {
    return {{"threshold", s.threshold},
            {"zero_norm_policy",
             s.zero_norm_policy == ZeroNormPolicy::Reject ? "reject" : "treat_as_dissimilar"}};
}

json to_json(const ConvergenceSpec& c) {
    return {{"window", c.window}, {"tolerance", c.tolerance}};
}

json to_json(const FederationConfig& f) {
    return {{"strategy", to_string(f.strategy)},
            {"iterations", f.iterations},
            {"learning_rate", f.learning_rate},
            {"update_threshold", f.update_threshold},
            {"sharing", to_json(f.sharing)},
            {"detector", to_json(f.detector)},
            {"order", to_json(f.order)},
            {"rfl_prox", f.rfl_prox},
            {"asfl_coupling", f.asfl_coupling},
            {"mse_window", f.mse_window},
            {"convergence", to_json(f.convergence)}};
}

json to_json(const SyntheticFleetConfig& s) {
    json pops = json::array();
    for (const auto& p : s.populations) {
        json ranges = json::array();
        for (const auto& [lo, hi] : p.feature_ranges) ranges.push_back({lo, hi});
        pops.push_back({{"tag", p.tag},
                        {"n_members", p.n_members},
                        {"true_weights", p.true_weights},
                        {"feature_ranges", ranges},
                        {"noise_sigma", p.noise_sigma}});
    }
    return {{"records_per_member", s.records_per_member},
            {"anomaly", {{"rate", s.anomaly.rate}, {"spike_sigma", s.anomaly.spike_sigma}}},
            {"populations", pops}};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "': " + e.what());
    }
}

ArxOrder order_from_json(const json& j) {
    ArxOrder o;
    o.n_a = get_or(j, "n_a", o.n_a);
    o.n_b = get_or(j, "n_b", o.n_b);
    return o;
}

DetectorConfig detector_from_json(const json& j) {
    DetectorConfig d;
    d.window = get_or(j, "window", d.window);
    d.width = get_or(j, "width", d.width);
    d.sigma_floor = get_or(j, "sigma_floor", d.sigma_floor);
    return d;
}

SharingConfig sharing_from_json(const json& j) {
    SharingConfig s;
    s.threshold = get_or(j, "threshold", s.threshold);
    const std::string policy = get_or<std::string>(j, "zero_norm_policy", "treat_as_dissimilar");
    if (policy == "reject")
        s.zero_norm_policy = ZeroNormPolicy::Reject;
    else if (policy == "treat_as_dissimilar")
        s.zero_norm_policy = ZeroNormPolicy::TreatAsDissimilar;
    else
        throw ConfigError("unknown zero_norm_policy '" + policy + "'");
    return s;
}

ConvergenceSpec convergence_from_json(const json& j) {
    ConvergenceSpec c;
    c.window = get_or(j, "window", c.window);
    c.tolerance = get_or(j, "tolerance", c.tolerance);
    return c;
}

FederationConfig federation_from_json(const json& j) {
    FederationConfig f;
    if (j.contains("strategy")) f.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    f.iterations = get_or(j, "iterations", f.iterations);
    f.learning_rate = get_or(j, "learning_rate", f.learning_rate);
    f.update_threshold = get_or(j, "update_threshold", f.update_threshold);
    if (j.contains("sharing")) f.sharing = sharing_from_json(j.at("sharing"));
    if (j.contains("detector")) f.detector = detector_from_json(j.at("detector"));
    if (j.contains("order")) f.order = order_from_json(j.at("order"));
    f.rfl_prox = get_or(j, "rfl_prox", f.rfl_prox);
    f.asfl_coupling = get_or(j, "asfl_coupling", f.asfl_coupling);
    f.mse_window = get_or(j, "mse_window", f.mse_window);
    if (j.contains("convergence")) f.convergence = convergence_from_json(j.at("convergence"));
    return f;
}

SyntheticFleetConfig synthetic_from_json(const json& j) {
    SyntheticFleetConfig s;
    s.records_per_member = get_or(j, "records_per_member", s.records_per_member);
    if (j.contains("anomaly")) {
        s.anomaly.rate = get_or(j.at("anomaly"), "rate", s.anomaly.rate);
        s.anomaly.spike_sigma = get_or(j.at("anomaly"), "spike_sigma", s.anomaly.spike_sigma);
    }
    if (!j.contains("populations")) throw ConfigError("synthetic config needs 'populations'");
    for (const auto& pj : j.at("populations")) {
        PopulationSpec p;
        p.tag = get_or<std::string>(pj, "tag", "");
        p.n_members = get_or(pj, "n_members", p.n_members);
        p.true_weights = get_or(pj, "true_weights", p.true_weights);
        p.noise_sigma = get_or(pj, "noise_sigma", p.noise_sigma);
        if (pj.contains("feature_ranges")) {
            for (const auto& r : pj.at("feature_ranges")) {
                if (!r.is_array() || r.size() != 2)
                    throw ConfigError("feature_ranges entries must be [lo, hi] pairs");
                p.feature_ranges.emplace_back(r[0].get<double>(), r[1].get<double>());
            }
        }
        s.populations.push_back(std::move(p));
    }
    return s;
}

OrderSelectionConfig order_selection_from_json(const json& j) {
    OrderSelectionConfig c;
    c.min_order = get_or(j, "min_order", c.min_order);
    c.max_order = get_or(j, "max_order", c.max_order);
    c.output_lags = get_or(j, "output_lags", c.output_lags);
    c.tolerance_pct = get_or(j, "tolerance_pct", c.tolerance_pct);
    c.epochs = get_or(j, "epochs", c.epochs);
    c.lambda = get_or(j, "lambda", c.lambda);
    c.delta = get_or(j, "delta", c.delta);
    return c;
}

std::string csv_escape_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ';';
        out += items[i];
    }
    return out;
}

std::string rho_list(const std::vector<double>& rhos) {
    std::string out;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (i) out += ';';
        out += format_double(rhos[i]);
    }
    return out;
}

} // namespace

void validate(const ExperimentManifest& m) {
    if (m.strategies.empty()) throw ConfigError("manifest needs at least one strategy");
    if (m.output_dir.empty()) throw ConfigError("manifest needs an output_dir");
    if (!m.data.synthetic && m.data.csv_dir.empty())
        throw ConfigError("manifest needs a data source: 'synthetic' or 'csv_dir'");
    if (m.data.synthetic) {
        validate(*m.data.synthetic);
        if (m.data.synthetic->records_per_member < m.train_records + m.test_records)
            throw ConfigError("records_per_member must cover train_records + test_records");
    } else {
        if (m.data.schema.empty()) throw ConfigError("csv data source needs a 'schema'");
        if (m.data.output_column.empty()) throw ConfigError("csv data source needs an 'output_column'");
    }
    if (m.train_records == 0) throw ConfigError("train_records must be >= 1");
    validate(m.federation);
}

ExperimentManifest manifest_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest parse error: ") + e.what());
    }

    ExperimentManifest m;
    m.seed = get_or(j, "seed", m.seed);
    m.output_dir = get_or<std::string>(j, "output_dir", m.output_dir);
    m.train_records = get_or(j, "train_records", m.train_records);
    m.test_records = get_or(j, "test_records", m.test_records);
    m.normalize = get_or(j, "normalize", m.normalize);
    m.write_detection_log = get_or(j, "write_detection_log", m.write_detection_log);
    if (j.contains("strategies")) {
        m.strategies.clear();
        for (const auto& s : j.at("strategies"))
            m.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("federation")) m.federation = federation_from_json(j.at("federation"));
    if (j.contains("data")) {
        const auto& dj = j.at("data");
        if (dj.contains("synthetic")) m.data.synthetic = synthetic_from_json(dj.at("synthetic"));
        m.data.csv_dir = get_or<std::string>(dj, "csv_dir", "");
        m.data.schema = get_or(dj, "schema", m.data.schema);
        m.data.output_column = get_or<std::string>(dj, "output_column", "");
    }
    if (j.contains("order_selection"))
        m.order_selection = order_selection_from_json(j.at("order_selection"));

    // One seed drives everything.
    m.federation.seed = m.seed;
    if (m.data.synthetic) m.data.synthetic->seed = m.seed;

    validate(m);
    return m;
}

std::string manifest_to_json_text(const ExperimentManifest& m) {
    json j;
    j["seed"] = m.seed;
    j["output_dir"] = m.output_dir;
    j["train_records"] = m.train_records;
    j["test_records"] = m.test_records;
    j["normalize"] = m.normalize;
    j["write_detection_log"] = m.write_detection_log;
    json strategies = json::array();
    for (auto s : m.strategies) strategies.push_back(to_string(s));
    j["strategies"] = strategies;
    j["federation"] = to_json(m.federation);
    json data;
    if (m.data.synthetic) data["synthetic"] = to_json(*m.data.synthetic);
    if (!m.data.csv_dir.empty()) {
        data["csv_dir"] = m.data.csv_dir;
        data["schema"] = m.data.schema;
        data["output_column"] = m.data.output_column;
    }
    j["data"] = data;
    if (m.order_selection) {
        const auto& c = *m.order_selection;
        j["order_selection"] = {{"min_order", c.min_order},   {"max_order", c.max_order},
                                {"output_lags", c.output_lags}, {"tolerance_pct", c.tolerance_pct},
                                {"epochs", c.epochs},         {"lambda", c.lambda},
                                {"delta", c.delta}};
    }
    return j.dump(2) + "\n";
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return manifest_from_json_text(ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

PreparedFleet prepare_fleet(const ExperimentManifest& m) {
    validate(m);
    PreparedFleet fleet;

    std::vector<TripDataset> full;
    if (m.data.synthetic) {
        auto synth = generate_synthetic_fleet(*m.data.synthetic);
        for (auto& mem : synth.members) {
            full.push_back(std::move(mem.data));
            fleet.anomaly_mask.push_back(std::move(mem.anomaly_mask));
            fleet.true_weights.push_back(std::move(mem.true_weights));
        }
    } else {
        std::vector<std::filesystem::path> paths;
        for (const auto& e : std::filesystem::directory_iterator(m.data.csv_dir))
            if (e.is_regular_file() && e.path().extension() == ".csv") paths.push_back(e.path());
        std::sort(paths.begin(), paths.end());
        if (paths.empty()) throw DataError("no .csv files under '" + m.data.csv_dir + "'");
        for (const auto& p : paths)
            full.push_back(load_trip_csv(p, m.data.schema, m.data.output_column));
    }

    for (auto& ds : full) {
        auto [train, test] = split_train_test(ds, m.train_records,
                                              std::min(m.test_records, ds.size() - m.train_records));
        if (m.normalize) {
            const auto stats = fit_normalizer(train);
            train = apply_normalizer(train, stats);
            test = apply_normalizer(test, stats);
        }
        fleet.member_ids.push_back(ds.trip_id);
        fleet.train.push_back(std::move(train));
        fleet.test.push_back(std::move(test));
    }
    return fleet;
}

namespace {

std::string metrics_csv(const StrategyRunResult& run) {
    std::ostringstream out;
    out << "iteration,member,epsilon,sqrt_mse,verdict,action\n";
    for (const auto& round : run.rounds)
        for (const auto& e : round.entries)
            out << round.iteration << ',' << e.member_id << ',' << format_double(e.epsilon) << ','
                << format_double(e.sqrt_mse_to_date) << ',' << to_string(e.verdict) << ','
                << to_string(e.action) << '\n';
    return out.str();
}

std::string sharing_csv(const StrategyRunResult& run) {
    std::ostringstream out;
    out << "iteration,receiver,donors,rho\n";
    for (const auto& round : run.rounds)
        for (const auto& e : round.entries)
            if (!e.donors.empty())
                out << round.iteration << ',' << e.member_id << ',' << csv_escape_list(e.donors)
                    << ',' << rho_list(e.donor_rho) << '\n';
    return out.str();
}

std::string detection_csv(const StrategyRunResult& run) {
    std::ostringstream out;
    out << "member,iteration,verdict,violating_feature\n";
    for (const auto& round : run.rounds)
        for (const auto& e : round.entries) {
            out << e.member_id << ',' << round.iteration << ',' << to_string(e.verdict) << ',';
            if (e.violating_feature >= 0) out << e.violating_feature;
            out << '\n';
        }
    return out.str();
}

std::string models_csv(const StrategyRunResult& run) {
    std::ostringstream out;
    const std::size_t dim = run.final_models.empty() ? 0 : run.final_models.front().w.size();
    out << "member";
    for (std::size_t d = 0; d < dim; ++d) out << ",w" << d;
    out << '\n';
    for (std::size_t i = 0; i < run.final_models.size(); ++i) {
        out << run.member_ids[i];
        for (double v : run.final_models[i].w) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

std::vector<LinearModel> load_model_dump(const std::filesystem::path& path,
                                         const std::vector<std::string>& member_ids) {
    std::ifstream in(path);
    if (!in) throw DataError("model dump '" + path.string() + "' not found; run train first");
    std::string line;
    if (!std::getline(in, line)) throw DataError("model dump '" + path.string() + "' is empty");

    std::map<std::string, Vec> by_member;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        const std::string id = cell;
        Vec w;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw DataError("model dump: bad number '" + cell + "' for member '" + id + "'");
            w.push_back(v);
        }
        by_member[id] = std::move(w);
    }

    std::vector<LinearModel> models;
    for (const auto& id : member_ids) {
        auto it = by_member.find(id);
        if (it == by_member.end())
            throw DataError("model dump is missing member '" + id + "'");
        models.push_back(LinearModel{it->second});
    }
    return models;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentManifest& m,
                       const StrategyRunResult& run) {
    const std::string prefix = to_string(run.strategy);
    write_file_atomic(dir / (prefix + "_metrics.csv"), metrics_csv(run));
    write_file_atomic(dir / (prefix + "_sharing.csv"), sharing_csv(run));
    write_file_atomic(dir / (prefix + "_models.csv"), models_csv(run));
    if (m.write_detection_log)
        write_file_atomic(dir / (prefix + "_detection.csv"), detection_csv(run));
}

double convergence_or_budget(const std::vector<double>& running, const ConvergenceSpec& spec) {
    const auto ic = convergence_iteration(running, spec);
    return ic ? static_cast<double>(*ic) : static_cast<double>(running.size());
}

} // namespace

void cmd_synth(const ExperimentManifest& m) {
    validate(m);
    if (!m.data.synthetic) throw ConfigError("synth needs a synthetic data source");
    const auto fleet = generate_synthetic_fleet(*m.data.synthetic);

    const std::filesystem::path dir(m.output_dir);
    std::filesystem::create_directories(dir / "members");

    json truth;
    truth["members"] = json::array();
    for (const auto& mem : fleet.members) {
        save_trip_csv(mem.data, dir / "members" / (mem.data.trip_id + ".csv"));
        json indices = json::array();
        for (std::size_t t = 0; t < mem.anomaly_mask.size(); ++t)
            if (mem.anomaly_mask[t]) indices.push_back(t);
        truth["members"].push_back({{"trip_id", mem.data.trip_id},
                                    {"population_tag", mem.data.population_tag},
                                    {"true_weights", mem.true_weights},
                                    {"anomaly_indices", indices}});
    }
    write_file_atomic(dir / "groundtruth.json", truth.dump(2) + "\n");
    write_file_atomic(dir / "manifest.json", manifest_to_json_text(m));
}

void cmd_train(const ExperimentManifest& m) {
    auto fleet = prepare_fleet(m);
    const std::filesystem::path dir(m.output_dir);

    ExperimentManifest effective = m;
    if (m.order_selection) {
        const auto sel = select_order(fleet.train.front(), *m.order_selection);
        write_file_atomic(dir / "order_selection.csv", sel.table_csv());
        effective.federation.order = sel.chosen;
    }
    const auto run = run_strategy(fleet.train, effective.federation);
    write_run_outputs(dir, effective, run);
    write_file_atomic(dir / "manifest.json", manifest_to_json_text(effective));
}

void cmd_evaluate(const ExperimentManifest& m) {
    auto fleet = prepare_fleet(m);
    const std::filesystem::path dir(m.output_dir);
    const std::string prefix = to_string(m.federation.strategy);

    const auto models = load_model_dump(dir / (prefix + "_models.csv"), fleet.member_ids);
    const auto table = evaluate(models, fleet.test, m.federation);
    write_file_atomic(dir / (prefix + "_eval.csv"), table.to_csv());
    write_file_atomic(dir / "manifest.json", manifest_to_json_text(m));
}

void cmd_compare(const ExperimentManifest& m) {
    auto fleet = prepare_fleet(m);
    const std::filesystem::path dir(m.output_dir);

    std::vector<StrategyMetrics> rows;
    std::ostringstream eval_csv;
    eval_csv << "strategy";
    for (const auto& id : fleet.member_ids) eval_csv << ',' << id;
    eval_csv << ",averaged_result\n";

    for (Strategy s : m.strategies) {
        FederationConfig cfg = m.federation;
        cfg.strategy = s;
        const auto run = run_strategy(fleet.train, cfg);
        write_run_outputs(dir, m, run);

        StrategyMetrics metrics;
        metrics.strategy = to_string(s);
        for (std::size_t i = 0; i < fleet.member_ids.size(); ++i) {
            metrics.member_sqrt_mse.push_back(sqrt_mse(run.errors[i]));
            metrics.member_convergence.push_back(convergence_or_budget(run.running[i], cfg.convergence));
        }
        rows.push_back(std::move(metrics));

        const auto table = evaluate(run.final_models, fleet.test, cfg);
        eval_csv << to_string(s);
        for (const auto& row : table.rows) eval_csv << ',' << format_double(row.sqrt_mse);
        eval_csv << ',' << format_double(table.average) << '\n';
    }

    const auto report = summary_table(fleet.member_ids, rows);
    write_file_atomic(dir / "compare_summary.csv", report.to_csv());
    write_file_atomic(dir / "compare_summary.txt", report.to_text());
    write_file_atomic(dir / "compare_eval.csv", eval_csv.str());
    write_file_atomic(dir / "manifest.json", manifest_to_json_text(m));
}

} // namespace evfl
