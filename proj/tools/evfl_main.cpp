#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evfl/experiment.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric error, 1 anything else.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int log_level() {
    const char* env = std::getenv("EVFL_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "evfl: " << msg << '\n';
}

struct Overrides {
    std::string manifest_path;
    std::string out_dir;
    std::vector<std::string> strategies;
    std::int64_t seed = -1;
};

evfl::ExperimentManifest load_with_overrides(const Overrides& ov) {
    auto m = evfl::load_manifest(ov.manifest_path);
    if (ov.seed >= 0) {
        m.seed = static_cast<std::uint64_t>(ov.seed);
        m.federation.seed = m.seed;
        if (m.data.synthetic) m.data.synthetic->seed = m.seed;
    }
    if (!ov.out_dir.empty()) m.output_dir = ov.out_dir;
    if (!ov.strategies.empty()) {
        m.strategies.clear();
        for (const auto& s : ov.strategies) m.strategies.push_back(evfl::strategy_from_string(s));
        m.federation.strategy = m.strategies.front();
    }
    evfl::validate(m);
    return m;
}

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--manifest", ov.manifest_path, "experiment manifest (JSON)")->required();
    cmd->add_option("--seed", ov.seed, "override the manifest seed");
    cmd->add_option("--strategy", ov.strategies, "override the strategy list (repeatable)");
    cmd->add_option("--out", ov.out_dir, "override the output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated online-learning simulator for fleet energy models"};
    app.require_subcommand(1);

    Overrides ov;
    auto* synth = app.add_subcommand("synth", "generate a synthetic fleet to disk");
    auto* train = app.add_subcommand("train", "train one strategy, write models and logs");
    auto* evaluate = app.add_subcommand("evaluate", "score a trained model dump on the test split");
    auto* compare = app.add_subcommand("compare", "run all strategies and write the comparison tables");
    for (auto* cmd : {synth, train, evaluate, compare}) add_common(cmd, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto manifest = load_with_overrides(ov);
        if (synth->parsed()) {
            evfl::cmd_synth(manifest);
            info("fleet written under " + manifest.output_dir);
        } else if (train->parsed()) {
            evfl::cmd_train(manifest);
            info("training outputs written under " + manifest.output_dir);
        } else if (evaluate->parsed()) {
            evfl::cmd_evaluate(manifest);
            info("evaluation written under " + manifest.output_dir);
        } else if (compare->parsed()) {
            evfl::cmd_compare(manifest);
            info("comparison written under " + manifest.output_dir);
        }
        return 0;
    } catch (const evfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const evfl::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const evfl::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
