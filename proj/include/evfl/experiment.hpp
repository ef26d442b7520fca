#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evfl/federation.hpp"
#include "evfl/synthetic.hpp"

namespace evfl {

/// Where the fleet comes from: a synthetic generator config or a directory of
/// per-member trip CSVs.
struct DataSourceConfig {
    std::optional<SyntheticFleetConfig> synthetic;
    std::string csv_dir;
    std::vector<std::string> schema;
    std::string output_column;
};

/// Everything one reproducible experiment needs.
struct ExperimentManifest {
    DataSourceConfig data;
    std::size_t train_records = 4000;
    std::size_t test_records = 2000;
    FederationConfig federation;
    std::vector<Strategy> strategies{Strategy::EFL};
    std::string output_dir = "out";
    bool normalize = false; ///< per-member z-score of inputs, fitted on the train half
    std::uint64_t seed = 7; ///< the single seed all randomness flows from
    std::optional<OrderSelectionConfig> order_selection;
    bool write_detection_log = false;
};

void validate(const ExperimentManifest& m);

ExperimentManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json_text(const ExperimentManifest& m);
ExperimentManifest manifest_from_json_text(const std::string& text);

/// In-memory fleet after ingestion, splitting, and optional normalization.
struct PreparedFleet {
    std::vector<TripDataset> train;
    std::vector<TripDataset> test;
    std::vector<std::string> member_ids;
    std::vector<std::vector<std::uint8_t>> anomaly_mask; ///< empty for CSV fleets
    std::vector<Vec> true_weights;                       ///< empty for CSV fleets
};

PreparedFleet prepare_fleet(const ExperimentManifest& m);

/// Write one CSV per synthetic member plus a ground-truth sidecar.
void cmd_synth(const ExperimentManifest& m);

/// Train federation.strategy (or strategies[0]); write metrics, sharing,
/// model-dump and optional detection-log CSVs plus the effective manifest.
void cmd_train(const ExperimentManifest& m);

/// Score a trained model dump on the test half; write the per-member table.
void cmd_evaluate(const ExperimentManifest& m);

/// Run every strategy in `strategies`, then write the comparison summary
/// (train sqrt MSE + I_C + reductions) and the test-set evaluation table.
void cmd_compare(const ExperimentManifest& m);

/// Atomic write: content goes to a temp file that is renamed into place, so
/// interrupted runs never leave corrupt outputs.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace evfl
