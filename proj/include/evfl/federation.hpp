#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evfl/anomaly.hpp"
#include "evfl/arx.hpp"
#include "evfl/dataset.hpp"
#include "evfl/metrics.hpp"
#include "evfl/sharing.hpp"

namespace evfl {

/// The six federation strategies under comparison.
enum class Strategy {
    EFL,  ///< anomaly detection + sharing policy, per-member models
    UFL,  ///< unconditional gradient averaging into one global model
    ASFL, ///< centralized raw-data baseline with mean coupling
    RFL,  ///< global model with norm-limited learned results
    ADFL, ///< global model guarded by the anomaly detector
    SFL,  ///< sharing policy only, per-member models, no detector
};

Strategy strategy_from_string(const std::string& name);
std::string to_string(Strategy s);

/// Whether raw samples cross the member boundary (true only for ASFL).
bool shares_raw_data(Strategy s);

struct FederationConfig {
    Strategy strategy = Strategy::EFL;
    std::size_t iterations = 1000; ///< round budget
    double learning_rate = 0.01;   ///< lambda
    double update_threshold = 0.0; ///< delta
    SharingConfig sharing;
    DetectorConfig detector;
    ArxOrder order;
    std::uint64_t seed = 0;
    double rfl_prox = 1.0;      ///< rho_prox, R-FL learned-result shrinkage weight
    double asfl_coupling = 0.1; ///< kappa, AS-FL pull toward the fleet parameter mean
    std::size_t mse_window = 200; ///< trailing window for the running sqrt MSE series (0 = cumulative)
    ConvergenceSpec convergence;
    bool record_round_logs = true;
};

void validate(const FederationConfig& cfg);

struct MemberState {
    std::string member_id;
    LinearModel model;
    SlidingWindow window;
    std::optional<LearnedResult> last_result;
    std::size_t cursor = 0; ///< next sample index in the member's dataset
};

enum class Action {
    LocalUpdate,   ///< took its own SGD step
    SharedUpdate,  ///< advanced by the average of eligible peer gradients
    GlobalUpdate,  ///< contributed to / received the single global model
    CoupledUpdate, ///< AS-FL server-side update with mean coupling
    SkipDelta,     ///< |epsilon| <= delta, nothing to do
    Excluded,      ///< anomalous sample dropped from the global mean (AD-FL)
    Frozen,        ///< anomalous with no eligible donor: parameters untouched
};

const char* to_string(Action a);

struct RoundEntry {
    std::string member_id;
    Verdict verdict = Verdict::Normal;
    double epsilon = 0.0;
    Action action = Action::LocalUpdate;
    std::vector<std::string> donors;
    std::vector<double> donor_rho;
    double sqrt_mse_to_date = 0.0;
    bool model_changed = false; ///< bitwise comparison before/after the round
    int violating_feature = -1;
};

struct RoundLog {
    std::size_t iteration = 0; ///< k, 1-based
    std::vector<RoundEntry> entries;
};

/// Counts every payload that crosses the inter-member boundary. Raw samples
/// must stay at zero for every strategy except AS-FL.
struct ChannelAudit {
    std::size_t gradients_sent = 0;
    std::size_t models_sent = 0;
    std::size_t raw_samples_sent = 0;
};

/// One member's fresh sample for the current round.
struct RoundSample {
    Vec x;   ///< raw input features, what the detector inspects
    Vec phi; ///< regressor built from the member's history
    double y = 0.0;
};

/// One E-FL round over all members. Phase 1: detection plus local SGD for
/// anomaly-free members. Phase 2: each anomalous member averages the
/// iteration's eligible gradients against its last learned result, or freezes.
RoundLog run_iteration_efl(std::vector<MemberState>& states,
                           const std::vector<RoundSample>& samples,
                           const FederationConfig& cfg,
                           std::size_t iteration,
                           ChannelAudit* audit = nullptr);

struct StrategyRunResult {
    Strategy strategy = Strategy::EFL;
    std::vector<std::string> member_ids;
    std::vector<LinearModel> final_models;    ///< one per member (global copied when shared)
    std::vector<std::vector<double>> errors;  ///< per-member epsilon series
    std::vector<std::vector<double>> running; ///< per-member running sqrt MSE series
    std::vector<RoundLog> rounds;
    ChannelAudit audit;
};

/// Drive `cfg.iterations` rounds of the configured strategy over the fleet.
/// All strategies consume samples in the identical order, so curves are
/// comparable under one seed.
StrategyRunResult run_strategy(const std::vector<TripDataset>& fleet, const FederationConfig& cfg);

struct EvalRow {
    std::string member_id;
    double sqrt_mse = 0.0;
};

struct EvalTable {
    std::vector<EvalRow> rows;
    double average = 0.0;
    std::string to_csv() const;
};

/// One-step-ahead predictions over the test horizon with frozen parameters.
EvalTable evaluate(const std::vector<LinearModel>& models,
                   const std::vector<TripDataset>& test_fleet,
                   const FederationConfig& cfg);

} // namespace evfl
