#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evfl/errors.hpp"

namespace evfl {

/// sqrt of the mean squared error.
double sqrt_mse(const std::vector<double>& errors);

/// Per-iteration sqrt MSE series. window == 0 gives the cumulative-from-start
/// form; otherwise entry k covers the trailing min(k+1, window) errors.
std::vector<double> running_sqrt_mse(const std::vector<double>& errors, std::size_t window = 0);

/// Tail-window stability rule for the convergence iteration I_C.
struct ConvergenceSpec {
    std::size_t window = 50; ///< W
    double tolerance = 0.05; ///< tau, relative to the series' final value
};

void validate(const ConvergenceSpec& spec);

/// Smallest 1-based k such that every series value in [k, k+W) lies within
/// tau of the final value; nullopt when no such k exists.
std::optional<std::size_t> convergence_iteration(const std::vector<double>& series,
                                                 const ConvergenceSpec& spec);

/// One strategy's per-member results feeding the comparison table.
struct StrategyMetrics {
    std::string strategy;
    std::vector<double> member_sqrt_mse;
    std::vector<double> member_convergence; ///< I_C per member; budget when not converged
};

struct SummaryReport {
    struct Reduction {
        std::string baseline;
        double sqrt_mse_pct = 0.0;    ///< (baseline - efl)/baseline * 100 on averages
        double convergence_pct = 0.0;
    };

    std::vector<std::string> member_ids;
    std::vector<StrategyMetrics> rows;
    std::vector<double> avg_sqrt_mse;    ///< one per row
    std::vector<double> avg_convergence; ///< one per row
    std::vector<Reduction> reductions;   ///< present when an "efl" row exists

    std::string to_csv() const;
    std::string to_text() const; ///< aligned plain-text table
};

/// Per-member and averaged sqrt MSE / I_C for each strategy, plus the
/// percentage reductions of efl against every other row.
SummaryReport summary_table(const std::vector<std::string>& member_ids,
                            const std::vector<StrategyMetrics>& rows);

} // namespace evfl
