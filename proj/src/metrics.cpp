#include "evfl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "evfl/vec.hpp"

namespace evfl {

double sqrt_mse(const std::vector<double>& errors) {
    if (errors.empty()) throw DataError("sqrt_mse: empty error series");
    double sum = 0.0;
    for (double e : errors) sum += e * e;
    return std::sqrt(sum / static_cast<double>(errors.size()));
}

std::vector<double> running_sqrt_mse(const std::vector<double>& errors, std::size_t window) {
    std::vector<double> out;
    out.reserve(errors.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < errors.size(); ++k) {
        sum += errors[k] * errors[k];
        std::size_t count = k + 1;
        if (window > 0 && count > window) {
            const double old = errors[k - window];
            sum -= old * old;
            count = window;
        }
        out.push_back(std::sqrt(std::max(sum, 0.0) / static_cast<double>(count)));
    }
    return out;
}

void validate(const ConvergenceSpec& spec) {
    if (spec.window < 1) throw ConfigError("convergence window W must be >= 1");
    if (!(spec.tolerance > 0.0)) throw ConfigError("convergence tolerance tau must be > 0");
}

std::optional<std::size_t> convergence_iteration(const std::vector<double>& series,
                                                 const ConvergenceSpec& spec) {
    validate(spec);
    if (spec.window > series.size())
        throw ConfigError("convergence window W=" + std::to_string(spec.window) +
                          " exceeds series length " + std::to_string(series.size()));
    const double final_value = series.back();
    const double band = spec.tolerance * std::abs(final_value);

    std::size_t run = 0; // consecutive in-band values ending at the current index
    for (std::size_t i = 0; i < series.size(); ++i) {
        run = std::abs(series[i] - final_value) <= band ? run + 1 : 0;
        if (run >= spec.window) {
            // 1-based start of the first qualifying window
            return i + 2 - spec.window;
        }
    }
    return std::nullopt;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

} // namespace

SummaryReport summary_table(const std::vector<std::string>& member_ids,
                            const std::vector<StrategyMetrics>& rows) {
    if (rows.empty()) throw DataError("summary_table: no strategy rows");
    for (const auto& row : rows) {
        if (row.member_sqrt_mse.size() != member_ids.size() ||
            row.member_convergence.size() != member_ids.size())
            throw DataError("summary_table: strategy '" + row.strategy +
                            "' does not cover the member set");
    }

    SummaryReport report;
    report.member_ids = member_ids;
    report.rows = rows;
    int efl_row = -1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        report.avg_sqrt_mse.push_back(mean_of(rows[i].member_sqrt_mse));
        report.avg_convergence.push_back(mean_of(rows[i].member_convergence));
        if (rows[i].strategy == "efl") efl_row = static_cast<int>(i);
    }
    if (efl_row >= 0) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == efl_row) continue;
            SummaryReport::Reduction red;
            red.baseline = rows[i].strategy;
            red.sqrt_mse_pct =
                (report.avg_sqrt_mse[i] - report.avg_sqrt_mse[efl_row]) / report.avg_sqrt_mse[i] * 100.0;
            red.convergence_pct =
                (report.avg_convergence[i] - report.avg_convergence[efl_row]) / report.avg_convergence[i] *
                100.0;
            report.reductions.push_back(red);
        }
    }
    return report;
}

std::string SummaryReport::to_csv() const {
    std::ostringstream out;
    out << "strategy,criteria";
    for (const auto& id : member_ids) out << ',' << id;
    out << ",averaged_result\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << rows[i].strategy << ",sqrt_mse";
        for (double v : rows[i].member_sqrt_mse) out << ',' << format_double(v);
        out << ',' << format_double(avg_sqrt_mse[i]) << '\n';
        out << rows[i].strategy << ",convergence_iteration";
        for (double v : rows[i].member_convergence) out << ',' << format_double(v);
        out << ',' << format_double(avg_convergence[i]) << '\n';
    }
    for (const auto& red : reductions) {
        out << "efl_reduction_vs_" << red.baseline << ",sqrt_mse_pct," << format_double(red.sqrt_mse_pct)
            << '\n';
        out << "efl_reduction_vs_" << red.baseline << ",convergence_pct,"
            << format_double(red.convergence_pct) << '\n';
    }
    return out.str();
}

std::string SummaryReport::to_text() const {
    std::ostringstream out;
    auto cell = [](double v) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(2) << v;
        return c.str();
    };
    out << std::left << std::setw(10) << "strategy" << std::setw(24) << "criteria";
    for (const auto& id : member_ids) out << std::right << std::setw(12) << id;
    out << std::right << std::setw(12) << "average" << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << std::left << std::setw(10) << rows[i].strategy << std::setw(24) << "sqrt_mse";
        for (double v : rows[i].member_sqrt_mse) out << std::right << std::setw(12) << cell(v);
        out << std::right << std::setw(12) << cell(avg_sqrt_mse[i]) << '\n';
        out << std::left << std::setw(10) << rows[i].strategy << std::setw(24) << "convergence_iteration";
        for (double v : rows[i].member_convergence) out << std::right << std::setw(12) << cell(v);
        out << std::right << std::setw(12) << cell(avg_convergence[i]) << '\n';
    }
    for (const auto& red : reductions) {
        out << "efl vs " << red.baseline << ": sqrt MSE reduced " << cell(red.sqrt_mse_pct)
            << "%, convergence iterations reduced " << cell(red.convergence_pct) << "%\n";
    }
    return out.str();
}

} // namespace evfl
