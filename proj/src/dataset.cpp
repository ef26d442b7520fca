#include "evfl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace evfl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string s = trim(raw);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw DataError("non-numeric cell at row " + std::to_string(row) +
                        ", column '" + column + "': '" + s + "'");
    }
    return v;
}

} // namespace

bool same_series(const TripDataset& a, const TripDataset& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.records[i].x != b.records[i].x) return false;
        if (a.records[i].y != b.records[i].y) return false;
    }
    return true;
}

TripDataset load_trip_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& schema,
                          const std::string& output_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError("empty file '" + path.string() + "'");
    const auto header = split_csv_line(header_line);

    auto column_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        return -1;
    };

    // Column positions per schema entry; -1 marks a synthesized constant.
    std::vector<int> idx;
    idx.reserve(schema.size());
    for (const auto& name : schema) {
        int i = column_index(name);
        if (i < 0) {
            if (name == "constant") {
                idx.push_back(-1);
                continue;
            }
            throw DataError("schema error: missing column '" + name + "' in '" + path.string() + "'");
        }
        idx.push_back(i);
    }
    const int y_idx = column_index(output_column);
    if (y_idx < 0)
        throw DataError("schema error: missing column '" + output_column + "' in '" + path.string() + "'");

    TripDataset ds;
    ds.trip_id = path.stem().string();
    ds.feature_names = schema;
    ds.output_name = output_column;

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        TripRecord rec;
        rec.t = static_cast<std::int64_t>(ds.records.size());
        rec.x.reserve(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (idx[j] < 0) {
                rec.x.push_back(1.0);
                continue;
            }
            if (static_cast<std::size_t>(idx[j]) >= cells.size())
                throw DataError("row " + std::to_string(row) + " is short of column '" + schema[j] + "'");
            rec.x.push_back(parse_cell(cells[idx[j]], row, schema[j]));
        }
        if (static_cast<std::size_t>(y_idx) >= cells.size())
            throw DataError("row " + std::to_string(row) + " is short of column '" + output_column + "'");
        rec.y = parse_cell(cells[y_idx], row, output_column);
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty()) throw DataError("empty dataset in '" + path.string() + "'");
    return ds;
}

void save_trip_csv(const TripDataset& ds, const std::filesystem::path& path) {
    std::ostringstream out;
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j) out << ',';
        out << ds.feature_names[j];
    }
    out << ',' << ds.output_name << '\n';
    for (const auto& rec : ds.records) {
        for (std::size_t j = 0; j < rec.x.size(); ++j) {
            if (j) out << ',';
            out << format_double(rec.x[j]);
        }
        out << ',' << format_double(rec.y) << '\n';
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f << out.str();
}

std::pair<TripDataset, TripDataset>
split_train_test(const TripDataset& ds, std::size_t n_train, std::size_t n_test) {
    if (n_train + n_test > ds.size()) {
        throw DataError("split needs " + std::to_string(n_train + n_test) + " records, dataset '" +
                        ds.trip_id + "' has " + std::to_string(ds.size()));
    }
    auto slice = [&](std::size_t begin, std::size_t count, const char* suffix) {
        TripDataset part;
        part.trip_id = ds.trip_id + suffix;
        part.feature_names = ds.feature_names;
        part.output_name = ds.output_name;
        part.population_tag = ds.population_tag;
        part.records.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            TripRecord rec = ds.records[begin + i];
            rec.t = static_cast<std::int64_t>(i);
            part.records.push_back(std::move(rec));
        }
        return part;
    };
    return {slice(0, n_train, ""), slice(n_train, n_test, "")};
}

NormalizationStats fit_normalizer(const TripDataset& train) {
    if (train.records.empty()) throw DataError("fit_normalizer: empty training set");
    const std::size_t m = train.feature_dim();
    const double n = static_cast<double>(train.size());

    NormalizationStats stats;
    stats.mean.assign(m, 0.0);
    stats.stddev.assign(m, 0.0);
    stats.zero_deviation.assign(m, false);

    for (const auto& rec : train.records)
        for (std::size_t j = 0; j < m; ++j) stats.mean[j] += rec.x[j];
    for (std::size_t j = 0; j < m; ++j) stats.mean[j] /= n;

    for (const auto& rec : train.records)
        for (std::size_t j = 0; j < m; ++j) {
            const double d = rec.x[j] - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    for (std::size_t j = 0; j < m; ++j) {
        stats.stddev[j] = std::sqrt(stats.stddev[j] / n); // population form
        if (stats.stddev[j] == 0.0) stats.zero_deviation[j] = true;
    }
    return stats;
}

TripDataset apply_normalizer(const TripDataset& ds, const NormalizationStats& stats) {
    if (ds.feature_dim() != stats.mean.size())
        throw ShapeError("apply_normalizer: stats fitted on " + std::to_string(stats.mean.size()) +
                         " features, dataset has " + std::to_string(ds.feature_dim()));
    TripDataset out = ds;
    for (auto& rec : out.records) {
        for (std::size_t j = 0; j < rec.x.size(); ++j) {
            rec.x[j] -= stats.mean[j];
            if (!stats.zero_deviation[j]) rec.x[j] /= stats.stddev[j];
        }
    }
    return out;
}

} // namespace evfl
