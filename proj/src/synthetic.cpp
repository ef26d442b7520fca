#include "evfl/synthetic.hpp"

#include <cmath>
#include <random>

namespace evfl {

namespace {

// splitmix64, used to derive independent per-member engine seeds.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform_sigma(double lo, double hi) { return (hi - lo) / std::sqrt(12.0); }

} // namespace

void validate(const SyntheticFleetConfig& cfg) {
    if (cfg.populations.empty()) throw ConfigError("synthetic fleet needs at least one population");
    if (cfg.records_per_member == 0) throw ConfigError("records_per_member must be >= 1");
    if (!(cfg.anomaly.rate >= 0.0 && cfg.anomaly.rate < 1.0))
        throw ConfigError("anomaly rate must be in [0, 1)");
    if (cfg.anomaly.spike_sigma < 0.0) throw ConfigError("spike_sigma must be >= 0");
    for (const auto& pop : cfg.populations) {
        if (pop.n_members < 1)
            throw ConfigError("population '" + pop.tag + "' needs n_members >= 1");
        if (pop.true_weights.empty())
            throw ConfigError("population '" + pop.tag + "' needs a true parameter vector");
        if (pop.true_weights.size() != pop.feature_ranges.size())
            throw ConfigError("population '" + pop.tag + "': " + std::to_string(pop.true_weights.size()) +
                              " weights vs " + std::to_string(pop.feature_ranges.size()) + " feature ranges");
        if (pop.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
        for (const auto& [lo, hi] : pop.feature_ranges)
            if (hi < lo) throw ConfigError("population '" + pop.tag + "': feature range with hi < lo");
    }
    const std::size_t m = cfg.populations.front().feature_ranges.size();
    for (const auto& pop : cfg.populations)
        if (pop.feature_ranges.size() != m)
            throw ConfigError("all populations must share one feature dimension");
}

std::vector<TripDataset> SyntheticFleet::datasets() const {
    std::vector<TripDataset> out;
    out.reserve(members.size());
    for (const auto& mem : members) out.push_back(mem.data);
    return out;
}

SyntheticFleet generate_synthetic_fleet(const SyntheticFleetConfig& cfg) {
    validate(cfg);

    const std::size_t m = cfg.populations.front().feature_ranges.size();
    std::vector<std::string> names;
    names.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& [lo, hi] = cfg.populations.front().feature_ranges[j];
        names.push_back(lo == hi && lo == 1.0 && j == 0 ? "constant" : "f" + std::to_string(j));
    }

    SyntheticFleet fleet;
    std::size_t member_index = 0;
    for (const auto& pop : cfg.populations) {
        // Spikable features: degenerate ranges have sigma 0, nothing to spike.
        std::vector<std::size_t> spikable;
        for (std::size_t j = 0; j < m; ++j)
            if (pop.feature_ranges[j].second > pop.feature_ranges[j].first) spikable.push_back(j);

        for (int k = 0; k < pop.n_members; ++k, ++member_index) {
            std::mt19937_64 rng(mix64(cfg.seed ^ mix64(member_index)));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::normal_distribution<double> noise(0.0, 1.0);

            SyntheticMember mem;
            mem.true_weights = pop.true_weights;
            char id[32];
            std::snprintf(id, sizeof(id), "member_%03zu", member_index);
            mem.data.trip_id = id;
            mem.data.population_tag = pop.tag;
            mem.data.feature_names = names;
            mem.data.records.reserve(cfg.records_per_member);
            mem.anomaly_mask.assign(cfg.records_per_member, 0);

            for (std::size_t t = 0; t < cfg.records_per_member; ++t) {
                TripRecord rec;
                rec.t = static_cast<std::int64_t>(t);
                rec.x.resize(m);
                for (std::size_t j = 0; j < m; ++j) {
                    const auto& [lo, hi] = pop.feature_ranges[j];
                    rec.x[j] = lo == hi ? lo : lo + (hi - lo) * unit(rng);
                }
                rec.y = dot(rec.x, pop.true_weights);
                if (pop.noise_sigma > 0.0) rec.y += pop.noise_sigma * noise(rng);

                // Spike after y so the label stays honest while the input lies.
                if (cfg.anomaly.rate > 0.0 && !spikable.empty() && unit(rng) < cfg.anomaly.rate) {
                    const std::size_t pick =
                        spikable[static_cast<std::size_t>(unit(rng) * static_cast<double>(spikable.size())) %
                                 spikable.size()];
                    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
                    const auto& [lo, hi] = pop.feature_ranges[pick];
                    rec.x[pick] += sign * cfg.anomaly.spike_sigma * uniform_sigma(lo, hi);
                    mem.anomaly_mask[t] = 1;
                }
                mem.data.records.push_back(std::move(rec));
            }
            fleet.members.push_back(std::move(mem));
        }
    }
    return fleet;
}

} // namespace evfl
