#pragma once

#include <cstdint>
#include <span>

#include "crabgate/agent.hpp"

namespace crabgate {

/// Cells in the matching neighborhood, self excluded. Densities are
/// normalized by this capacity.
inline constexpr int kNeighborhoodCapacity = 24;

struct MetricsRow {
    int p = 1;
    double inherent_perturbation = 0.0;
    double polarization = 0.0;
    double density = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// Norm of the summed headings over the agent count.
inline double polarization(std::span<const Agent> agents) {
    if (agents.empty()) throw Error("polarization is undefined for an empty swarm");
    Vec2 sum;
    for (const auto& a : agents) sum += a.heading;
    return sum.norm() / static_cast<double>(agents.size());
}

/// Mean over agents of the number of other agents within Chebyshev distance
/// `nm_radius`, divided by the 24-cell neighborhood capacity.
inline double density(const World& world, std::span<const Agent> agents, int nm_radius = 2) {
    if (agents.empty()) throw Error("density is undefined for an empty swarm");
    long total = 0;
    for (const auto& a : agents) {
        for (int dr = -nm_radius; dr <= nm_radius; ++dr) {
            for (int dc = -nm_radius; dc <= nm_radius; ++dc) {
                if (dc == 0 && dr == 0) continue;
                const auto n = world.offset(a.pos, dc, dr);
                if (n && world.occupant(*n) != World::kEmpty) ++total;
            }
        }
    }
    return static_cast<double>(total) /
           (static_cast<double>(agents.size()) * static_cast<double>(kNeighborhoodCapacity));
}

inline double density(const Swarm& swarm, int nm_radius = 2) {
    return density(swarm.world(), swarm.agents(), nm_radius);
}

/// (p - 1) / p_max.
inline double inherent_perturbation(int p, int p_max) {
    if (p < 1) throw Error("number of potential transitions must be >= 1");
    if (p_max <= 0) throw Error("p_max must be positive");
    if (p > p_max + 1) throw Error("number of potential transitions exceeds p_max + 1");
    return static_cast<double>(p - 1) / static_cast<double>(p_max);
}

}  // namespace crabgate
