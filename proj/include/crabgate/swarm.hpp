#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "crabgate/agent.hpp"
#include "crabgate/metrics.hpp"
#include "crabgate/params.hpp"
#include "crabgate/rng.hpp"

namespace crabgate {

/// How an agent got through the current step.
enum class Phase : std::uint8_t { Pending, Anticipation, Following, Wander, Stayed };

struct StepTelemetry {
    int step = 0;
    int n_anticipation = 0;
    int n_following = 0;
    int n_wander = 0;
    int n_stayed = 0;
    double polarization = 0.0;
    double density = 0.0;

    int total() const { return n_anticipation + n_following + n_wander + n_stayed; }
};

struct Move {
    std::size_t slot = 0;
    Cell from;
    Cell to;
};

// ---------------------------------------------------------------------------
// Velocity matching
// ---------------------------------------------------------------------------

/// Velocity matching with an explicit noise vector. The mean heading over the
/// matching neighborhood (self included) is blended toward the wall flow, the
/// noise is added per component and the result renormalized. A vanishing sum
/// keeps the previous heading.
inline Vec2 match_heading(const Swarm& swarm, std::size_t slot, const ModelParams& params, Vec2 noise) {
    const World& world = swarm.world();
    const Agent& self = swarm.agents()[slot];
    Vec2 sum;
    int count = 0;
    const int r = params.nm_radius;
    for (int dr = -r; dr <= r; ++dr) {
        for (int dc = -r; dc <= r; ++dc) {
            const auto n = world.offset(self.pos, dc, dr);
            if (!n) continue;
            const int other = world.occupant(*n);
            if (other == World::kEmpty) continue;
            sum += swarm.agents()[static_cast<std::size_t>(other)].heading;
            ++count;
        }
    }
    Vec2 v = count > 0 ? sum * (1.0 / count) : self.heading;
    if (const auto flow = world.flow(self.pos)) {
        v = v * (1.0 - params.wall_weight) + *flow * params.wall_weight;
    }
    v += noise;
    const double n = v.norm();
    if (n < 1e-9) return self.heading;
    return v * (1.0 / n);
}

/// Velocity matching with noise components drawn uniformly on [-lambda, lambda].
/// No random numbers are consumed when lambda is zero.
inline Vec2 velocity_matching(const Swarm& swarm, std::size_t slot, const ModelParams& params, Rng& rng) {
    Vec2 noise;
    if (params.noise_amplitude > 0.0) {
        noise.x = rng.uniform(-params.noise_amplitude, params.noise_amplitude);
        noise.y = rng.uniform(-params.noise_amplitude, params.noise_amplitude);
    }
    return match_heading(swarm, slot, params, noise);
}

// ---------------------------------------------------------------------------
// Potential transitions
// ---------------------------------------------------------------------------

/// The first potential transition follows the heading itself; the other
/// P - 1 angles are drawn uniformly within alpha around it. Each angle maps
/// to the nearest Moore neighbor and targets inside walls are dropped. Draw
/// order and duplicates are preserved.
inline void sample_potential_transitions(Agent& agent, const ModelParams& params, const World& world, Rng& rng) {
    agent.transitions.clear();
    const double theta = std::atan2(agent.heading.y, agent.heading.x);
    const double half = params.alpha_deg * std::numbers::pi / 360.0;
    for (int i = 0; i < params.num_transitions; ++i) {
        const double angle = i == 0 ? theta : theta + rng.uniform(-half, half);
        const auto& d = kSectorOffsets[static_cast<std::size_t>(sector_of_angle(angle))];
        const auto target = world.offset(agent.pos, d[0], d[1]);
        if (target && world.is_free(*target)) agent.transitions.push_back(*target);
    }
}

inline std::vector<Cell> sample_potential_transitions(const Agent& agent, const ModelParams& params,
                                                      const World& world, Rng& rng) {
    Agent copy = agent;
    sample_potential_transitions(copy, params, world, rng);
    return copy.transitions;
}

// ---------------------------------------------------------------------------
// Popularity
// ---------------------------------------------------------------------------

/// Number of distinct agents targeting each cell. Cells nobody targets read 0.
class PopularityMap {
public:
    PopularityMap() = default;
    PopularityMap(int width, int height)
        : width_(width), counts_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {}

    int at(Cell c) const {
        if (c.col < 0 || c.row < 0 || c.col >= width_) return 0;
        const auto i = index(c);
        return i < counts_.size() ? counts_[i] : 0;
    }

    /// Nonzero entries keyed by cell.
    std::map<Cell, int> entries() const {
        std::map<Cell, int> out;
        for (const Cell c : touched_) out[c] = counts_[index(c)];
        return out;
    }

    std::size_t size() const { return touched_.size(); }

    void bump(Cell c) {
        int& n = counts_[index(c)];
        if (n++ == 0) touched_.push_back(c);
    }

private:
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.col);
    }

    int width_ = 0;
    std::vector<int> counts_;
    std::vector<Cell> touched_;
};

/// Counts, for every cell of a width x height lattice, the distinct agents
/// with at least one transition onto it.
inline PopularityMap build_popularity_map(int width, int height, std::span<const Agent> agents) {
    PopularityMap map(width, height);
    std::vector<int> stamp(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), -1);
    for (std::size_t s = 0; s < agents.size(); ++s) {
        for (const Cell c : agents[s].transitions) {
            if (c.col < 0 || c.row < 0 || c.col >= width || c.row >= height) {
                throw Error("transition target lies outside the lattice");
            }
            int& last = stamp[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
                              static_cast<std::size_t>(c.col)];
            if (last == static_cast<int>(s)) continue;
            last = static_cast<int>(s);
            map.bump(c);
        }
    }
    return map;
}

inline PopularityMap build_popularity_map(const Swarm& swarm) {
    return build_popularity_map(swarm.world().width(), swarm.world().height(), swarm.agents());
}

// ---------------------------------------------------------------------------
// Movement phases
// ---------------------------------------------------------------------------

struct AnticipationResult {
    std::vector<Move> moves;
    std::vector<Cell> vacated;  ///< fresh absent cells, in resolution order
};

/// Agents with a vacant target of popularity above the threshold move onto
/// their most popular unclaimed one. Candidates claim in a random order;
/// a candidate whose every qualifying target is taken falls through.
inline AnticipationResult resolve_mutual_anticipation(Swarm& swarm, const PopularityMap& popularity,
                                                      const ModelParams& params, Rng& rng,
                                                      std::vector<Phase>& phase) {
    const World& world = swarm.world();
    const auto& agents = swarm.agents();

    // Qualifying targets per candidate, most popular first, draw order on ties.
    std::vector<std::size_t> candidates;
    std::vector<std::vector<Cell>> ranked(agents.size());
    for (std::size_t s = 0; s < agents.size(); ++s) {
        if (phase[s] != Phase::Pending) continue;
        auto& list = ranked[s];
        for (const Cell c : agents[s].transitions) {
            if (popularity.at(c) <= params.popularity_threshold || !world.is_vacant(c)) continue;
            if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
        }
        if (list.empty()) continue;
        std::stable_sort(list.begin(), list.end(),
                         [&](Cell a, Cell b) { return popularity.at(a) > popularity.at(b); });
        candidates.push_back(s);
    }
    rng.shuffle(std::span{candidates});

    AnticipationResult result;
    for (const std::size_t s : candidates) {
        for (const Cell c : ranked[s]) {
            if (!swarm.world().is_vacant(c)) continue;  // claimed earlier in this pass
            const Cell from = agents[s].pos;
            swarm.move(s, c);
            phase[s] = Phase::Anticipation;
            result.moves.push_back({s, from, c});
            result.vacated.push_back(from);
            break;
        }
    }
    return result;
}

/// Agents that have not moved step into a fresh absent cell within their
/// following neighborhood. One winner per cell; no cascade.
inline std::vector<Move> apply_following(Swarm& swarm, std::span<const Cell> vacated, const ModelParams& params,
                                         Rng& rng, std::vector<Phase>& phase) {
    std::vector<Move> moves;
    if (vacated.empty()) return moves;
    const World& world = swarm.world();
    auto& agents = swarm.agents();

    std::vector<std::size_t> eligible;
    for (std::size_t s = 0; s < agents.size(); ++s) {
        if (phase[s] != Phase::Pending) continue;
        for (const Cell v : vacated) {
            if (world.chebyshev(agents[s].pos, v) <= params.nf_radius && world.is_vacant(v)) {
                eligible.push_back(s);
                break;
            }
        }
    }
    rng.shuffle(std::span{eligible});

    for (const std::size_t s : eligible) {
        // Prefer the vacancy best aligned with the heading; earlier vacancies win ties.
        std::optional<Cell> best;
        double best_dot = -2.0;
        for (const Cell v : vacated) {
            if (world.chebyshev(agents[s].pos, v) > params.nf_radius || !world.is_vacant(v)) continue;
            const auto [dc, dr] = world.displacement(agents[s].pos, v);
            const double d = unit_step(dc, dr).dot(agents[s].heading);
            if (d > best_dot) {
                best_dot = d;
                best = v;
            }
        }
        if (!best) continue;  // every nearby vacancy was taken by an earlier follower
        const Cell from = agents[s].pos;
        swarm.move(s, *best);
        phase[s] = Phase::Following;
        moves.push_back({s, from, *best});
    }
    return moves;
}

/// Remaining agents pick one of their potential transitions at random and
/// take it if the cell is still vacant.
inline std::vector<Move> apply_free_wander(Swarm& swarm, Rng& rng, std::vector<Phase>& phase) {
    std::vector<Move> moves;
    auto& agents = swarm.agents();
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < agents.size(); ++s) {
        if (phase[s] == Phase::Pending) order.push_back(s);
    }
    rng.shuffle(std::span{order});
    for (const std::size_t s : order) {
        const auto& options = agents[s].transitions;
        if (options.empty()) {
            phase[s] = Phase::Stayed;
            continue;
        }
        const Cell target = options[rng.below(options.size())];
        if (!swarm.world().is_vacant(target)) {
            phase[s] = Phase::Stayed;
            continue;
        }
        const Cell from = agents[s].pos;
        swarm.move(s, target);
        phase[s] = Phase::Wander;
        moves.push_back({s, from, target});
    }
    return moves;
}

// ---------------------------------------------------------------------------
// Full step
// ---------------------------------------------------------------------------

/// One synchronous update. Phases run in a fixed order and draw from `rng`
/// in that order: matching noise, transition angles, anticipation order,
/// following order, wander order and picks.
inline StepTelemetry step(Swarm& swarm, const ModelParams& params, Rng& rng, int step_index = 0) {
    auto& agents = swarm.agents();
    const std::size_t n = agents.size();

    std::vector<Vec2> matched(n);
    for (std::size_t s = 0; s < n; ++s) matched[s] = velocity_matching(swarm, s, params, rng);
    for (std::size_t s = 0; s < n; ++s) agents[s].heading = matched[s];

    for (auto& a : agents) sample_potential_transitions(a, params, swarm.world(), rng);

    const PopularityMap popularity = build_popularity_map(swarm);

    std::vector<Phase> phase(n, Phase::Pending);
    const AnticipationResult anticipation = resolve_mutual_anticipation(swarm, popularity, params, rng, phase);
    apply_following(swarm, anticipation.vacated, params, rng, phase);
    apply_free_wander(swarm, rng, phase);

    StepTelemetry t;
    t.step = step_index;
    for (const Phase p : phase) {
        switch (p) {
            case Phase::Anticipation: ++t.n_anticipation; break;
            case Phase::Following: ++t.n_following; break;
            case Phase::Wander: ++t.n_wander; break;
            default: ++t.n_stayed; break;
        }
    }
    if (n > 0) {
        t.polarization = polarization(agents);
        t.density = density(swarm, params.nm_radius);
    }
    return t;
}

}  // namespace crabgate
