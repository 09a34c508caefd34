#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "crabgate/layout.hpp"
#include "crabgate/parallel.hpp"
#include "crabgate/swarm.hpp"

namespace crabgate {

/// Input bits (x, y) feeding regions A and B.
struct GateInputs {
    bool x = false;
    bool y = false;

    int code() const { return (x ? 2 : 0) + (y ? 1 : 0); }
    friend bool operator==(const GateInputs&, const GateInputs&) = default;
};

inline constexpr std::array<GateInputs, 4> kAllInputs{{{false, false}, {false, true}, {true, false}, {true, true}}};

/// Parses "00", "01", "10" or "11".
inline GateInputs parse_inputs(std::string_view s) {
    if (s.size() != 2 || (s[0] != '0' && s[0] != '1') || (s[1] != '0' && s[1] != '1')) {
        throw Error("inputs must be one of 00, 01, 10, 11");
    }
    return {s[0] == '1', s[1] == '1'};
}

struct GateRunResult {
    std::array<int, 4> counts{};  ///< [0] unresolved, [1..3] output regions
    int steps_used = 0;
    int n_agents = 0;
    std::vector<StepTelemetry> telemetry;

    int unresolved() const { return counts[0]; }
    int region(int label) const { return counts.at(static_cast<std::size_t>(label)); }
};

/// Region bits for outputs 1, 2, 3.
using OutputBits = std::array<bool, 3>;

// ---------------------------------------------------------------------------
// Seeding and running
// ---------------------------------------------------------------------------

/// Mean flow direction over a region, if the region carries any flow.
inline std::optional<Vec2> region_flow(const World& world, const std::vector<Cell>& cells) {
    Vec2 sum;
    for (const Cell c : cells) {
        if (const auto f = world.flow(c)) sum += *f;
    }
    const double n = sum.norm();
    if (n < 1e-9) return std::nullopt;
    return sum * (1.0 / n);
}

/// Places n_per_input agents on distinct random cells of each active input
/// region. Agents start along the region's flow, or in random directions
/// when the region has none.
inline Swarm seed_inputs(const GateLayout& layout, GateInputs inputs, int n_per_input, Rng& rng) {
    if (n_per_input < 0) throw Error("agents per input must be >= 0");
    Swarm swarm(layout.world);
    const std::array<std::pair<char, bool>, 2> active{{{'A', inputs.x}, {'B', inputs.y}}};
    for (const auto& [label, on] : active) {
        if (!on) continue;
        auto it = layout.input_regions.find(label);
        const std::size_t capacity = it == layout.input_regions.end() ? 0 : it->second.size();
        if (capacity < static_cast<std::size_t>(n_per_input)) {
            throw Error(std::string("input region ") + label + " holds " + std::to_string(capacity) +
                        " cells, cannot seed " + std::to_string(n_per_input) + " agents");
        }
        std::vector<Cell> cells = it->second;
        const auto heading = region_flow(layout.world, cells);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_per_input); ++i) {
            std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
            Vec2 h;
            if (heading) {
                h = *heading;
            } else {
                const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
                h = {std::cos(a), std::sin(a)};
            }
            swarm.add(cells[i], h);
        }
    }
    return swarm;
}

/// Called after seeding (step 0) and after every step.
using GateObserver = std::function<void(int step, const Swarm&)>;

/// Runs the swarm until every agent has been absorbed by an output region or
/// max_steps elapse. Agents standing in an output region at the end of a step
/// are tallied and removed.
inline GateRunResult run_gate(const GateLayout& layout, GateInputs inputs, const ModelParams& params, int n_per_input,
                              int max_steps, Rng& rng, const GateObserver& observer = {}) {
    params.validate();
    if (max_steps < 1) throw Error("max_steps must be >= 1");
    Swarm swarm = seed_inputs(layout, inputs, n_per_input, rng);

    GateRunResult result;
    result.n_agents = static_cast<int>(swarm.size());
    if (observer) observer(0, swarm);
    for (int t = 1; t <= max_steps && swarm.size() > 0; ++t) {
        result.telemetry.push_back(step(swarm, params, rng, t));
        swarm.remove_if([&](const Agent& a) {
            const int out = layout.output_at(a.pos);
            if (out == 0) return false;
            ++result.counts[static_cast<std::size_t>(out)];
            return true;
        });
        result.steps_used = t;
        if (observer) observer(t, swarm);
    }
    result.counts[0] = static_cast<int>(swarm.size());
    return result;
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

/// Region bit is 1 when at least ceil(fraction * n_agents) agents reached it.
inline OutputBits decide_by_fraction(const GateRunResult& result, double fraction = 0.8) {
    if (result.n_agents <= 0) throw Error("cannot decide an output without agents");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("decision fraction must lie in (0, 1]");
    const auto needed = static_cast<int>(std::ceil(fraction * result.n_agents - 1e-9));
    OutputBits bits{};
    for (int r = 1; r <= 3; ++r) bits[static_cast<std::size_t>(r - 1)] = result.region(r) >= needed;
    return bits;
}

/// 0 when outputs 1 and 3 differ by more than margin_fraction of all agents,
/// otherwise 1.
inline bool decide_by_difference(const GateRunResult& result, double margin_fraction = 0.1) {
    if (result.n_agents <= 0) throw Error("cannot decide an output without agents");
    if (!(margin_fraction >= 0.0)) throw Error("difference margin must be >= 0");
    const int diff = std::abs(result.region(1) - result.region(3));
    return !(diff > margin_fraction * result.n_agents + 1e-9);
}

// ---------------------------------------------------------------------------
// Truth tables
// ---------------------------------------------------------------------------

enum class GateKind { Or, And, Other };
enum class Decision { Fraction, Difference };

/// Gate function inferred from the layout name ("or", "and").
inline GateKind gate_kind(const GateLayout& layout) {
    std::string n;
    for (const char ch : layout.name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (n == "or") return GateKind::Or;
    if (n == "and") return GateKind::And;
    return GateKind::Other;
}

/// Expected bits of outputs 1..3; empty where the gate defines no output.
/// OR: 1 = x OR y. AND: 1 = NOT x AND y, 2 = x AND y, 3 = x AND NOT y.
inline std::array<std::optional<bool>, 3> expected_outputs(GateKind kind, GateInputs in) {
    switch (kind) {
        case GateKind::Or: return {in.x || in.y, std::nullopt, std::nullopt};
        case GateKind::And: return {!in.x && in.y, in.x && in.y, in.x && !in.y};
        case GateKind::Other: break;
    }
    return {};
}

struct DecisionRule {
    Decision kind = Decision::Fraction;
    double fraction = 0.8;
    double margin = 0.1;
};

/// Whether one run computed the gate's function. Empty inputs trivially
/// produce all-zero outputs.
inline bool run_succeeded(GateKind kind, GateInputs in, const GateRunResult& result, const DecisionRule& rule) {
    if (kind == GateKind::Other) throw Error("layout name does not identify a gate function (or/and)");
    if (result.n_agents == 0) return !in.x && !in.y;
    if (rule.kind == Decision::Difference) {
        if (kind != GateKind::And) throw Error("the difference decision applies to the AND layout only");
        return decide_by_difference(result, rule.margin) == (in.x && in.y);
    }
    const OutputBits bits = decide_by_fraction(result, rule.fraction);
    const auto expected = expected_outputs(kind, in);
    for (std::size_t i = 0; i < 3; ++i) {
        if (expected[i] && bits[i] != *expected[i]) return false;
    }
    return true;
}

struct TruthTableRow {
    GateInputs inputs;
    OutputBits modal{};          ///< per-region majority over trials
    int successes = 0;
    int trials = 0;
    std::array<double, 4> mean_counts{};  ///< [0] unresolved, [1..3] regions

    double success_fraction() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct TruthTable {
    std::string layout;
    GateKind kind = GateKind::Other;
    std::array<TruthTableRow, 4> rows{};
};

/// Seed for one trial of one input pair.
inline std::uint64_t trial_seed(std::uint64_t master, GateInputs in, std::size_t trial) {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(in.code())), trial);
}

/// Runs every input pair `trials` times with seeds derived from params.seed.
inline TruthTable truth_table(const GateLayout& layout, const ModelParams& params, int n_per_input, int trials,
                              int max_steps = 1000, const DecisionRule& rule = {}, int jobs = 1) {
    if (trials < 1) throw Error("trials must be >= 1");
    TruthTable table;
    table.layout = layout.name;
    table.kind = gate_kind(layout);
    for (std::size_t k = 0; k < kAllInputs.size(); ++k) {
        const GateInputs in = kAllInputs[k];
        const auto results = parallel_map(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
            Rng rng(trial_seed(params.seed, in, t));
            return run_gate(layout, in, params, n_per_input, max_steps, rng);
        });
        TruthTableRow& row = table.rows[k];
        row.inputs = in;
        row.trials = trials;
        std::array<int, 3> ones{};
        for (const auto& r : results) {
            for (std::size_t i = 0; i < 4; ++i) row.mean_counts[i] += r.counts[i];
            if (r.n_agents > 0) {
                const OutputBits bits = decide_by_fraction(r, rule.fraction);
                for (std::size_t i = 0; i < 3; ++i) ones[i] += bits[i] ? 1 : 0;
            }
            if (table.kind != GateKind::Other && run_succeeded(table.kind, in, r, rule)) ++row.successes;
        }
        for (auto& m : row.mean_counts) m /= trials;
        for (std::size_t i = 0; i < 3; ++i) row.modal[i] = 2 * ones[i] > trials;
    }
    return table;
}

}  // namespace crabgate
