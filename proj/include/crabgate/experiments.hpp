#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "crabgate/gate.hpp"
#include "crabgate/metrics.hpp"

namespace crabgate {

struct SweepConfig {
    std::vector<int> p_values{1, 2, 4, 8, 16, 24, 31};
    int p_max = 30;
    std::vector<double> lambda_values{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
    int trials = 100;

    // open arena (torus)
    int arena_width = 100;
    int arena_height = 100;
    int n_agents = 100;
    int warmup_steps = 500;
    int measure_steps = 500;

    // gate sweeps
    std::string layout_path;
    GateInputs inputs{true, true};
    int agents_per_input = 40;
    int max_steps = 1000;
    double decision_fraction = 0.8;

    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const {
        if (trials < 1) throw Error("trials must be >= 1");
        if (p_max <= 0) throw Error("p_max must be positive");
        if (arena_width < 1 || arena_height < 1) throw Error("arena dimensions must be positive");
        if (warmup_steps < 0) throw Error("warmup_steps must be >= 0");
        if (measure_steps < 1) throw Error("measure_steps must be >= 1");
        if (max_steps < 1) throw Error("max_steps must be >= 1");
        for (const double l : lambda_values) {
            if (!(l >= 0.0 && l <= 0.2 + 1e-12)) throw Error("lambda values must lie in [0, 0.2]");
        }
    }
};

struct PerformanceRow {
    int p = 1;
    double lambda = 0.0;
    int successes = 0;
    int trials = 0;
    double performance = 0.0;

    friend bool operator==(const PerformanceRow&, const PerformanceRow&) = default;
};

// ---------------------------------------------------------------------------
// Open arena
// ---------------------------------------------------------------------------

/// One open-arena run: random placement on the torus, warmup, then metrics
/// averaged over the measurement window.
inline MetricsRow run_open_arena(const ModelParams& params, const SweepConfig& config, Rng& rng) {
    params.validate();
    if (config.n_agents < 1) throw Error("open arena needs at least one agent");
    if (config.arena_width < 1 || config.arena_height < 1) throw Error("arena dimensions must be positive");
    const std::size_t area = static_cast<std::size_t>(config.arena_width) * static_cast<std::size_t>(config.arena_height);
    if (static_cast<std::size_t>(config.n_agents) > area) {
        throw Error("arena holds " + std::to_string(area) + " cells, cannot place " + std::to_string(config.n_agents) +
                    " agents");
    }

    Swarm swarm(World(config.arena_width, config.arena_height, Topology::Torus));
    std::vector<std::size_t> cells(area);
    for (std::size_t i = 0; i < area; ++i) cells[i] = i;
    for (std::size_t i = 0; i < static_cast<std::size_t>(config.n_agents); ++i) {
        std::swap(cells[i], cells[i + rng.below(area - i)]);
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        swarm.add(swarm.world().cell_at(cells[i]), {std::cos(a), std::sin(a)});
    }

    int t = 0;
    for (; t < config.warmup_steps; ++t) step(swarm, params, rng, t + 1);
    double pol = 0.0;
    double dens = 0.0;
    for (int k = 0; k < config.measure_steps; ++k, ++t) {
        const StepTelemetry tel = step(swarm, params, rng, t + 1);
        pol += tel.polarization;
        dens += tel.density;
    }

    MetricsRow row;
    row.p = params.num_transitions;
    row.inherent_perturbation = inherent_perturbation(params.num_transitions, config.p_max);
    row.polarization = pol / config.measure_steps;
    row.density = dens / config.measure_steps;
    row.lambda = params.noise_amplitude;
    row.seed = params.seed;
    return row;
}

/// Seed of one arena trial for a given P.
inline std::uint64_t arena_seed(std::uint64_t master, int p, std::size_t trial) {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(p) + 0x100), trial);
}

/// One row per P, metrics averaged over config.trials arena runs at zero noise.
inline std::vector<MetricsRow> sweep_inherent_perturbation(const SweepConfig& config,
                                                           const ModelParams& base = {}) {
    config.validate();
    if (config.p_values.empty()) throw Error("p_values must not be empty");
    std::vector<MetricsRow> rows;
    for (const int p : config.p_values) {
        inherent_perturbation(p, config.p_max);  // validates p early
        ModelParams params = base;
        params.num_transitions = p;
        params.noise_amplitude = 0.0;
        const auto runs = parallel_map(static_cast<std::size_t>(config.trials), config.jobs, [&](std::size_t t) {
            ModelParams local = params;
            local.seed = arena_seed(config.seed, p, t);
            Rng rng(local.seed);
            return run_open_arena(local, config, rng);
        });
        MetricsRow row;
        row.p = p;
        row.inherent_perturbation = inherent_perturbation(p, config.p_max);
        for (const auto& r : runs) {
            row.polarization += r.polarization;
            row.density += r.density;
        }
        row.polarization /= config.trials;
        row.density /= config.trials;
        row.lambda = 0.0;
        row.seed = config.seed;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Gate performance
// ---------------------------------------------------------------------------

/// Output region that should collect the swarm for these inputs, if any.
inline std::optional<int> designated_output(GateKind kind, GateInputs in) {
    const auto expected = expected_outputs(kind, in);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] && *expected[i]) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
}

/// Fraction of trials in which the designated output region reaches the
/// decision fraction. Trial seeds match truth_table's for the same master seed.
inline PerformanceRow success_rate(const GateLayout& layout, GateInputs inputs, const ModelParams& params,
                                   const SweepConfig& config) {
    if (config.trials < 1) throw Error("trials must be >= 1");
    params.validate();
    const GateKind kind = gate_kind(layout);
    if (kind == GateKind::Other) throw Error("layout name does not identify a gate function (or/and)");
    const auto target = designated_output(kind, inputs);

    const auto ok = parallel_map(static_cast<std::size_t>(config.trials), config.jobs, [&](std::size_t t) {
        Rng rng(trial_seed(config.seed, inputs, t));
        const GateRunResult r = run_gate(layout, inputs, params, config.agents_per_input, config.max_steps, rng);
        // int, not bool: vector<bool> elements cannot be written concurrently
        if (r.n_agents == 0) return target ? 0 : 1;
        const OutputBits bits = decide_by_fraction(r, config.decision_fraction);
        if (!target) return !bits[0] && !bits[1] && !bits[2] ? 1 : 0;
        return bits[static_cast<std::size_t>(*target - 1)] ? 1 : 0;
    });

    PerformanceRow row;
    row.p = params.num_transitions;
    row.lambda = params.noise_amplitude;
    row.trials = config.trials;
    for (const int s : ok) row.successes += s;
    row.performance = static_cast<double>(row.successes) / row.trials;
    return row;
}

/// Grid of success rates ordered by (p, lambda).
inline std::vector<PerformanceRow> sweep_external_noise(const GateLayout& layout, const SweepConfig& config,
                                                        const ModelParams& base = {}) {
    config.validate();
    if (config.p_values.empty()) throw Error("p_values must not be empty");
    if (config.lambda_values.empty()) throw Error("lambda_values must not be empty");
    std::vector<PerformanceRow> rows;
    for (const int p : config.p_values) {
        for (const double l : config.lambda_values) {
            ModelParams params = base;
            params.num_transitions = p;
            params.noise_amplitude = l;
            rows.push_back(success_rate(layout, config.inputs, params, config));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

/// Shortest round-trip form, independent of the global locale.
inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view s, int line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error("csv line " + std::to_string(line) + ": bad field '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

inline constexpr std::string_view kMetricsHeader = "p,inherent_perturbation,polarization,density,lambda,seed";
inline constexpr std::string_view kPerformanceHeader = "p,lambda,successes,trials,performance";

inline void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.p << ',' << detail::format_real(r.inherent_perturbation) << ','
            << detail::format_real(r.polarization) << ',' << detail::format_real(r.density) << ','
            << detail::format_real(r.lambda) << ',' << r.seed << '\n';
    }
}

inline void write_csv(std::ostream& out, const std::vector<PerformanceRow>& rows) {
    out << kPerformanceHeader << '\n';
    for (const auto& r : rows) {
        out << r.p << ',' << detail::format_real(r.lambda) << ',' << r.successes << ',' << r.trials << ','
            << detail::format_real(r.performance) << '\n';
    }
}

template <typename Row>
void write_csv(const std::filesystem::path& path, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(out, rows);
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

template <typename Row>
std::string to_csv(const std::vector<Row>& rows) {
    std::ostringstream out;
    write_csv(out, rows);
    return out.str();
}

/// Parses CSV text produced by write_csv. Row is MetricsRow or PerformanceRow.
template <typename Row>
std::vector<Row> read_csv(std::string_view text) {
    constexpr bool metrics = std::is_same_v<Row, MetricsRow>;
    const std::string_view header = metrics ? kMetricsHeader : kPerformanceHeader;
    std::vector<Row> rows;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != header) throw Error("csv header mismatch: expected '" + std::string(header) + "'");
            continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != (metrics ? 6u : 5u)) throw Error("csv line " + std::to_string(line_no) + ": wrong field count");
        Row r;
        if constexpr (metrics) {
            r.p = detail::parse_field<int>(f[0], line_no);
            r.inherent_perturbation = detail::parse_field<double>(f[1], line_no);
            r.polarization = detail::parse_field<double>(f[2], line_no);
            r.density = detail::parse_field<double>(f[3], line_no);
            r.lambda = detail::parse_field<double>(f[4], line_no);
            r.seed = detail::parse_field<std::uint64_t>(f[5], line_no);
        } else {
            r.p = detail::parse_field<int>(f[0], line_no);
            r.lambda = detail::parse_field<double>(f[1], line_no);
            r.successes = detail::parse_field<int>(f[2], line_no);
            r.trials = detail::parse_field<int>(f[3], line_no);
            r.performance = detail::parse_field<double>(f[4], line_no);
        }
        rows.push_back(r);
    }
    if (line_no == 0) throw Error("csv is empty");
    return rows;
}

}  // namespace crabgate
