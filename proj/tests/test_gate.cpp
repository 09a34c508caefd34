#include <catch_amalgamated.hpp>

#include <set>

#include "crabgate/gate.hpp"

using namespace crabgate;

namespace {

GateLayout bundled(const char* name) { return load_layout(std::string(CRABGATE_LAYOUT_DIR) + "/" + name); }

GateRunResult with_counts(int n, int c1, int c2, int c3) {
    GateRunResult r;
    r.n_agents = n;
    r.counts = {n - c1 - c2 - c3, c1, c2, c3};
    return r;
}

}  // namespace

TEST_CASE("parse_inputs accepts the four pairs only") {
    CHECK(parse_inputs("10") == GateInputs{true, false});
    CHECK(parse_inputs("01") == GateInputs{false, true});
    CHECK_THROWS_AS(parse_inputs("3"), Error);
    CHECK_THROWS_AS(parse_inputs("12"), Error);
}

TEST_CASE("seeding places distinct agents on the active regions") {
    const GateLayout g = bundled("and.map");
    Rng rng(1);
    const Swarm both = seed_inputs(g, {true, true}, 40, rng);
    CHECK(both.size() == 80);
    CHECK(both.check_invariants().empty());
    std::set<Cell> a(g.input_regions.at('A').begin(), g.input_regions.at('A').end());
    std::set<Cell> b(g.input_regions.at('B').begin(), g.input_regions.at('B').end());
    for (const auto& agent : both.agents()) CHECK((a.count(agent.pos) + b.count(agent.pos)) == 1);

    Rng r0(1);
    CHECK(seed_inputs(g, {false, false}, 40, r0).size() == 0);

    Rng x(5), y(5);
    const Swarm s1 = seed_inputs(g, {true, false}, 40, x);
    const Swarm s2 = seed_inputs(g, {true, false}, 40, y);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1.agents()[i].pos == s2.agents()[i].pos);

    Rng big(1);
    CHECK_THROWS_AS(seed_inputs(g, {true, false}, 100000, big), Error);
}

TEST_CASE("empty inputs finish immediately") {
    const GateLayout g = bundled("or.map");
    Rng rng(3);
    const GateRunResult r = run_gate(g, {false, false}, ModelParams{}, 40, 1000, rng);
    CHECK(r.n_agents == 0);
    CHECK(r.steps_used == 0);
    CHECK(r.counts == std::array<int, 4>{0, 0, 0, 0});
}

TEST_CASE("gate runs conserve agents and absorb them") {
    const GateLayout g = bundled("and.map");
    for (const auto in : kAllInputs) {
        Rng rng(trial_seed(11, in, 0));
        const GateRunResult r = run_gate(g, in, ModelParams{}, 40, 1000, rng, [&](int, const Swarm& s) {
            REQUIRE(s.check_invariants().empty());
            for (const auto& a : s.agents()) REQUIRE(g.output_at(a.pos) == 0);
        });
        CHECK(r.counts[0] + r.counts[1] + r.counts[2] + r.counts[3] == r.n_agents);
        CHECK(r.n_agents == 40 * (in.x + in.y));
        CHECK(static_cast<int>(r.telemetry.size()) == r.steps_used);
    }
}

TEST_CASE("fraction decision uses a ceiling threshold") {
    CHECK(decide_by_fraction(with_counts(80, 0, 64, 0))[1]);
    CHECK_FALSE(decide_by_fraction(with_counts(80, 0, 63, 0))[1]);
    CHECK(decide_by_fraction(with_counts(80, 80, 0, 0)) == OutputBits{true, false, false});
    CHECK(decide_by_fraction(with_counts(40, 0, 0, 32))[2]);
    CHECK_FALSE(decide_by_fraction(with_counts(40, 0, 0, 31))[2]);
    CHECK_THROWS_AS(decide_by_fraction(with_counts(0, 0, 0, 0)), Error);
}

TEST_CASE("fraction decision is monotone in the region count") {
    for (int n : {1, 7, 40, 80}) {
        bool seen_one = false;
        for (int k = 0; k <= n; ++k) {
            const bool bit = decide_by_fraction(with_counts(n, k, 0, 0))[0];
            if (seen_one) REQUIRE(bit);
            seen_one = seen_one || bit;
        }
    }
}

TEST_CASE("difference decision thresholds") {
    CHECK_FALSE(decide_by_difference(with_counts(40, 20, 0, 2)));
    CHECK(decide_by_difference(with_counts(40, 3, 0, 1)));
    CHECK(decide_by_difference(with_counts(40, 4, 0, 0)));
    CHECK_FALSE(decide_by_difference(with_counts(40, 5, 0, 0)));
    for (int k = 0; k <= 20; ++k) CHECK(decide_by_difference(with_counts(40, k, 0, k)));
    CHECK_THROWS_AS(decide_by_difference(with_counts(0, 0, 0, 0)), Error);
}

TEST_CASE("expected outputs of the two gates") {
    using O = std::optional<bool>;
    CHECK(expected_outputs(GateKind::Or, {false, false})[0] == O{false});
    CHECK(expected_outputs(GateKind::Or, {true, false})[0] == O{true});
    CHECK_FALSE(expected_outputs(GateKind::Or, {true, true})[1].has_value());
    const auto a11 = expected_outputs(GateKind::And, {true, true});
    CHECK(a11[0] == O{false});
    CHECK(a11[1] == O{true});
    CHECK(a11[2] == O{false});
    CHECK(expected_outputs(GateKind::And, {false, true})[0] == O{true});
    CHECK(expected_outputs(GateKind::And, {true, false})[2] == O{true});
}

TEST_CASE("run_succeeded applies the chosen rule") {
    DecisionRule frac;
    CHECK(run_succeeded(GateKind::And, {true, true}, with_counts(80, 4, 70, 6), frac));
    CHECK_FALSE(run_succeeded(GateKind::And, {true, true}, with_counts(80, 10, 60, 10), frac));
    CHECK(run_succeeded(GateKind::And, {false, false}, with_counts(0, 0, 0, 0), frac));

    DecisionRule diff;
    diff.kind = Decision::Difference;
    CHECK(run_succeeded(GateKind::And, {true, false}, with_counts(40, 0, 5, 35), diff));
    CHECK(run_succeeded(GateKind::And, {true, true}, with_counts(80, 3, 70, 7), diff));
    CHECK_THROWS_AS(run_succeeded(GateKind::Or, {true, true}, with_counts(80, 80, 0, 0), diff), Error);
    CHECK_THROWS_AS(run_succeeded(GateKind::Other, {true, true}, with_counts(80, 80, 0, 0), frac), Error);
}

TEST_CASE("gate kind comes from the layout name") {
    GateLayout g;
    g.name = "AND";
    CHECK(gate_kind(g) == GateKind::And);
    g.name = "or";
    CHECK(gate_kind(g) == GateKind::Or);
    g.name = "tiny";
    CHECK(gate_kind(g) == GateKind::Other);
}

TEST_CASE("OR gate computes OR at zero noise") {
    const GateLayout g = bundled("or.map");
    ModelParams m;
    m.seed = 7;
    const TruthTable t = truth_table(g, m, 40, 5);
    CHECK(t.kind == GateKind::Or);
    for (const auto& row : t.rows) {
        CHECK(row.modal[0] == (row.inputs.x || row.inputs.y));
        CHECK(row.successes == row.trials);
    }
}

TEST_CASE("truth tables replay for a fixed seed and any job count") {
    const GateLayout g = bundled("and.map");
    ModelParams m;
    m.seed = 3;
    const TruthTable a = truth_table(g, m, 40, 2, 300);
    const TruthTable b = truth_table(g, m, 40, 2, 300, {}, 3);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(a.rows[k].mean_counts == b.rows[k].mean_counts);
        CHECK(a.rows[k].successes == b.rows[k].successes);
        CHECK(a.rows[k].modal == b.rows[k].modal);
    }
}
