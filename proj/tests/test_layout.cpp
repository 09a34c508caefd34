#include <catch_amalgamated.hpp>

#include "crabgate/layout.hpp"

using namespace crabgate;

namespace {

const char* kSmall =
    "; tiny gate\n"
    "MAP\n"
    "#######\n"
    "#A.2.B#\n"
    "#1...3#\n"
    "#######\n"
    "FLOW\n"
    ".......\n"
    ".>...<.\n"
    ".......\n"
    ".......\n";

}  // namespace

TEST_CASE("parse a small layout") {
    const GateLayout g = parse_layout(kSmall, "tiny");
    CHECK(g.name == "tiny");
    CHECK(g.world.width() == 7);
    CHECK(g.world.height() == 4);
    CHECK(g.world.is_wall({0, 0}));
    CHECK(g.world.is_free({2, 1}));
    CHECK(g.input_regions.at('A') == std::vector<Cell>{{1, 1}});
    CHECK(g.input_regions.at('B') == std::vector<Cell>{{5, 1}});
    CHECK(g.output_at({3, 1}) == 2);
    CHECK(g.output_at({1, 2}) == 1);
    CHECK(g.output_at({5, 2}) == 3);
    CHECK(g.output_at({2, 2}) == 0);
    CHECK(g.world.flow({1, 1}) == Vec2{1.0, 0.0});
    CHECK(g.world.flow({5, 1}) == Vec2{-1.0, 0.0});
    CHECK_FALSE(g.world.flow({3, 2}).has_value());
}

TEST_CASE("format_layout round-trips") {
    const GateLayout g = parse_layout(kSmall);
    const GateLayout again = parse_layout(format_layout(g));
    CHECK(format_layout(again) == format_layout(g));
    CHECK(again.input_regions == g.input_regions);
    CHECK(again.output_regions == g.output_regions);
}

TEST_CASE("layout errors carry a position") {
    auto fails_at = [](const std::string& text, int line, int column) {
        try {
            parse_layout(text);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            CHECK(e.column() == column);
            return;
        }
        FAIL("no ParseError for:\n" << text);
    };
    fails_at("MAP\n###\n#Q#\n###\nFLOW\n...\n...\n...\n", 3, 2);
    fails_at("MAP\n###\n#A1\n####\nFLOW\n...\n...\n...\n", 4, 4);
    fails_at("MAP\n####\n#A1#\n####\nFLOW\n....\n....\n", 7, 1);
    fails_at("MAP\n####\n#A1#\n####\nFLOW\n>...\n....\n....\n", 6, 1);
    fails_at("MAP\n#####\n#...#\n#.A.#\n#..1#\n#####\nFLOW\n.....\n.....\n..>..\n.....\n.....\n", 10, 3);
    fails_at("MAP\n####\n#A1#\n####\nFLOW\n....\n.x..\n....\n", 7, 2);
    fails_at("MAP\n####\n#..#\n####\nFLOW\n....\n....\n....\n", 1, 1);
    CHECK_THROWS_AS(parse_layout("MAP\n#A1#\n"), ParseError);
    CHECK_THROWS_AS(parse_layout("#A1#\nMAP\n#A1#\nFLOW\n....\n"), ParseError);
    CHECK_THROWS_AS(parse_layout("MAP\n#A1#\nMAP\n#A1#\nFLOW\n....\n"), ParseError);
}

TEST_CASE("bundled layouts parse with every region") {
    const GateLayout g_and = load_layout(std::string(CRABGATE_LAYOUT_DIR) + "/and.map");
    CHECK(g_and.name == "and");
    CHECK(g_and.has_input('A'));
    CHECK(g_and.has_input('B'));
    for (int k : {1, 2, 3}) CHECK(g_and.has_output(k));
    CHECK(g_and.input_regions.at('A').size() >= 40);
    CHECK(g_and.input_regions.at('B').size() >= 40);

    const GateLayout g_or = load_layout(std::string(CRABGATE_LAYOUT_DIR) + "/or.map");
    CHECK(g_or.name == "or");
    CHECK(g_or.has_output(1));
    CHECK(g_or.input_regions.at('A').size() >= 40);
    CHECK(g_or.input_regions.at('B').size() >= 40);

    for (const GateLayout* g : {&g_and, &g_or}) {
        for (std::size_t i = 0; i < g->world.area(); ++i) {
            const Cell c = g->world.cell_at(i);
            if (const auto f = g->world.flow(c)) {
                REQUIRE(g->world.is_free(c));
                REQUIRE(g->world.touches_wall(c));
                REQUIRE(std::abs(f->norm() - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("missing layout file is an error") {
    CHECK_THROWS_AS(load_layout("/nonexistent/and.map"), Error);
}
