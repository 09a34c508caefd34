#include <catch_amalgamated.hpp>

#include "crabgate/gate.hpp"
#include "crabgate/render.hpp"

using namespace crabgate;

namespace {

World walled(int w, int h) {
    World world(w, h);
    for (int c = 0; c < w; ++c) {
        world.set_terrain({c, 0}, Terrain::Wall);
        world.set_terrain({c, h - 1}, Terrain::Wall);
    }
    return world;
}

}  // namespace

TEST_CASE("snapshot names are zero padded") {
    CHECK(snapshot_name(50, ImageFormat::Ppm) == "frame_000050.ppm");
    CHECK(snapshot_name(123456, ImageFormat::Svg) == "frame_123456.svg");
    CHECK(parse_format("svg") == ImageFormat::Svg);
    CHECK_THROWS_AS(parse_format("png"), Error);
}

TEST_CASE("trails keep the last positions and fold repeats") {
    TrailRecorder trails(5);
    Swarm s(World(10, 10));
    s.add({1, 1}, {1.0, 0.0});
    for (int i = 0; i < 5; ++i) trails.record(s.agents());
    CHECK(trails.trail(0) == std::vector<Cell>{{1, 1}});

    for (int c = 2; c <= 8; ++c) {
        s.move(0, {c, 1});
        trails.record(s.agents());
    }
    CHECK(trails.trail(0) == std::vector<Cell>{{4, 1}, {5, 1}, {6, 1}, {7, 1}, {8, 1}});

    s.remove_if([](const Agent&) { return true; });
    trails.record(s.agents());
    CHECK(trails.trail(0).empty());
}

TEST_CASE("ppm frame draws walls and agents") {
    const World w = walled(4, 3);
    TrailRecorder none;
    const std::string img = render_frame(w, {}, none, ImageFormat::Ppm, {4});
    const std::string header = "P6\n16 12\n255\n";
    REQUIRE(img.substr(0, header.size()) == header);
    REQUIRE(img.size() == header.size() + 16 * 12 * 3);
    auto pixel = [&](const std::string& im, int x, int y) {
        const std::size_t i = header.size() + (static_cast<std::size_t>(y) * 16 + x) * 3;
        return std::array<int, 3>{static_cast<unsigned char>(im[i]), static_cast<unsigned char>(im[i + 1]),
                                  static_cast<unsigned char>(im[i + 2])};
    };
    const auto wall = pixel(img, 1, 1);
    const auto floor = pixel(img, 6, 6);
    CHECK(wall[0] < 80);
    CHECK(floor[0] > 200);

    Swarm s(w);
    s.add({1, 1}, {1.0, 0.0});
    TrailRecorder t;
    t.record(s.agents());
    const std::string with_agent = render_frame(s.world(), s.agents(), t, ImageFormat::Ppm, {4});
    CHECK(pixel(with_agent, 6, 6) != floor);
    CHECK(pixel(with_agent, 4, 4) == floor);  // inset border stays floor colored
}

TEST_CASE("svg frame lists one rect per agent") {
    const World w = walled(6, 4);
    const std::string empty = render_frame(w, {}, TrailRecorder{}, ImageFormat::Svg);
    CHECK(empty.find("<svg") == 0);
    CHECK(empty.find("#c43428") == std::string::npos);

    Swarm s(w);
    s.add({1, 1}, {1.0, 0.0});
    s.add({3, 2}, {1.0, 0.0});
    TrailRecorder t;
    t.record(s.agents());
    s.move(0, {2, 1});
    t.record(s.agents());
    const std::string svg = render_frame(s.world(), s.agents(), t, ImageFormat::Svg);
    std::size_t solid = 0, faded = 0;
    for (std::size_t at = svg.find("#c43428"); at != std::string::npos; at = svg.find("#c43428", at + 1)) {
        const std::size_t eol = svg.find('\n', at);
        (svg.substr(at, eol - at).find("opacity") != std::string::npos ? faded : solid)++;
    }
    CHECK(solid == 2);
    CHECK(faded == 1);
}

TEST_CASE("rendering a fixed run is byte-identical") {
    const GateLayout g = load_layout(std::string(CRABGATE_LAYOUT_DIR) + "/or.map");
    auto frame = [&](ImageFormat f) {
        TrailRecorder trails;
        std::string out;
        RenderOptions opt;
        opt.regions = &g;
        opt.flow_arrows = true;
        Rng rng(9);
        run_gate(g, {true, true}, ModelParams{}, 40, 30, rng, [&](int t, const Swarm& s) {
            trails.record(s.agents());
            if (t == 30) out = render_frame(s.world(), s.agents(), trails, f, opt);
        });
        return out;
    };
    for (const auto f : {ImageFormat::Ppm, ImageFormat::Svg}) {
        const std::string a = frame(f);
        REQUIRE_FALSE(a.empty());
        CHECK(a == frame(f));
    }
}
