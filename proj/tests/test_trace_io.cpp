#include <doctest.h>

#include <sstream>

#include "atomcycle/errors.hpp"
#include "atomcycle/trace_io.hpp"
#include "helpers.hpp"

using namespace atomcycle;

namespace {

RunTrace small_trace() {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 6;
    return Simulator(c).run(77, 3);
}

}  // namespace

TEST_CASE("traces round trip in both image formats") {
    const RunTrace t = small_trace();
    for (OutputFormat f : {OutputFormat::table, OutputFormat::grid}) {
        std::stringstream s;
        write_trace(s, t, f);
        const RunTrace back = read_trace(s);
        CHECK(back.seed == 77);
        CHECK(back.replica == 3);
        CHECK(back.records == t.records);
        CHECK(back.config.n_cycles == 6);
        CHECK(back.config.geometry.n_cols == 40);
        CHECK(back.wall_parameters.n_loaded == t.wall_parameters.n_loaded);
    }
}

TEST_CASE("corrupted traces are rejected with a position") {
    const RunTrace t = small_trace();
    std::stringstream s;
    write_trace(s, t);
    std::string text = s.str();

    SUBCASE("checksum") {
        const auto at = text.find("\nimage 2 1 hex ");
        REQUIRE(at != std::string::npos);
        char& c = text[at + 16];
        c = c == '0' ? '1' : '0';
    }
    SUBCASE("bad magic") { text.replace(0, 9, "notatrace"); }
    SUBCASE("truncated") { text.resize(text.size() / 2); }
    SUBCASE("unknown parameter") {
        const auto at = text.find("param ");
        text.insert(at, "param loss.bogus 1\n");
    }
    std::istringstream in(text);
    CHECK_THROWS_AS(read_trace(in), ParseError);
}

TEST_CASE("image checksums depend on every bit") {
    SiteMask m(200);
    const auto base = image_crc32(m);
    m.set(199);
    CHECK(image_crc32(m) != base);
    CHECK(trace_columns().back() == "crc_image2");
}

TEST_CASE("occupancy grid round trip and errors") {
    const LatticeGeometry g(testing::small_geometry());
    SiteMask m(g.site_count());
    m.set(g.index(3, 0));
    m.set(g.index(39, 20));
    std::stringstream s;
    write_occupancy_grid(s, g, m);
    const std::string text = "# comment\n\n" + s.str();
    std::istringstream in(text);
    CHECK(read_occupancy_grid(in, g) == m);

    std::string bad = s.str();
    bad[5] = 'x';
    std::istringstream in2(bad);
    try {
        read_occupancy_grid(in2, g);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 6);
    }
    std::istringstream in3(s.str().substr(0, 41 * 5));
    CHECK_THROWS_AS(read_occupancy_grid(in3, g), ParseError);
    std::istringstream in4("0101\n");
    CHECK_THROWS_AS(read_occupancy_grid(in4, g), ParseError);
    CHECK_THROWS_AS(read_occupancy_grid_file("/nonexistent/grid.txt", g), IoError);
}

TEST_CASE("plan and trajectory writers") {
    const LatticeGeometry g(testing::small_geometry());
    const TargetPattern t = make_target_pattern(g, {}, 1.0);
    SiteMask loading(g.site_count()), stored(g.site_count());
    loading.set(g.tweezer_sites().indices()[0]);
    const MovePlan plan = plan_cycle(g, loading, stored, t);
    std::ostringstream s;
    write_plan(s, plan, KinematicParams{});
    const std::string text = s.str();
    CHECK(text.rfind("atomcycle-plan 1\n", 0) == 0);
    CHECK(text.find("\nmove 0 ") != std::string::npos);
    CHECK(text.find("\nend\n") != std::string::npos);
    std::ostringstream tr;
    write_trajectory(tr, synthesize_trajectory(g, plan.moves[0], KinematicParams{}));
    CHECK(!tr.str().empty());
}
