#include <doctest.h>

#include <set>

#include "atomcycle/config.hpp"
#include "atomcycle/errors.hpp"

using namespace atomcycle;

TEST_CASE("nested YAML sets flattened keys") {
    const RunConfiguration c = parse_config(R"(
loss:
  alpha_c: 0.2
  n_load: 50
simulation:
  n_cycles: 7
  seed: 99
  resort_disable_after: 5
geometry:
  tweezers:
    cols: 16
target:
  row_stride: 4
output:
  format: grid
)");
    CHECK(c.simulation.loss.alpha_c == 0.2);
    CHECK(*c.simulation.loss.n_load == 50.0);
    CHECK(c.simulation.n_cycles == 7);
    CHECK(c.simulation.rng_seed == 99);
    CHECK(*c.simulation.resort_disable_after == 5);
    CHECK(c.simulation.geometry.tweezers.cols == 16);
    CHECK(c.simulation.target.row_stride == 4);
    CHECK(c.format == OutputFormat::grid);
    // Untouched keys keep their defaults.
    CHECK(c.simulation.loss.alpha_r == 0.05);
}

TEST_CASE("unknown keys and bad values are configuration errors") {
    CHECK_THROWS_AS(parse_config("loss:\n  alpha_z: 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("simulation:\n  n_cycles: many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("simulation:\n  n_cycles: 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("- 1\n- 2\n"), ConfigError);
    RunConfiguration c;
    CHECK_THROWS_AS(apply_setting(c, "nope", "1"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "kinematics.profile", "bang_bang"), ConfigError);
    apply_setting(c, "loss.n_load", "none");
    CHECK(!c.simulation.loss.n_load);
    apply_setting(c, "geometry.tweezer_sites", "1,2,3");
    CHECK(c.simulation.geometry.tweezer_sites->size() == 3);
}

TEST_CASE("malformed YAML reports its position") {
    try {
        parse_config("loss:\n  alpha_c: [1, 2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 1);
    }
}

TEST_CASE("flattened settings round trip through YAML") {
    RunConfiguration c;
    c.simulation.loss.alpha_c = 0.1234567890123;
    c.simulation.resort_disable_after = 40;
    c.simulation.potential.form = PotentialForm::tube;
    c.initial_atoms = 12.5;
    const std::string y = to_yaml(c);
    const RunConfiguration back = parse_config(y);
    CHECK(flatten(back) == flatten(c));
    std::set<std::string> keys;
    for (const auto& [k, v] : flatten(c)) keys.insert(k);
    CHECK(keys.size() == setting_keys().size());
    CHECK(keys.count("loss.alpha_c") == 1);
    CHECK(keys.count("collateral.d_min") == 1);
}

TEST_CASE("missing config file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/atomcycle.yaml"), IoError);
    CHECK(parse_output_format("table") == OutputFormat::table);
    CHECK_THROWS_AS(parse_output_format("csv"), DomainError);
}
