#include <doctest.h>

#include <cmath>

#include "atomcycle/errors.hpp"
#include "atomcycle/simulator.hpp"
#include "helpers.hpp"

using namespace atomcycle;

namespace {

SimulationConfig lossless(SimulationConfig c) {
    c.loss.shelving_roundtrip_infidelity = 0.0;
    c.loss.mot_extra_loss = 0.0;
    c.loss.hold_time = 1e-12;
    c.loss.shelving_lifetime = 1e300;
    c.loss.cycle_time = 1e-12;
    c.loss.vacuum_lifetime = 1e300;
    c.loss.detection_infidelity = 0.0;
    c.loss.imaging_loss = 0.0;
    c.loss.heating_extinction = 0.0;
    c.move_success.p0 = 1.0;
    c.move_success.decay_length_between = 1e300;
    c.move_success.decay_length_through = 1e300;
    c.collateral.disturbance_per_move = 0.0;
    return c;
}

}  // namespace

TEST_CASE("runs are deterministic in the seed") {
    const SimulationConfig c = testing::small_config();
    const Simulator sim(c);
    const RunTrace a = sim.run(42);
    const RunTrace b = sim.run(42);
    const RunTrace d = sim.run(43);
    CHECK(a.records == b.records);
    CHECK(a.records != d.records);
    CHECK(a.records.size() == 10);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].cycle_index == static_cast<int>(i));
        CHECK(a.records[i].image1.image_tag == 1);
        CHECK(a.records[i].image2.image_tag == 2);
    }
}

TEST_CASE("true-state bookkeeping balances every cycle") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 40;
    c.loss.detection_infidelity = 0.05;
    c.collateral.disturbance_per_move = 0.01;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RunTrace t = Simulator(c).run(seed);
        std::size_t prev_after = 0;
        for (const CycleRecord& r : t.records) {
            CHECK(r.stored_before == prev_after);
            const long long balance = static_cast<long long>(r.stored_before) - r.n_shelving_losses -
                                      r.n_vacuum_losses - r.n_imaging_losses - r.n_collateral_losses -
                                      r.n_disturbance_losses - r.n_pair_losses + r.n_moves_succeeded;
            CHECK(balance == static_cast<long long>(r.stored_true_after));
            CHECK(r.n_moves_planned == r.n_moves_attempted + r.n_phantom_moves);
            CHECK(r.n_moves_attempted ==
                  r.n_moves_succeeded + r.n_move_losses + r.n_pair_losses);
            CHECK(r.new_survivors <= r.n_moves_succeeded);
            CHECK(r.destinations.size() == r.n_moves_planned);
            prev_after = r.stored_true_after;
        }
    }
}

TEST_CASE("without resorting the storage count never grows") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 30;
    c.resort_disable_after = 5;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RunTrace t = Simulator(c).run(seed);
        for (std::size_t i = 5; i < t.records.size(); ++i) {
            const CycleRecord& r = t.records[i];
            CHECK(!r.resorted);
            CHECK(r.n_moves_planned == 0);
            CHECK(r.stored_true_after <= r.stored_before);
            CHECK(r.new_survivors == 0);
        }
    }
}

TEST_CASE("lossless cycles count every loaded atom") {
    SimulationConfig c = lossless(testing::small_config());
    c.loss.load_fraction = 1.0;
    const RunTrace t = Simulator(c).run(7);
    const TargetPattern target = make_target_pattern(LatticeGeometry(c.geometry), c.target, 1.0);
    std::size_t expected = 0;
    for (const CycleRecord& r : t.records) {
        CHECK(r.n_loaded == 12);
        expected = std::min(target.capacity(), expected + 12);
        CHECK(r.stored_true_after == expected);
        CHECK(r.stored_count_after == expected);
        CHECK(r.n_phantom_moves == 0);
        CHECK(r.n_pair_losses == 0);
        CHECK(r.n_collateral_losses == 0);
    }
    const EmergentParameters p = t.wall_parameters;
    for (std::size_t i = 1; i < p.alpha_c.size(); ++i) CHECK(*p.alpha_c[i] == 0.0);
    CHECK(*p.alpha_r[0] == 0.0);
}

TEST_CASE("loading and shelving statistics") {
    SimulationConfig c;
    const LatticeGeometry g(c.geometry);
    Rng rng(3);
    std::size_t loaded = 0, untrapped = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        SiteMask state(g.site_count());
        load_reservoir(rng, g, c, state);
        loaded += count_and(state, g.tweezer_sites());
        untrapped += state.count() - count_and(state, g.tweezer_sites());
        CHECK(count_and(state, g.storage_zone()) == 0);
    }
    const double n = 323.0 * trials;
    CHECK(std::abs(loaded / n - 0.4) < 4 * std::sqrt(0.24 / n));
    const double m = (7480.0 - 323.0) * trials;
    const double p = 0.4 * 5e-4;
    CHECK(std::abs(untrapped / m - p) < 5 * std::sqrt(p / m));

    // Loading keeps existing tweezer atoms and never touches storage.
    SiteMask state = g.tweezer_sites() | g.storage_zone();
    load_reservoir(rng, g, c, state);
    CHECK(count_and(state, g.tweezer_sites()) == 323);
    CHECK(count_and(state, g.storage_zone()) == g.storage_zone().count());

    SiteMask full = g.storage_zone();
    const std::size_t lost = apply_shelving_stage(rng, g, c.loss, full);
    const double k = static_cast<double>(g.storage_zone().count());
    CHECK(std::abs(lost / k - 0.06) < 5 * std::sqrt(0.06 * 0.94 / k));
    CHECK(lost + full.count() == g.storage_zone().count());
}

TEST_CASE("capture_image separates detection errors from losses") {
    LossParameters p;
    p.detection_infidelity = 0.1;
    p.imaging_loss = 0.2;
    Rng rng(8);
    const std::size_t n = 100000;
    SiteMask state(n);
    for (std::size_t i = 0; i < n / 2; ++i) state.set(static_cast<SiteIndex>(i));
    const SiteMask before = state;
    std::size_t lost = 0;
    const OccupancyMatrix img = capture_image(rng, p, 1, state, &before, &lost);
    CHECK(img.image_tag == 1);
    CHECK(lost == before.count() - state.count());
    CHECK(count_and(state, before) == state.count());
    const double half = n / 2.0;
    CHECK(std::abs(lost / half - 0.2) < 0.01);
    const double false_neg = (half - count_and(img.occupied, before)) / half;
    const double false_pos = (img.occupied.count() - count_and(img.occupied, before)) / half;
    CHECK(std::abs(false_neg - 0.1) < 0.01);
    CHECK(std::abs(false_pos - 0.1) < 0.01);
}

TEST_CASE("execute_plan outcomes") {
    const LatticeGeometry g(testing::small_geometry());
    const TargetPattern t = make_target_pattern(g, {}, 1.0);
    MoveSuccessModel sure;
    sure.p0 = 1.0;
    sure.decay_length_between = sure.decay_length_through = 1e300;
    CollateralModel col;
    col.disturbance_per_move = 0.0;
    const SiteIndex src = g.tweezer_sites().indices()[0];
    const SiteIndex dst = t.sites()[1];
    MovePlan plan;
    plan.moves.push_back(route_move(g, src, dst, RouteOptions{t.approach_offset(g.row_of(dst))}));
    Rng rng(1);

    SUBCASE("success") {
        SiteMask state(g.site_count());
        state.set(src);
        const ExecutionTally tally = execute_plan(rng, g, plan, sure, col, state);
        CHECK(tally.succeeded == 1);
        CHECK(state.test(dst));
        CHECK(!state.test(src));
        CHECK(tally.inserted.test(dst));
    }
    SUBCASE("empty source") {
        SiteMask state(g.site_count());
        CHECK_THROWS_AS(execute_plan(rng, g, plan, sure, col, state), StateError);
        const ExecutionTally tally = execute_plan(rng, g, plan, sure, col, state, SourcePolicy::lenient);
        CHECK(tally.phantom == 1);
        CHECK(state.count() == 0);
    }
    SUBCASE("occupied destination loses both atoms") {
        SiteMask state(g.site_count());
        state.set(src);
        state.set(dst);
        const ExecutionTally tally = execute_plan(rng, g, plan, sure, col, state);
        CHECK(tally.pair_losses == 1);
        CHECK(state.count() == 0);
    }
    SUBCASE("failed transport") {
        MoveSuccessModel never = sure;
        never.p0 = 0.0;
        SiteMask state(g.site_count());
        state.set(src);
        const ExecutionTally tally = execute_plan(rng, g, plan, never, col, state);
        CHECK(tally.move_losses == 1);
        CHECK(state.count() == 0);
    }
    SUBCASE("atoms next to the path are ejected") {
        SiteMask state(g.site_count());
        state.set(src);
        // A storage atom on the insertion column right next to the approach corridor.
        const Move& m = plan.moves[0];
        const Point corridor = m.strokes[m.strokes.size() - 2].to;
        const int row = static_cast<int>(std::lround(corridor.y / g.spacing_y() + 0.5));
        const SiteIndex victim = g.index(g.col_of(dst) - 1, std::min(row, g.n_rows() - 1));
        state.set(victim);
        const ExecutionTally tally = execute_plan(rng, g, plan, sure, col, state);
        CHECK(tally.collateral_losses == 1);
        CHECK(!state.test(victim));
        CHECK(state.test(dst));
    }
    SUBCASE("disturbance scales with later moves") {
        CollateralModel always = col;
        always.disturbance_per_move = 1.0;
        SiteMask state(g.site_count());
        state.set(src);
        state.set(t.sites().back());
        const ExecutionTally tally = execute_plan(rng, g, plan, sure, always, state);
        // The stored atom saw one move; the inserted atom saw none.
        CHECK(tally.disturbance_losses == 1);
        CHECK(state.test(dst));
        CHECK(!state.test(t.sites().back()));
    }
}

TEST_CASE("replicas use distinct derived seeds") {
    SimulationConfig c = testing::small_config();
    c.n_replicas = 4;
    const Ensemble e = run_replicas(c, 2);
    const Ensemble serial = run_replicas(c, 1);
    REQUIRE(e.traces.size() == 4);
    for (int r = 0; r < 4; ++r) {
        CHECK(e.traces[r].seed == replica_seed(c.rng_seed, r));
        CHECK(e.traces[r].records == serial.traces[r].records);
    }
    CHECK(replica_seed(1, 0) != replica_seed(1, 1));
    CHECK(replica_seed(1, 0) != replica_seed(2, 0));
    for (std::size_t i = 0; i < e.mean.size(); ++i) {
        double s = 0.0;
        for (const auto& t : e.traces) s += t.records[i].stored_count_after;
        CHECK(e.mean[i] == doctest::Approx(s / 4));
        CHECK(e.stddev[i] >= 0.0);
    }
}

TEST_CASE("configuration checks") {
    SimulationConfig c = testing::small_config();
    c.loss.n_tweezers = 13;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = testing::small_config();
    c.n_cycles = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = testing::small_config();
    c.resort_disable_after = 11;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = testing::small_config();
    c.mot_background = 1.5;
    CHECK_THROWS_AS(validate(c), DomainError);
    c = testing::small_config();
    c.target.row_stride = 2;
    CHECK_THROWS_AS(validate(c), DomainError);
    CHECK_NOTHROW(validate(testing::small_config()));
}

TEST_CASE("empirical move success matches the model probability") {
    const LatticeGeometry g(testing::small_geometry());
    const TargetPattern t = make_target_pattern(g, {}, 1.0);
    const SiteIndex src = g.tweezer_sites().indices()[5];
    const SiteIndex dst = t.sites()[40];
    MovePlan plan;
    plan.moves.push_back(route_move(g, src, dst, RouteOptions{t.approach_offset(g.row_of(dst))}));
    MoveSuccessModel m;
    m.decay_length_through = 20.0;
    double between = 0.0, through = 0.0;
    for (const Stroke& s : plan.moves[0].strokes) (s.mode == TransportMode::between ? between : through) += s.length();
    const double p = m.p0 * std::exp(-between / m.decay_length_between - through / m.decay_length_through);
    CollateralModel col;
    col.disturbance_per_move = 0.0;
    Rng rng(12);
    const int reps = 1000;
    int ok = 0;
    for (int i = 0; i < reps; ++i) {
        SiteMask state(g.site_count());
        state.set(src);
        ok += static_cast<int>(execute_plan(rng, g, plan, m, col, state).succeeded);
    }
    CHECK(std::abs(ok / double(reps) - p) < 3 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("moves never exceed the loaded atoms") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 30;
    const RunTrace t = Simulator(c).run(5);
    for (const CycleRecord& r : t.records) {
        CHECK(r.n_moves_succeeded <= r.n_moves_attempted);
        CHECK(r.n_moves_attempted <= r.n_loaded);
        CHECK(r.stored_count_after == count_and(r.image2.occupied, make_target_pattern(LatticeGeometry(c.geometry), c.target, 1.0).mask()));
    }
}

TEST_CASE("ensemble mean follows the recurrence with emergent parameters") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 40;
    c.n_replicas = 50;
    c.loss.detection_infidelity = 0.0;
    const Ensemble e = run_replicas(c, 1);
    double ac = 0.0, ar = 0.0, nl = 0.0;
    for (const RunTrace& t : e.traces) {
        ac += t.wall_parameters.mean_alpha_c(1).value() / 50;
        ar += t.wall_parameters.mean_alpha_r().value() / 50;
        nl += t.wall_parameters.mean_n_loaded() / 50;
    }
    const std::vector<double> model = iterate_recurrence(0.0, nl, ar, ac, c.n_cycles);
    for (int i = 0; i < c.n_cycles; ++i) {
        const double band = 3.0 * std::max(e.stddev[i], 1.0);
        CHECK(std::abs(e.mean[i] - model[i + 1]) <= band);
    }
}

TEST_CASE("false detections produce gains with no atoms added") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 30;
    c.resort_disable_after = 0;
    c.loss.detection_infidelity = 0.02;
    const RunTrace t = Simulator(c).run(9);
    const TargetPattern target = make_target_pattern(LatticeGeometry(c.geometry), c.target, 1.0);
    std::size_t gained = 0;
    for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
        CHECK(t.records[i].stored_true_after == 0);
        SiteMask fresh = t.records[i + 1].image1.occupied & target.mask();
        fresh.subtract(t.records[i].image2.occupied);
        gained += fresh.count();
    }
    // Spurious detections on empty target sites: about p per site and image.
    const double expected = 0.02 * 0.98 * target.capacity() * 29;
    CHECK(std::abs(gained - expected) < 4 * std::sqrt(expected));
}
