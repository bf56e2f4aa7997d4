#include <doctest.h>

#include <random>

#include "atomcycle/analysis.hpp"
#include "atomcycle/errors.hpp"
#include "atomcycle/loss_model.hpp"
#include "helpers.hpp"

using namespace atomcycle;

namespace {

struct Fixture {
    LatticeGeometry g{testing::small_geometry()};
    TargetPattern t{make_target_pattern(g, {}, 1.0)};

    OccupancyMatrix image(std::initializer_list<int> target_indices, int tag) const {
        OccupancyMatrix m{SiteMask(g.site_count()), tag};
        for (int i : target_indices) m.occupied.set(t.sites()[i]);
        return m;
    }

    ImageSequence sequence() const {
        ImageSequence s;
        s.target = t.mask();
        s.tweezers = g.tweezer_sites();
        return s;
    }
};

long double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("fractions on hand-counted images") {
    const Fixture f;
    ImageSequence s = f.sequence();
    // a=0 b=1 c=2 d=3
    s.images = {f.image({0, 1}, 1), f.image({0, 1, 2}, 2), f.image({0, 2}, 1), f.image({0, 2, 3}, 2)};
    s.destinations = {{f.t.sites()[2]}, {f.t.sites()[3]}};
    validate(s, f.g);
    const FractionSeries m = per_cycle_metrics(s);
    CHECK(*m.shelved_survival[0] == doctest::Approx(2.0 / 3));
    CHECK(*m.gain_21p[0] == 0.0);
    CHECK(*m.cycle_survival[0] == doctest::Approx(2.0 / 3));
    CHECK(*m.gain_22p[0] == doctest::Approx(1.0 / 3));
    CHECK(*m.survival_1p2p[0] == 1.0);
    CHECK(*m.gain_1p2p[0] == doctest::Approx(1.0 / 3));
    CHECK(*m.stored_survival[0] == 1.0);
    CHECK(*m.fluctuation[0] == 0.0);
    CHECK(!m.fluctuation[1]);
    CHECK(!m.shelved_survival[1]);
    CHECK(m.stored_count == std::vector<double>{3, 3});
    CHECK(*m.loading_fraction[0] == 0.0);
    // No tweezer atom was seen, so move success is undefined.
    CHECK(!m.move_success[0]);

    const OccupancyMatrix empty = f.image({}, 1);
    CHECK(!survival_fraction(empty, empty, f.t.mask()));
    CHECK(!gain_fraction(empty, empty, f.t.mask()));
    // Off-target atoms are ignored.
    OccupancyMatrix stray = f.image({0}, 2);
    stray.occupied.set(f.g.index(0, 0));
    CHECK(*gain_fraction(empty, stray, f.t.mask()) == 1.0);
}

TEST_CASE("image sequence validation") {
    const Fixture f;
    ImageSequence s = f.sequence();
    s.images = {f.image({0}, 1), f.image({0}, 1)};
    CHECK_THROWS_AS(validate(s, f.g), DomainError);
    s.images = {f.image({0}, 1)};
    CHECK_THROWS_AS(validate(s, f.g), DomainError);
    s = f.sequence();
    s.target.set(f.g.index(0, 0));
    CHECK_THROWS_AS(validate(s, f.g), DomainError);
}

TEST_CASE("fluctuation needs two counts") {
    const std::vector<double> one{5.0};
    CHECK_THROWS_AS(atom_number_fluctuation(one), InsufficientDataError);
    const std::vector<double> c{10, 12, 0, 3};
    const auto d = atom_number_fluctuation(c);
    CHECK(*d[0] == doctest::Approx(0.2));
    CHECK(*d[1] == doctest::Approx(-1.0));
    CHECK(!d[2]);
    CHECK(!d[3]);
}

TEST_CASE("pearson against a long-double oracle") {
    const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 5};
    CHECK(*pearson(x, y) == doctest::Approx(static_cast<double>(oracle_pearson(x, y))).epsilon(1e-12));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(3 + trial), b(3 + trial), c(3 + trial);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = n(rng);
            b[i] = 0.5 * a[i] + n(rng);
            c[i] = -3.0 * a[i] + 7.0;
        }
        const double rho = *pearson(a, b);
        CHECK(rho == doctest::Approx(static_cast<double>(oracle_pearson(a, b))).epsilon(1e-10));
        CHECK(rho >= -1.0);
        CHECK(rho <= 1.0);
        CHECK(*pearson(b, a) == doctest::Approx(rho).epsilon(1e-12));
        // Affine maps keep |rho|.
        std::vector<double> b2(b);
        for (double& v : b2) v = 4.0 * v - 2.0;
        CHECK(*pearson(a, b2) == doctest::Approx(rho).epsilon(1e-10));
        CHECK(*pearson(a, c) == doctest::Approx(-1.0));
    }
    const std::vector<double> flat{2, 2, 2};
    const std::vector<double> three{1, 2, 3};
    CHECK(!pearson(flat, three));
    CHECK_THROWS_AS(pearson(std::span<const double>(x).first(3), y), DomainError);
    CHECK_THROWS_AS(pearson(std::span<const double>(x).first(1), std::span<const double>(y).first(1)), DomainError);
}

TEST_CASE("losses only during shelving correlate perfectly with s_21'") {
    const Fixture f;
    ImageSequence s = f.sequence();
    std::mt19937_64 rng(6);
    std::vector<int> held;
    for (int i = 0; i < 60; ++i) held.push_back(i);
    s.images.push_back(f.image({}, 1));
    for (int cycle = 0; cycle < 12; ++cycle) {
        if (cycle > 0) {
            // Random shelving loss between image 2 and the next image 1.
            std::vector<int> kept;
            std::bernoulli_distribution keep(0.7 + 0.02 * cycle);
            for (int i : held)
                if (keep(rng)) kept.push_back(i);
            held = kept;
            OccupancyMatrix one{SiteMask(f.g.site_count()), 1};
            for (int i : held) one.occupied.set(f.t.sites()[i]);
            s.images.push_back(one);
        }
        OccupancyMatrix two{SiteMask(f.g.site_count()), 2};
        for (int i : held) two.occupied.set(f.t.sites()[i]);
        s.images.push_back(two);
    }
    const CorrelationReport r = correlation_report(s);
    CHECK(*r.find("s_21'")->rho == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.find("s_21'")->n_pairs == 11);
    CHECK(r.find("nothing") == nullptr);
    CHECK(r.entries.size() == 6);
    // Nothing is gained, so the gain fractions are constant zero.
    CHECK(!r.find("a_21'")->rho);
}

TEST_CASE("correlation report needs three cycle pairs") {
    FractionSeries f;
    f.fluctuation = {0.1, 0.2, std::nullopt};
    CHECK_THROWS_AS(correlation_report(f), InsufficientDataError);
}

TEST_CASE("decay fit recovers an exact exponential") {
    std::vector<double> counts;
    for (int i = 0; i < 20; ++i) counts.push_back(i < 5 ? 10.0 * i + 1 : 1000.0 * std::pow(0.9, i - 5));
    const DecayFit fit = fit_decay(counts, {5, 19});
    CHECK(fit.survival == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(fit.alpha_c == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(std::log(1000.0)).epsilon(1e-12));
    CHECK(fit.residual_norm < 1e-10);
    CHECK(fit.slope_stderr < 1e-10);
    CHECK_THROWS_AS(fit_decay(counts, {5, 6}), InsufficientDataError);
    CHECK_THROWS_AS(fit_decay(counts, {15, 20}), InsufficientDataError);
    counts[10] = 0.0;
    CHECK_THROWS_AS(fit_decay(counts, {5, 19}), DomainError);
}

TEST_CASE("overlay reproduces data that follow the recurrence") {
    const double ac = 0.1, ar = 0.05, nl = 120.0;
    const std::vector<double> resort = iterate_recurrence(0.0, nl, ar, ac, 29);
    OverlayInputs in;
    for (int i = 0; i < 40; ++i) {
        const bool r = i < 30;
        in.stored.push_back(r ? resort[i] : resort[29] * std::pow(0.92, i - 29));
        in.resorted.push_back(r);
        in.n_loaded.push_back(r ? nl : 0.0);
        in.alpha_r.push_back(r ? MaybeValue(ar) : std::nullopt);
        in.alpha_c.push_back(i == 39 ? std::nullopt : MaybeValue(i + 1 < 30 ? ac : 0.08));
    }
    const Overlay o = model_overlay(in);
    CHECK(o.alpha_c_resort == doctest::Approx(ac));
    CHECK(o.alpha_c_decay == doctest::Approx(0.08));
    CHECK(o.alpha_r == doctest::Approx(ar));
    CHECK(o.n_load == doctest::Approx(nl));
    for (int i = 0; i < 40; ++i) CHECK(o.predicted[i] == doctest::Approx(in.stored[i]).epsilon(1e-9));
    CHECK_THROWS_AS(model_overlay(OverlayInputs{}), InsufficientDataError);
    in.resorted.pop_back();
    CHECK_THROWS_AS(model_overlay(in), DomainError);
}

TEST_CASE("analysis of a simulated trace") {
    SimulationConfig c = testing::small_config();
    c.n_cycles = 12;
    const RunTrace trace = run(c);
    const ImageSequence s = image_sequence(trace);
    validate(s, LatticeGeometry(c.geometry));
    CHECK(s.n_cycles() == 12);
    const FractionSeries m = per_cycle_metrics(s);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(m.stored_count[i] == static_cast<double>(trace.records[i].stored_count_after));
    const OverlayInputs in = overlay_inputs(s);
    CHECK(in.resorted[0] == !trace.records[0].destinations.empty());
    const Overlay o = model_overlay(in);
    CHECK(o.predicted.size() == 12);
    CHECK(o.predicted[0] == m.stored_count[0]);
    const CorrelationReport r = correlation_report(m);
    for (const auto& e : r.entries)
        if (e.rho) CHECK(std::abs(*e.rho) <= 1.0);
}
