#include <doctest.h>

#include <random>

#include "atomcycle/errors.hpp"
#include "atomcycle/loss_model.hpp"

using namespace atomcycle;

TEST_CASE("amplification factor and steady state") {
    CHECK(amplification_factor(0.02, 0.008) == doctest::Approx(122.5).epsilon(1e-12));
    CHECK(steady_state(100.0, 0.02, 0.008) == doctest::Approx(12250.0).epsilon(1e-12));
    CHECK(steady_state(0.0, 0.02, 0.008) == 0.0);
    CHECK(effective_load(130.0, 0.05) == doctest::Approx(123.5));
    CHECK_THROWS_AS(amplification_factor(0.05, 0.0), DomainError);
    CHECK_THROWS_AS(amplification_factor(1.5, 0.1), DomainError);
    CHECK_THROWS_AS(steady_state(-1.0, 0.05, 0.1), DomainError);
}

TEST_CASE("recurrence matches the closed form") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double ar = 0.5 * u(rng), ac = 0.01 + 0.5 * u(rng), nl = 500 * u(rng), n0 = 2000 * u(rng);
        const auto n = iterate_recurrence(n0, nl, ar, ac, 60);
        const double inf = steady_state(nl, ar, ac);
        for (int i = 0; i <= 60; ++i)
            CHECK(n[i] == doctest::Approx(inf + (n0 - inf) * std::pow(1.0 - ac, i)).epsilon(1e-12));
    }
    CHECK(iterate_recurrence(5.0, 1.0, 0.1, 0.1, 0) == std::vector<double>{5.0});
    CHECK_THROWS_AS(iterate_recurrence(0, 1, 0.1, 0.1, -1), DomainError);
}

TEST_CASE("default shelving stage loses six percent") {
    const LossParameters p;
    CHECK(shelving_stage_survival(p) == doctest::Approx(0.94).epsilon(1e-12));
    CHECK(p.loaded_atoms() == doctest::Approx(129.2));
    CHECK(p.mot_extra_loss > 0.0);
    CHECK(vacuum_survival(2.5, 273.0) == doctest::Approx(std::exp(-2.5 / 273.0)));
    CHECK(vacuum_survival(0.0, 273.0) == 1.0);
    CHECK_THROWS_AS(mot_extra_loss_for_total(0.01, 0.03, 0.115, 13.0), DomainError);
    LossParameters bad;
    bad.imaging_loss = 2.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("photoionization rate") {
    const IonizationModel m;
    CHECK(ionization_rate(1.0, m) == 250.0);
    CHECK(ionization_rate(0.0, m) == 0.0);
    const double lifetime = 1.0 / ionization_rate(0.3, m);
    CHECK(std::abs(lifetime - 0.040) / 0.040 < 0.15);
    CHECK_THROWS_AS(ionization_rate(-0.1, m), DomainError);
}

TEST_CASE("transport success decays with distance per mode") {
    const MoveSuccessModel m;
    CHECK(move_success_prob(0.0, TransportMode::between, m) == doctest::Approx(0.99));
    CHECK(move_success_prob(100.0, TransportMode::through, m) == doctest::Approx(0.99 * std::exp(-1.0)));
    CHECK(move_success_prob(100.0, TransportMode::between, m) == doctest::Approx(0.99 * std::exp(-0.05)));
    CHECK(move_success_prob(10.0, TransportMode::between, m) > move_success_prob(10.0, TransportMode::through, m));
    CHECK_THROWS_AS(move_success_prob(-1.0, TransportMode::between, m), DomainError);
    CHECK(parse_transport_mode("between") == TransportMode::between);
    CHECK(to_string(TransportMode::through) == "through");
    CHECK_THROWS_AS(parse_transport_mode("diagonal"), DomainError);
}
