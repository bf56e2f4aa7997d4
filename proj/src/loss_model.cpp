#include "atomcycle/loss_model.hpp"

#include <algorithm>
#include <cmath>

#include "atomcycle/errors.hpp"

namespace atomcycle {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_probability(double p, const char* name) {
    if (!is_probability(p)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(std::string(name) + " must be positive");
}

}  // namespace

double mot_extra_loss_for_total(double total_loss, double roundtrip_infidelity, double hold_time,
                                double shelving_lifetime) {
    const double without_mot = (1.0 - roundtrip_infidelity) * std::exp(-hold_time / shelving_lifetime);
    const double extra = 1.0 - (1.0 - total_loss) / without_mot;
    if (!is_probability(extra))
        throw DomainError("total shelving loss is not reachable with the given infidelity and hold time");
    return extra;
}

void validate(const LossParameters& p) {
    require_probability(p.alpha_r, "alpha_r");
    require_probability(p.alpha_c, "alpha_c");
    if (p.n_load && !(*p.n_load >= 0.0)) throw DomainError("n_load must be non-negative");
    require_probability(p.load_fraction, "load_fraction");
    if (p.n_tweezers < 0) throw DomainError("n_tweezers must be non-negative");
    require_probability(p.shelving_roundtrip_infidelity, "shelving_roundtrip_infidelity");
    require_positive(p.shelving_lifetime, "shelving_lifetime");
    require_positive(p.hold_time, "hold_time");
    require_probability(p.mot_extra_loss, "mot_extra_loss");
    require_positive(p.vacuum_lifetime, "vacuum_lifetime");
    require_positive(p.cycle_time, "cycle_time");
    require_probability(p.heating_extinction, "heating_extinction");
    require_probability(p.detection_infidelity, "detection_infidelity");
    require_probability(p.imaging_loss, "imaging_loss");
}

double amplification_factor(double alpha_r, double alpha_c) {
    if (!(alpha_c > 0.0)) throw DomainError("alpha_c must be > 0: amplification is unbounded without cycle loss");
    require_probability(alpha_r, "alpha_r");
    require_probability(alpha_c, "alpha_c");
    return (1.0 - alpha_r) / alpha_c;
}

double steady_state(double n_load, double alpha_r, double alpha_c) {
    if (!(n_load >= 0.0)) throw DomainError("n_load must be non-negative");
    return amplification_factor(alpha_r, alpha_c) * n_load;
}

double effective_load(double n_load, double alpha_r) {
    require_probability(alpha_r, "alpha_r");
    return n_load * (1.0 - alpha_r);
}

std::vector<double> iterate_recurrence(double n0, double n_load, double alpha_r, double alpha_c, int n_cycles) {
    if (n_cycles < 0) throw DomainError("n_cycles must be non-negative");
    std::vector<double> n(static_cast<std::size_t>(n_cycles) + 1);
    n[0] = n0;
    const double keep = 1.0 - alpha_c;
    const double added = (1.0 - alpha_r) * n_load;
    for (int i = 0; i < n_cycles; ++i) n[i + 1] = keep * n[i] + added;
    return n;
}

double shelving_stage_survival(const LossParameters& p) {
    return (1.0 - p.shelving_roundtrip_infidelity) * std::exp(-p.hold_time / p.shelving_lifetime) *
           (1.0 - p.mot_extra_loss);
}

double vacuum_survival(double t, double vacuum_lifetime) {
    if (!(t >= 0.0)) throw DomainError("time must be non-negative");
    require_positive(vacuum_lifetime, "vacuum_lifetime");
    return std::exp(-t / vacuum_lifetime);
}

double ionization_rate(double depth_mk, const IonizationModel& m) {
    if (!(depth_mk >= 0.0)) throw DomainError("trap depth must be non-negative");
    return std::max(0.0, m.quadratic_coefficient * depth_mk * depth_mk + m.linear_coefficient * depth_mk +
                             m.constant_rate);
}

std::string to_string(TransportMode mode) { return mode == TransportMode::between ? "between" : "through"; }

TransportMode parse_transport_mode(const std::string& tag) {
    if (tag == "between") return TransportMode::between;
    if (tag == "through") return TransportMode::through;
    throw DomainError("unknown transport mode '" + tag + "' (expected between or through)");
}

void validate(const MoveSuccessModel& m) {
    require_probability(m.p0, "move_success.p0");
    require_positive(m.decay_length_between, "move_success.decay_length_between");
    require_positive(m.decay_length_through, "move_success.decay_length_through");
}

double move_success_prob(double distance, TransportMode mode, const MoveSuccessModel& m) {
    if (!(distance >= 0.0)) throw DomainError("move distance must be non-negative");
    return std::clamp(m.p0 * std::exp(-distance / m.decay_length(mode)), 0.0, 1.0);
}

void validate(const CollateralModel& m) {
    require_positive(m.d_min, "collateral.d_min");
    require_probability(m.loss_probability_inside, "collateral.loss_probability_inside");
    require_probability(m.disturbance_per_move, "collateral.disturbance_per_move");
}

}  // namespace atomcycle
