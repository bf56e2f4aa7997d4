#pragma once

// Analytic per-cycle loss budget: amplification factor, build-up recurrence
// and steady state, shelving/hold/vacuum survival, photoionization in the
// tweezers and distance-dependent transport success.

#include <optional>
#include <string>
#include <vector>

namespace atomcycle {

/// Extra MOT-induced loss that brings the default shelving stage to
/// `total_loss` given the default round-trip infidelity, lifetime and hold.
double mot_extra_loss_for_total(double total_loss, double roundtrip_infidelity, double hold_time,
                                double shelving_lifetime);

inline constexpr double kDefaultShelvingTotalLoss = 0.06;

struct LossParameters {
    // Deterministic model inputs.
    double alpha_r = 0.05;
    double alpha_c = 0.10;
    /// Atoms loaded per cycle; defaults to load_fraction · n_tweezers.
    std::optional<double> n_load;

    double load_fraction = 0.40;
    int n_tweezers = 323;

    double shelving_roundtrip_infidelity = 0.03;
    double shelving_lifetime = 13.0;  // s
    double hold_time = 0.115;         // s
    double mot_extra_loss = mot_extra_loss_for_total(kDefaultShelvingTotalLoss, 0.03, 0.115, 13.0);

    double vacuum_lifetime = 273.0;  // s
    double cycle_time = 2.5;         // s

    double heating_extinction = 5e-4;
    double detection_infidelity = 0.005;
    double imaging_loss = 0.005;

    double loaded_atoms() const { return n_load.value_or(load_fraction * n_tweezers); }
};

/// Throws DomainError naming the first field outside its range.
void validate(const LossParameters& params);

/// β = (1 − α_r)/α_c
double amplification_factor(double alpha_r, double alpha_c);
/// N_∞ = (1 − α_r)·N_L/α_c
double steady_state(double n_load, double alpha_r, double alpha_c);
/// N_L,eff = N_L·(1 − α_r)
double effective_load(double n_load, double alpha_r);
/// N_0 … N_{n_cycles} of N_{i+1} = (1 − α_c)·N_i + (1 − α_r)·N_L.
std::vector<double> iterate_recurrence(double n0, double n_load, double alpha_r, double alpha_c, int n_cycles);

/// (1 − round-trip infidelity)·exp(−hold/lifetime)·(1 − MOT extra loss)
double shelving_stage_survival(const LossParameters& params);
/// exp(−t/τ_vacuum)
double vacuum_survival(double t, double vacuum_lifetime);

struct IonizationModel {
    double quadratic_coefficient = 250.0;  // s⁻¹ mK⁻²
    double linear_coefficient = 0.0;       // s⁻¹ mK⁻¹
    double constant_rate = 0.0;            // s⁻¹
};

/// Loss rate in s⁻¹ of shelved atoms exposed to tweezer light of the given depth (mK).
double ionization_rate(double depth_mk, const IonizationModel& model);

enum class TransportMode { between, through };

std::string to_string(TransportMode mode);
/// Throws DomainError on an unknown tag.
TransportMode parse_transport_mode(const std::string& tag);

struct MoveSuccessModel {
    double p0 = 0.99;
    double decay_length_between = 2000.0;  // μm
    double decay_length_through = 100.0;   // μm

    double decay_length(TransportMode mode) const {
        return mode == TransportMode::between ? decay_length_between : decay_length_through;
    }
};

void validate(const MoveSuccessModel& model);

/// p0·exp(−d/λ_mode), clamped to [0, 1].
double move_success_prob(double distance, TransportMode mode, const MoveSuccessModel& model);

/// Inner distance below which a passing tweezer ejects stored atoms, plus a
/// weak per-move disturbance of every stored atom.
struct CollateralModel {
    double d_min = 1.0;  // μm
    double loss_probability_inside = 1.0;
    /// Probability that one move ejects a given stored atom outside d_min.
    double disturbance_per_move = 2.5e-4;
};

void validate(const CollateralModel& model);

}  // namespace atomcycle
