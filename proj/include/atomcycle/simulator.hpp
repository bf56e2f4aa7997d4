#pragma once

// Seeded Monte Carlo replay of the continuous loading cycle over occupancy
// matrices. The true lattice state and the observed images are kept apart:
// the planner and every statistic only see images.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "atomcycle/geometry.hpp"
#include "atomcycle/loss_model.hpp"
#include "atomcycle/planner.hpp"

namespace atomcycle {

struct SimulationConfig {
    GeometryParams geometry;
    PotentialModel potential;
    LossParameters loss;
    MoveSuccessModel move_success;
    CollateralModel collateral;
    IonizationModel ionization;
    KinematicParams kinematics;
    TargetPatternParams target;
    AssignmentOptions assignment;

    int n_cycles = 100;
    /// Resorting is skipped from this cycle index on.
    std::optional<int> resort_disable_after;
    std::uint64_t rng_seed = 1;
    int n_replicas = 1;

    /// MOT fill of lattice-only sites before the trap-selective heating pulse.
    double mot_background = 0.4;
    /// Per-site probability that a lattice-only loading-zone atom is shelved
    /// by accident during the MOT and so survives the heating pulse.
    double accidental_shelving = 0.0;
    /// Tweezer depth seen by atoms left in the reservoir while the MOT runs.
    double tweezer_depth_mk = 0.3;
};

/// Throws ConfigError for inconsistent settings and DomainError for values
/// outside a parameter's range.
void validate(const SimulationConfig& config);

/// Mersenne twister with a 53-bit uniform helper, so streams are identical
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Seed of replica `replica` derived from the base seed (splitmix64 mixing).
std::uint64_t replica_seed(std::uint64_t base_seed, int replica);

struct OccupancyMatrix {
    SiteMask occupied;
    /// 1 for the image before resorting, 2 for the image after.
    int image_tag = 1;
    friend bool operator==(const OccupancyMatrix&, const OccupancyMatrix&) = default;
};

struct CycleRecord {
    int cycle_index = 0;
    OccupancyMatrix image1;
    OccupancyMatrix image2;
    bool resorted = false;

    std::size_t n_loaded = 0;  // true atoms on tweezer sites after loading
    std::size_t n_moves_planned = 0;
    std::size_t n_moves_attempted = 0;  // planned moves whose source held an atom
    std::size_t n_moves_succeeded = 0;
    std::size_t n_phantom_moves = 0;  // planned from a false detection or an imaging loss
    std::size_t n_move_losses = 0;
    std::size_t n_pair_losses = 0;  // stored atoms lost to an atom moved onto them
    std::size_t n_collateral_losses = 0;
    std::size_t n_disturbance_losses = 0;
    std::size_t n_shelving_losses = 0;
    std::size_t n_vacuum_losses = 0;
    std::size_t n_imaging_losses = 0;  // stored atoms, both images

    std::size_t stored_before = 0;      // true storage count at cycle start
    std::size_t stored_true_after = 0;  // true storage count after image 2
    std::size_t new_survivors = 0;      // atoms moved in this cycle still there after image 2
    /// Target-site occupation of the observed image 2.
    std::size_t stored_count_after = 0;

    /// Destinations of the planned moves, in execution order.
    std::vector<SiteIndex> destinations;
    friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

struct EmergentParameters {
    /// 1 − (old atoms surviving the cycle)/(stored_before); empty when nothing was stored.
    std::vector<std::optional<double>> alpha_c;
    /// 1 − new_survivors/n_loaded; empty when nothing was loaded.
    std::vector<std::optional<double>> alpha_r;
    std::vector<double> n_loaded;

    std::optional<double> mean_alpha_c(int first = 0, int last = -1) const;
    std::optional<double> mean_alpha_r(int first = 0, int last = -1) const;
    double mean_n_loaded(int first = 0, int last = -1) const;
};

/// Emergent α_c, α_r and N_L series from the true-state tallies of the records.
EmergentParameters emergent_parameters(const std::vector<CycleRecord>& records);

struct RunTrace {
    SimulationConfig config;
    std::uint64_t seed = 0;
    int replica = 0;
    std::vector<CycleRecord> records;
    EmergentParameters wall_parameters;
};

/// Loss tally of one plan execution.
struct ExecutionTally {
    std::size_t attempted = 0;
    std::size_t succeeded = 0;
    std::size_t phantom = 0;
    std::size_t move_losses = 0;
    std::size_t pair_losses = 0;
    std::size_t collateral_losses = 0;
    std::size_t disturbance_losses = 0;
    /// Sites that received an atom.
    SiteMask inserted;
};

enum class SourcePolicy {
    /// A move from an empty source throws StateError.
    strict,
    /// A move from an empty source sweeps an empty tweezer and is tallied as phantom.
    lenient,
};

/// Refills the loading zone: empty tweezer sites load with load_fraction,
/// lattice-only sites keep the heating residue mot_background·extinction
/// plus any accidental shelving. Storage sites are untouched.
void load_reservoir(Rng& rng, const LatticeGeometry& geometry, const SimulationConfig& config, SiteMask& state);

/// Each stored atom survives with `survival`; returns the number lost.
std::size_t apply_survival(Rng& rng, const SiteMask& zone, double survival, SiteMask& state);
/// Shelving stage survival applied to the storage zone; returns the number lost.
std::size_t apply_shelving_stage(Rng& rng, const LatticeGeometry& geometry, const LossParameters& params,
                                 SiteMask& state);

/// Executes the moves in order on the true state.
ExecutionTally execute_plan(Rng& rng, const LatticeGeometry& geometry, const MovePlan& plan,
                            const MoveSuccessModel& success, const CollateralModel& collateral, SiteMask& state,
                            SourcePolicy policy = SourcePolicy::strict);

/// Observed image of the state. Imaging loss removes atoms from `state`;
/// detection errors only affect the returned image. `imaging_losses`, when
/// given, receives the number of atoms lost inside `tally_zone`.
OccupancyMatrix capture_image(Rng& rng, const LossParameters& params, int image_tag, SiteMask& state,
                              const SiteMask* tally_zone = nullptr, std::size_t* imaging_losses = nullptr);

class Simulator {
public:
    explicit Simulator(const SimulationConfig& config);

    const SimulationConfig& config() const noexcept { return config_; }
    const LatticeGeometry& geometry() const noexcept { return geometry_; }
    const TargetPattern& target() const noexcept { return target_; }

    RunTrace run(std::uint64_t seed, int replica = 0) const;

private:
    SimulationConfig config_;
    LatticeGeometry geometry_;
    TargetPattern target_;
};

/// Single run with config.rng_seed.
RunTrace run(const SimulationConfig& config);

struct Ensemble {
    std::vector<RunTrace> traces;
    /// Per cycle mean and population standard deviation of stored_count_after.
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// config.n_replicas independent runs with seeds replica_seed(rng_seed, r),
/// spread over up to `threads` worker threads (0: hardware concurrency).
Ensemble run_replicas(const SimulationConfig& config, unsigned threads = 0);

}  // namespace atomcycle
