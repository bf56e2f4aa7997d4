#include "atomcycle/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "atomcycle/errors.hpp"
#include "atomcycle/kernels.hpp"

namespace atomcycle {
namespace {

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

// Stored atoms as coordinate arrays for the distance kernels.
struct StoredAtoms {
    std::vector<SiteIndex> sites;
    std::vector<double> xs;
    std::vector<double> ys;

    StoredAtoms(const LatticeGeometry& g, const SiteMask& state) {
        sites = (state & g.storage_zone()).indices();
        xs.reserve(sites.size());
        ys.reserve(sites.size());
        for (SiteIndex s : sites) {
            xs.push_back(g.xs()[s]);
            ys.push_back(g.ys()[s]);
        }
    }

    void remove_at(std::size_t i) {
        sites.erase(sites.begin() + static_cast<std::ptrdiff_t>(i));
        xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i));
        ys.erase(ys.begin() + static_cast<std::ptrdiff_t>(i));
    }

    void add(const LatticeGeometry& g, SiteIndex s) {
        sites.push_back(s);
        xs.push_back(g.xs()[s]);
        ys.push_back(g.ys()[s]);
    }
};

// Squared distance from every stored atom to the move's path.
void path_dist2(const Move& move, const LatticeGeometry& g, const StoredAtoms& atoms, std::vector<double>& best,
                std::vector<double>& scratch) {
    const auto& k = kernels::active();
    const std::size_t n = atoms.sites.size();
    best.assign(n, std::numeric_limits<double>::infinity());
    scratch.resize(n);
    const std::vector<Point> path = move.polyline(g);
    const std::size_t n_segments = path.size() == 1 ? 1 : path.size() - 1;
    for (std::size_t s = 0; s < n_segments; ++s) {
        const Point a = path[s];
        const Point b = path.size() == 1 ? a : path[s + 1];
        k.segment_dist2(kernels::Segment{a.x, a.y, b.x, b.y}, atoms.xs.data(), atoms.ys.data(), n, scratch.data());
        for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], scratch[i]);
    }
}

double move_success_probability(const Move& move, const MoveSuccessModel& m) {
    double between = 0.0;
    double through = 0.0;
    for (const Stroke& s : move.strokes) (s.mode == TransportMode::between ? between : through) += s.length();
    return std::clamp(m.p0 * std::exp(-between / m.decay_length_between - through / m.decay_length_through), 0.0,
                      1.0);
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& v, int first, int last) {
    if (last < 0) last = static_cast<int>(v.size()) - 1;
    double sum = 0.0;
    int n = 0;
    for (int i = std::max(first, 0); i <= last && i < static_cast<int>(v.size()); ++i) {
        if (!v[i]) continue;
        sum += *v[i];
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace

void validate(const SimulationConfig& c) {
    if (c.n_cycles < 1) throw ConfigError("n_cycles must be at least 1");
    if (c.n_replicas < 1) throw ConfigError("n_replicas must be at least 1");
    if (c.resort_disable_after && (*c.resort_disable_after < 0 || *c.resort_disable_after > c.n_cycles))
        throw ConfigError("resort_disable_after must lie in [0, n_cycles]");
    validate(c.loss);
    validate(c.move_success);
    validate(c.collateral);
    validate(c.kinematics);
    require_probability(c.mot_background, "mot_background");
    require_probability(c.accidental_shelving, "accidental_shelving");
    if (!(c.tweezer_depth_mk >= 0.0)) throw DomainError("tweezer_depth_mk must be non-negative");
    if (c.geometry.loading_cols < 1 || c.geometry.guard_cols < 0 ||
        c.geometry.loading_cols + c.geometry.guard_cols >= c.geometry.n_cols)
        throw ConfigError("geometry: loading and guard columns leave no storage zone");
    try {
        const LatticeGeometry g(c.geometry);
        (void)make_target_pattern(g, c.target, c.collateral.d_min);
        if (c.loss.n_tweezers != static_cast<int>(g.tweezer_sites().count()))
            throw ConfigError("loss.n_tweezers (" + std::to_string(c.loss.n_tweezers) +
                              ") does not match the tweezer sites of the geometry (" +
                              std::to_string(g.tweezer_sites().count()) + ")");
    } catch (const RangeError& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
}

std::uint64_t replica_seed(std::uint64_t base_seed, int replica) {
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(replica) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::optional<double> EmergentParameters::mean_alpha_c(int first, int last) const {
    return mean_of(alpha_c, first, last);
}

std::optional<double> EmergentParameters::mean_alpha_r(int first, int last) const {
    return mean_of(alpha_r, first, last);
}

double EmergentParameters::mean_n_loaded(int first, int last) const {
    if (last < 0) last = static_cast<int>(n_loaded.size()) - 1;
    double sum = 0.0;
    int n = 0;
    for (int i = std::max(first, 0); i <= last && i < static_cast<int>(n_loaded.size()); ++i, ++n) sum += n_loaded[i];
    return n == 0 ? 0.0 : sum / n;
}

void load_reservoir(Rng& rng, const LatticeGeometry& geometry, const SimulationConfig& config, SiteMask& state) {
    const double residue = config.mot_background * config.loss.heating_extinction;
    const double keep_untrapped = residue + (1.0 - residue) * config.accidental_shelving;
    for (SiteIndex s : geometry.loading_zone().indices()) {
        if (geometry.tweezer_sites().test(s)) {
            if (!state.test(s) && rng.bernoulli(config.loss.load_fraction)) state.set(s);
        } else {
            state.assign(s, rng.bernoulli(keep_untrapped));
        }
    }
}

std::size_t apply_survival(Rng& rng, const SiteMask& zone, double survival, SiteMask& state) {
    std::size_t lost = 0;
    for (SiteIndex s : (state & zone).indices()) {
        if (!rng.bernoulli(survival)) {
            state.reset(s);
            ++lost;
        }
    }
    return lost;
}

std::size_t apply_shelving_stage(Rng& rng, const LatticeGeometry& geometry, const LossParameters& params,
                                 SiteMask& state) {
    return apply_survival(rng, geometry.storage_zone(), shelving_stage_survival(params), state);
}

ExecutionTally execute_plan(Rng& rng, const LatticeGeometry& geometry, const MovePlan& plan,
                            const MoveSuccessModel& success, const CollateralModel& collateral, SiteMask& state,
                            SourcePolicy policy) {
    ExecutionTally tally;
    tally.inserted = SiteMask(geometry.site_count());
    if (plan.moves.empty()) return tally;

    StoredAtoms atoms(geometry, state);
    // Moves executed while each stored atom was present, for the disturbance.
    std::vector<std::size_t> since(atoms.sites.size(), 0);
    std::vector<double> best, scratch;
    const double inside2 = collateral.d_min * collateral.d_min;
    const std::size_t n_moves = plan.moves.size();

    for (std::size_t m = 0; m < n_moves; ++m) {
        const Move& move = plan.moves[m];
        const bool loaded = state.test(move.source);
        if (!loaded) {
            if (policy == SourcePolicy::strict)
                throw StateError("execute_plan: move " + std::to_string(m) + " starts from empty site " +
                                 std::to_string(move.source));
            ++tally.phantom;
        } else {
            ++tally.attempted;
            state.reset(move.source);
        }

        // Stored atoms passed inside d_min.
        path_dist2(move, geometry, atoms, best, scratch);
        for (std::size_t i = atoms.sites.size(); i-- > 0;) {
            const SiteIndex s = atoms.sites[i];
            if (s == move.source || s == move.destination) continue;
            if (best[i] < inside2 && rng.bernoulli(collateral.loss_probability_inside)) {
                state.reset(s);
                ++tally.collateral_losses;
                atoms.remove_at(i);
                since.erase(since.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }

        if (loaded && geometry.in_storage_zone(move.source)) {
            const auto it = std::find(atoms.sites.begin(), atoms.sites.end(), move.source);
            if (it != atoms.sites.end()) {
                const std::size_t at = static_cast<std::size_t>(it - atoms.sites.begin());
                atoms.remove_at(at);
                since.erase(since.begin() + static_cast<std::ptrdiff_t>(at));
            }
        }
        if (!loaded) continue;

        if (!rng.bernoulli(move_success_probability(move, success))) {
            ++tally.move_losses;
            continue;
        }
        if (state.test(move.destination)) {
            // Two atoms in one site: both are lost.
            state.reset(move.destination);
            ++tally.pair_losses;
            const auto it = std::find(atoms.sites.begin(), atoms.sites.end(), move.destination);
            if (it != atoms.sites.end()) {
                const std::size_t at = static_cast<std::size_t>(it - atoms.sites.begin());
                atoms.remove_at(at);
                since.erase(since.begin() + static_cast<std::ptrdiff_t>(at));
            }
            continue;
        }
        state.set(move.destination);
        tally.inserted.set(move.destination);
        ++tally.succeeded;
        if (geometry.in_storage_zone(move.destination)) {
            atoms.add(geometry, move.destination);
            since.push_back(m + 1);
        }
    }

    if (collateral.disturbance_per_move > 0.0) {
        const double keep = 1.0 - collateral.disturbance_per_move;
        for (std::size_t i = 0; i < atoms.sites.size(); ++i) {
            const double exposure = static_cast<double>(n_moves - since[i]);
            if (exposure > 0.0 && !rng.bernoulli(std::pow(keep, exposure))) {
                state.reset(atoms.sites[i]);
                ++tally.disturbance_losses;
            }
        }
        tally.inserted &= state;
    }
    return tally;
}

OccupancyMatrix capture_image(Rng& rng, const LossParameters& params, int image_tag, SiteMask& state,
                              const SiteMask* tally_zone, std::size_t* imaging_losses) {
    OccupancyMatrix image{SiteMask(state.size()), image_tag};
    const double p_err = params.detection_infidelity;
    const double p_loss = params.imaging_loss;
    std::size_t lost = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const auto s = static_cast<SiteIndex>(i);
        const double u = rng.uniform();
        if (state.test(s)) {
            if (u >= p_err) image.occupied.set(s);
            if (rng.bernoulli(p_loss)) {
                state.reset(s);
                if (tally_zone && tally_zone->test(s)) ++lost;
            }
        } else if (u < p_err) {
            image.occupied.set(s);
        }
    }
    if (imaging_losses) *imaging_losses += lost;
    return image;
}

Simulator::Simulator(const SimulationConfig& config)
    : config_((validate(config), config)),
      geometry_(config.geometry),
      target_(make_target_pattern(geometry_, config.target, config.collateral.d_min)) {}

RunTrace Simulator::run(std::uint64_t seed, int replica) const {
    const SimulationConfig& c = config_;
    const LatticeGeometry& g = geometry_;
    Rng rng(seed);
    RunTrace trace;
    trace.config = c;
    trace.seed = seed;
    trace.replica = replica;
    trace.records.reserve(static_cast<std::size_t>(c.n_cycles));

    const double reservoir_survival =
        std::exp(-ionization_rate(c.tweezer_depth_mk, c.ionization) * c.loss.hold_time);
    const PlannerOptions planner{c.assignment, c.collateral.d_min};
    const SiteMask& storage = g.storage_zone();

    SiteMask state(g.site_count());
    for (int cycle = 0; cycle < c.n_cycles; ++cycle) {
        CycleRecord rec;
        rec.cycle_index = cycle;
        rec.stored_before = count_and(state, storage);

        // Shelved storage atoms through the MOT stage and the cycle's vacuum loss.
        const std::size_t shelving_lost = apply_shelving_stage(rng, g, c.loss, state);
        const std::size_t vacuum_lost = apply_survival(
            rng, storage, vacuum_survival(c.loss.cycle_time, c.loss.vacuum_lifetime), state);
        rec.n_shelving_losses = shelving_lost;
        rec.n_vacuum_losses = vacuum_lost;
        // Atoms left in the reservoir are photoionized while the MOT runs.
        apply_survival(rng, g.loading_zone() & g.tweezer_sites(), reservoir_survival, state);
        load_reservoir(rng, g, c, state);
        rec.n_loaded = count_and(state, g.tweezer_sites());

        rec.image1 = capture_image(rng, c.loss, 1, state, &storage, &rec.n_imaging_losses);

        rec.resorted = !c.resort_disable_after || cycle < *c.resort_disable_after;
        ExecutionTally tally;
        tally.inserted = SiteMask(g.site_count());
        if (rec.resorted) {
            // Detections off the target sites are ignored, as in the analysis.
            const SiteMask observed_storage = rec.image1.occupied & target_.mask();
            const MovePlan plan = plan_cycle(g, rec.image1.occupied, observed_storage, target_, planner);
            rec.n_moves_planned = plan.moves.size();
            rec.destinations.reserve(plan.moves.size());
            for (const Move& m : plan.moves) rec.destinations.push_back(m.destination);
            tally = execute_plan(rng, g, plan, c.move_success, c.collateral, state, SourcePolicy::lenient);
        }
        rec.n_moves_attempted = tally.attempted;
        rec.n_moves_succeeded = tally.succeeded;
        rec.n_phantom_moves = tally.phantom;
        rec.n_move_losses = tally.move_losses;
        rec.n_pair_losses = tally.pair_losses;
        rec.n_collateral_losses = tally.collateral_losses;
        rec.n_disturbance_losses = tally.disturbance_losses;

        rec.image2 = capture_image(rng, c.loss, 2, state, &storage, &rec.n_imaging_losses);
        rec.stored_true_after = count_and(state, storage);
        rec.new_survivors = count_and(tally.inserted, state);
        rec.stored_count_after = count_and(rec.image2.occupied, target_.mask());

        trace.records.push_back(std::move(rec));
    }
    trace.wall_parameters = emergent_parameters(trace.records);
    return trace;
}

EmergentParameters emergent_parameters(const std::vector<CycleRecord>& records) {
    EmergentParameters p;
    for (const CycleRecord& rec : records) {
        const double old_survivors = static_cast<double>(rec.stored_true_after - rec.new_survivors);
        p.alpha_c.push_back(rec.stored_before > 0
                                ? std::optional<double>(1.0 - old_survivors / static_cast<double>(rec.stored_before))
                                : std::nullopt);
        p.alpha_r.push_back(rec.n_loaded > 0 && rec.resorted
                                ? std::optional<double>(1.0 - static_cast<double>(rec.new_survivors) /
                                                                  static_cast<double>(rec.n_loaded))
                                : std::nullopt);
        p.n_loaded.push_back(static_cast<double>(rec.n_loaded));
    }
    return p;
}

RunTrace run(const SimulationConfig& config) { return Simulator(config).run(config.rng_seed, 0); }

Ensemble run_replicas(const SimulationConfig& config, unsigned threads) {
    const Simulator sim(config);
    const auto n = static_cast<std::size_t>(config.n_replicas);
    Ensemble ensemble;
    ensemble.traces.resize(n);
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

    auto work = [&](std::size_t first) {
        for (std::size_t r = first; r < n; r += threads)
            ensemble.traces[r] = sim.run(replica_seed(config.rng_seed, static_cast<int>(r)), static_cast<int>(r));
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& t : pool) t.join();
    }

    const auto n_cycles = static_cast<std::size_t>(config.n_cycles);
    ensemble.mean.assign(n_cycles, 0.0);
    ensemble.stddev.assign(n_cycles, 0.0);
    for (std::size_t i = 0; i < n_cycles; ++i) {
        double sum = 0.0;
        for (const RunTrace& t : ensemble.traces) sum += static_cast<double>(t.records[i].stored_count_after);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const RunTrace& t : ensemble.traces) {
            const double d = static_cast<double>(t.records[i].stored_count_after) - mean;
            ss += d * d;
        }
        ensemble.mean[i] = mean;
        ensemble.stddev[i] = std::sqrt(ss / static_cast<double>(n));
    }
    return ensemble;
}

}  // namespace atomcycle
