#include "atomcycle/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atomcycle/errors.hpp"
#include "atomcycle/kernels.hpp"

namespace atomcycle {
namespace {

constexpr double kMidlineTolerance = 1e-9;

bool on_midline(double coordinate, double spacing) {
    const double u = coordinate / spacing - 0.5;
    return std::abs(u - std::round(u)) < kMidlineTolerance;
}

bool is_half_integer(double v) { return std::abs((v - 0.5) - std::round(v - 0.5)) < kMidlineTolerance; }

}  // namespace

std::vector<Point> Move::polyline(const LatticeGeometry& geometry) const {
    if (strokes.empty()) return {geometry.position(source)};
    std::vector<Point> pts;
    pts.reserve(strokes.size() + 1);
    pts.push_back(strokes.front().from);
    for (const Stroke& s : strokes) pts.push_back(s.to);
    return pts;
}

double Move::length() const {
    double total = 0.0;
    for (const Stroke& s : strokes) total += s.length();
    return total;
}

TransportMode classify_stroke(const LatticeGeometry& geometry, Point from, Point to) {
    if (from.y == to.y && on_midline(from.y, geometry.spacing_y())) return TransportMode::between;
    if (from.x == to.x && on_midline(from.x, geometry.spacing_x())) return TransportMode::between;
    return TransportMode::through;
}

Move route_move(const LatticeGeometry& geometry, SiteIndex source, SiteIndex destination, const RouteOptions& options) {
    if (!geometry.contains(source)) throw RangeError("route_move: source outside the lattice");
    if (!geometry.contains(destination)) throw RangeError("route_move: destination outside the lattice");
    if (source == destination) throw DomainError("route_move: source and destination coincide");
    if (!geometry.in_storage_zone(destination)) throw DomainError("route_move: destination outside the storage zone");
    if (!is_half_integer(options.approach_offset)) throw DomainError("route_move: approach offset must be a half-integer");

    const SitePosition src = geometry.locate(source);
    const SitePosition dst = geometry.locate(destination);

    const double approach_row = dst.row + options.approach_offset;  // in row units
    const int approach_k = static_cast<int>(std::lround(approach_row - 0.5));
    const double y_approach = geometry.corridor_y(approach_k);

    // Extraction corridor on the side of the approach corridor.
    double y_extract;
    if (src.row == 0) {
        y_extract = geometry.corridor_y(0);
    } else if (src.row == geometry.n_rows() - 1) {
        y_extract = geometry.corridor_y(src.row - 1);
    } else {
        y_extract = approach_row >= src.row ? geometry.corridor_y(src.row) : geometry.corridor_y(src.row - 1);
    }

    const double x_exit = geometry.exit_x();
    const Point waypoints[6] = {
        src.point,
        Point{src.point.x, y_extract},
        Point{x_exit, y_extract},
        Point{x_exit, y_approach},
        Point{dst.point.x, y_approach},
        dst.point,
    };

    Move move;
    move.source = source;
    move.destination = destination;
    for (int k = 0; k < 5; ++k) {
        const Point a = waypoints[k];
        const Point b = waypoints[k + 1];
        if (a == b) continue;
        move.strokes.push_back(Stroke{a, b, classify_stroke(geometry, a, b)});
    }
    return move;
}

namespace {

struct StoredPoints {
    std::vector<SiteIndex> sites;
    std::vector<double> xs;
    std::vector<double> ys;

    void add(const LatticeGeometry& g, SiteIndex s) {
        sites.push_back(s);
        xs.push_back(g.xs()[s]);
        ys.push_back(g.ys()[s]);
    }

    void remove(SiteIndex s) {
        const auto it = std::find(sites.begin(), sites.end(), s);
        if (it == sites.end()) return;
        const auto at = it - sites.begin();
        sites.erase(it);
        xs.erase(xs.begin() + at);
        ys.erase(ys.begin() + at);
    }
};

StoredPoints stored_points(const LatticeGeometry& g, const SiteMask& stored) {
    StoredPoints p;
    for (SiteIndex s : stored.indices()) p.add(g, s);
    return p;
}

// Violations of one move against the stored atoms present when it runs.
std::vector<Violation> move_violations(const LatticeGeometry& geometry, const Move& move, const StoredPoints& atoms,
                                       double d_min) {
    const auto& k = kernels::active();
    const std::size_t n = atoms.sites.size();
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<double> scratch(n);
    const std::vector<Point> path = move.polyline(geometry);
    const std::size_t n_segments = path.size() == 1 ? 1 : path.size() - 1;
    for (std::size_t s = 0; s < n_segments; ++s) {
        const Point a = path[s];
        const Point b = path.size() == 1 ? a : path[s + 1];
        k.segment_dist2(kernels::Segment{a.x, a.y, b.x, b.y}, atoms.xs.data(), atoms.ys.data(), n, scratch.data());
        for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], scratch[i]);
    }
    std::vector<Violation> found;
    for (std::size_t i = 0; i < n; ++i) {
        if (atoms.sites[i] == move.source || atoms.sites[i] == move.destination) continue;
        const double d = std::sqrt(best[i]);
        if (d < d_min) found.push_back(Violation{move.order_rank, atoms.sites[i], d});
    }
    std::sort(found.begin(), found.end(), [](const Violation& a, const Violation& b) { return a.site < b.site; });
    return found;
}

// Occupancy update after a move: the source leaves, the destination fills.
void apply_move(const LatticeGeometry& geometry, const Move& move, SiteMask& stored, StoredPoints* atoms) {
    if (stored.test(move.source)) {
        stored.reset(move.source);
        if (atoms) atoms->remove(move.source);
    }
    if (geometry.in_storage_zone(move.destination) && !stored.test(move.destination)) {
        stored.set(move.destination);
        if (atoms) atoms->add(geometry, move.destination);
    }
}

}  // namespace

std::vector<Violation> validate_plan(const LatticeGeometry& geometry, const MovePlan& plan,
                                     const SiteMask& occupancy_at_start) {
    SiteMask stored = occupancy_at_start & geometry.storage_zone();
    StoredPoints atoms = stored_points(geometry, stored);
    std::vector<Violation> violations;
    for (const Move& move : plan.moves) {
        const std::vector<Violation> found = move_violations(geometry, move, atoms, plan.d_min);
        violations.insert(violations.end(), found.begin(), found.end());
        apply_move(geometry, move, stored, &atoms);
    }
    return violations;
}

namespace {

bool corridor_exists(const LatticeGeometry& geometry, int row, double offset) {
    const double k = row + offset - 0.5;
    return k >= 0.0 && k <= geometry.n_rows() - 2;
}

std::size_t count_for_move(const std::vector<Violation>& violations, int rank) {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [rank](const Violation& v) { return v.move_rank == rank; }));
}

}  // namespace

MovePlan plan_cycle(const LatticeGeometry& geometry, const SiteMask& loading_occupancy,
                    const SiteMask& storage_occupancy, const TargetPattern& target, const PlannerOptions& options) {
    MovePlan plan;
    plan.d_min = options.d_min;

    const std::vector<SiteIndex> sources =
        (loading_occupancy & geometry.loading_zone() & geometry.tweezer_sites()).indices();
    SiteMask vacancies = target.mask();
    vacancies.subtract(storage_occupancy);
    const std::vector<SiteIndex> vacant = vacancies.indices();
    std::vector<Pairing> pairs = assign_targets(geometry, sources, vacant, options.assignment);
    if (pairs.empty()) return plan;

    std::sort(pairs.begin(), pairs.end(), [&](const Pairing& a, const Pairing& b) {
        const int ra = geometry.row_of(a.destination);
        const int rb = geometry.row_of(b.destination);
        if (ra != rb) return ra < rb;
        return geometry.col_of(a.destination) > geometry.col_of(b.destination);
    });

    std::vector<double> offsets;
    offsets.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double offset = target.approach_offset(geometry.row_of(pairs[i].destination));
        offsets.push_back(offset);
        Move m = route_move(geometry, pairs[i].source, pairs[i].destination, RouteOptions{offset});
        m.order_rank = static_cast<int>(i);
        plan.moves.push_back(std::move(m));
    }
    plan.violations = validate_plan(geometry, plan, storage_occupancy);
    if (plan.violations.empty()) return plan;

    // Routes do not change the occupancy seen by other moves, so a violating
    // move can be re-routed on the opposite corridor and re-checked alone.
    SiteMask stored = storage_occupancy & geometry.storage_zone();
    bool changed = false;
    for (std::size_t i = 0; i < plan.moves.size(); ++i) {
        if (count_for_move(plan.violations, static_cast<int>(i)) > 0) {
            const int row = geometry.row_of(pairs[i].destination);
            const double flipped = -offsets[i];
            if (corridor_exists(geometry, row, flipped)) {
                Move trial = route_move(geometry, pairs[i].source, pairs[i].destination, RouteOptions{flipped});
                trial.order_rank = static_cast<int>(i);
                const StoredPoints atoms = stored_points(geometry, stored);
                const auto found = move_violations(geometry, trial, atoms, plan.d_min);
                if (found.size() < count_for_move(plan.violations, static_cast<int>(i))) {
                    plan.moves[i] = std::move(trial);
                    offsets[i] = flipped;
                    changed = true;
                }
            }
        }
        apply_move(geometry, plan.moves[i], stored, nullptr);
    }
    if (changed) plan.violations = validate_plan(geometry, plan, storage_occupancy);
    return plan;
}

}  // namespace atomcycle
