#pragma once

// Rearrangement planning: pair loaded atoms with target vacancies, route each
// pair with the five-stroke corridor pattern, order and validate the moves
// against the clearance constraint, and turn moves into tweezer trajectories.

#include <span>
#include <vector>

#include "atomcycle/geometry.hpp"
#include "atomcycle/loss_model.hpp"

namespace atomcycle {

/// Axis-aligned transport segment.
struct Stroke {
    Point from;
    Point to;
    TransportMode mode = TransportMode::through;

    double length() const { return distance(from, to); }
    bool horizontal() const { return from.y == to.y; }
    bool vertical() const { return from.x == to.x; }
    friend bool operator==(const Stroke&, const Stroke&) = default;
};

struct Move {
    SiteIndex source = 0;
    SiteIndex destination = 0;
    std::vector<Stroke> strokes;
    int order_rank = 0;

    /// Stroke endpoints as a connected polyline (a single point for an empty move).
    std::vector<Point> polyline(const LatticeGeometry& geometry) const;
    double length() const;
    friend bool operator==(const Move&, const Move&) = default;
};

/// An occupied stored site passed closer than d_min by a move.
struct Violation {
    int move_rank = 0;
    SiteIndex site = 0;
    double distance = 0.0;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct MovePlan {
    std::vector<Move> moves;
    double d_min = 1.0;
    std::vector<Violation> violations;

    bool valid() const { return violations.empty(); }
    friend bool operator==(const MovePlan&, const MovePlan&) = default;
};

struct Pairing {
    SiteIndex source = 0;
    SiteIndex destination = 0;
    friend bool operator==(const Pairing&, const Pairing&) = default;
};

struct AssignmentOptions {
    /// Exact minimum-cost matching while min(|loaded|, |vacant|) is at most
    /// this; greedy nearest-vacancy above.
    std::size_t exact_limit = 512;
};

/// One-to-one pairing of min(|loaded|, |vacant|) pairs minimising the total
/// Euclidean source→destination distance. Inputs are sorted by site index
/// first, so the result does not depend on input order.
std::vector<Pairing> assign_targets(const LatticeGeometry& geometry, std::span<const SiteIndex> loaded,
                                    std::span<const SiteIndex> vacant, const AssignmentOptions& options = {});

double pairing_cost(const LatticeGeometry& geometry, std::span<const Pairing> pairs);

struct RouteOptions {
    /// Signed distance, in units of spacing_y, from the destination row to the
    /// corridor of the fourth stroke. Must be a half-integer.
    double approach_offset = 0.5;
};

/// Five-stroke move: half-step into a corridor, horizontal exit to the zone
/// boundary midline, vertical transit, horizontal approach along the
/// destination corridor, vertical insertion. Zero-length strokes are dropped.
Move route_move(const LatticeGeometry& geometry, SiteIndex source, SiteIndex destination,
                const RouteOptions& options = {});

/// Stroke classification: a stroke on a row or column midline travels between
/// the sites, anything else travels through them.
TransportMode classify_stroke(const LatticeGeometry& geometry, Point from, Point to);

/// Replays the plan on the stored (storage-zone) occupancy, adding each
/// destination after its move, and reports every stored site closer than
/// plan.d_min to a move other than that move's own source and destination.
std::vector<Violation> validate_plan(const LatticeGeometry& geometry, const MovePlan& plan,
                                     const SiteMask& occupancy_at_start);

struct PlannerOptions {
    AssignmentOptions assignment;
    double d_min = 1.0;
};

/// Pairs tweezer-site atoms of the loading occupancy with vacant target sites,
/// routes and orders them (destination rows ascending, farthest column from
/// the loading zone first) and validates. Violating moves are retried on the
/// opposite approach corridor; residual violations stay listed in the plan.
MovePlan plan_cycle(const LatticeGeometry& geometry, const SiteMask& loading_occupancy,
                    const SiteMask& storage_occupancy, const TargetPattern& target, const PlannerOptions& options = {});

enum class VelocityProfile { smooth_trapezoid };

struct KinematicParams {
    double peak_velocity = 54.0;  // μm/ms
    double ramp_duration = 0.4;   // ms, each of the depth ramp-up and ramp-down
    double depth_ratio = 10.0;    // moving tweezer depth / lattice depth
    /// Duration of each sinusoidal acceleration/deceleration ramp of a stroke.
    double accel_duration = 0.5;  // ms
    double sample_interval = 0.01;  // ms
    VelocityProfile profile = VelocityProfile::smooth_trapezoid;
};

void validate(const KinematicParams& k);

struct TrajectorySample {
    double t = 0.0;  // ms
    Point position;
    double depth = 0.0;  // in units of the lattice depth
};

struct TweezerTrajectory {
    std::vector<TrajectorySample> samples;
    double total_duration = 0.0;  // ms
};

/// Motion time of one stroke of the given length.
double stroke_duration(double length, const KinematicParams& kinematics);
/// Distance travelled after time t into a stroke of the given length.
double stroke_progress(double length, double t, const KinematicParams& kinematics);
/// Ramps plus all stroke times.
double move_duration(const Move& move, const KinematicParams& kinematics);

TweezerTrajectory synthesize_trajectory(const LatticeGeometry& geometry, const Move& move,
                                        const KinematicParams& kinematics);

/// Sum of move durations for sequential execution, in ms.
double plan_duration(const MovePlan& plan, const KinematicParams& kinematics);

}  // namespace atomcycle
