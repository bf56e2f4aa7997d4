// Time parameterisation of moves: depth ramp-up, strokes with sinusoidal
// acceleration ramps and a cruise at peak velocity, full stops at corners,
// depth ramp-down.

#include <cmath>
#include <numbers>

#include "atomcycle/errors.hpp"
#include "atomcycle/planner.hpp"

namespace atomcycle {
namespace {

// Distance covered τ into an acceleration ramp of duration ta towards speed vp.
double ramp_distance(double vp, double ta, double tau) {
    return vp * (tau / 2.0 - ta / (2.0 * std::numbers::pi) * std::sin(std::numbers::pi * tau / ta));
}

}  // namespace

void validate(const KinematicParams& k) {
    if (!(k.peak_velocity > 0.0)) throw DomainError("kinematics.peak_velocity must be positive");
    if (!(k.ramp_duration > 0.0)) throw DomainError("kinematics.ramp_duration must be positive");
    if (!(k.accel_duration > 0.0)) throw DomainError("kinematics.accel_duration must be positive");
    if (!(k.sample_interval > 0.0)) throw DomainError("kinematics.sample_interval must be positive");
    if (!(k.depth_ratio >= 0.0)) throw DomainError("kinematics.depth_ratio must be non-negative");
}

double stroke_duration(double length, const KinematicParams& k) {
    if (length <= 0.0) return 0.0;
    const double ta = k.accel_duration;
    if (length >= k.peak_velocity * ta) return length / k.peak_velocity + ta;
    return 2.0 * ta;
}

double stroke_progress(double length, double t, const KinematicParams& k) {
    if (length <= 0.0) return 0.0;
    const double ta = k.accel_duration;
    const double total = stroke_duration(length, k);
    if (t <= 0.0) return 0.0;
    if (t >= total) return length;
    if (length >= k.peak_velocity * ta) {
        const double vp = k.peak_velocity;
        if (t <= ta) return ramp_distance(vp, ta, t);
        if (t <= total - ta) return vp * ta / 2.0 + vp * (t - ta);
        return length - ramp_distance(vp, ta, total - t);
    }
    // Short stroke: two ramps meeting at a reduced peak speed length/ta.
    const double vp = length / ta;
    if (t <= ta) return ramp_distance(vp, ta, t);
    return length - ramp_distance(vp, ta, total - t);
}

double move_duration(const Move& move, const KinematicParams& k) {
    double total = 2.0 * k.ramp_duration;
    for (const Stroke& s : move.strokes) total += stroke_duration(s.length(), k);
    return total;
}

TweezerTrajectory synthesize_trajectory(const LatticeGeometry& geometry, const Move& move, const KinematicParams& k) {
    validate(k);
    TweezerTrajectory traj;
    traj.total_duration = move_duration(move, k);
    const Point start = geometry.position(move.source);
    const Point end = move.strokes.empty() ? geometry.position(move.destination) : move.strokes.back().to;
    const double motion_start = k.ramp_duration;
    const double motion_end = traj.total_duration - k.ramp_duration;

    auto state_at = [&](double t) {
        TrajectorySample s;
        s.t = t;
        if (t < motion_start) {
            s.position = start;
            const double phase = std::sin(std::numbers::pi * t / (2.0 * k.ramp_duration));
            s.depth = k.depth_ratio * phase * phase;
            return s;
        }
        if (t >= motion_end) {
            s.position = end;
            const double phase = std::cos(std::numbers::pi * (t - motion_end) / (2.0 * k.ramp_duration));
            s.depth = t >= traj.total_duration ? 0.0 : k.depth_ratio * phase * phase;
            return s;
        }
        s.depth = k.depth_ratio;
        double local = t - motion_start;
        s.position = end;
        for (const Stroke& stroke : move.strokes) {
            const double len = stroke.length();
            const double dur = stroke_duration(len, k);
            if (local <= dur) {
                const double f = len > 0.0 ? stroke_progress(len, local, k) / len : 1.0;
                s.position = Point{stroke.from.x + f * (stroke.to.x - stroke.from.x),
                                   stroke.from.y + f * (stroke.to.y - stroke.from.y)};
                return s;
            }
            local -= dur;
        }
        return s;
    };

    const auto n_steps = static_cast<std::size_t>(std::floor(traj.total_duration / k.sample_interval));
    traj.samples.reserve(n_steps + 2);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * k.sample_interval;
        if (t >= traj.total_duration) break;
        traj.samples.push_back(state_at(t));
    }
    traj.samples.push_back(state_at(traj.total_duration));
    return traj;
}

double plan_duration(const MovePlan& plan, const KinematicParams& k) {
    double total = 0.0;
    for (const Move& m : plan.moves) total += move_duration(m, k);
    return total;
}

}  // namespace atomcycle
