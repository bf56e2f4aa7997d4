#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "atomcycle/geometry.hpp"
#include "atomcycle/simulator.hpp"

namespace testing {

// Small lattice: 40 x 21 sites, 12 loading columns, 2 guard columns, a 3 x 4
// tweezer block.
inline atomcycle::GeometryParams small_geometry() {
    atomcycle::GeometryParams p;
    p.n_cols = 40;
    p.n_rows = 21;
    p.loading_cols = 12;
    p.guard_cols = 2;
    p.tweezers = atomcycle::TweezerGrid{3, 4, 4, 5, 2, 2};
    return p;
}

inline atomcycle::SimulationConfig small_config() {
    atomcycle::SimulationConfig c;
    c.geometry = small_geometry();
    c.loss.n_tweezers = 12;
    c.n_cycles = 10;
    return c;
}

// Point-to-segment distance by minimising over a fine parameter scan and then
// a closed-form check of the endpoints and the perpendicular foot.
inline double brute_segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
    const double dx = x1 - x0, dy = y1 - y0;
    double best = std::min(std::hypot(px - x0, py - y0), std::hypot(px - x1, py - y1));
    const double len2 = dx * dx + dy * dy;
    if (len2 > 0.0) {
        const long double t = ((static_cast<long double>(px) - x0) * dx + (static_cast<long double>(py) - y0) * dy) / len2;
        if (t > 0.0L && t < 1.0L) {
            const long double fx = x0 + t * dx, fy = y0 + t * dy;
            best = std::min(best, static_cast<double>(std::hypot(px - fx, py - fy)));
        }
    }
    return best;
}

inline double brute_polyline_distance(const std::vector<atomcycle::Point>& path, atomcycle::Point p) {
    if (path.size() == 1) return std::hypot(p.x - path[0].x, p.y - path[0].y);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        best = std::min(best, brute_segment_distance(p.x, p.y, path[i].x, path[i].y, path[i + 1].x, path[i + 1].y));
    return best;
}

}  // namespace testing
