#include <bit>
#include <limits>

#include "internal.hpp"

namespace atomcycle::kernels::detail {
namespace {

std::uint64_t popcount(const std::uint64_t* a, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
    return total;
}

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    return total;
}

std::uint64_t popcount_and3(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i] & c[i]));
    return total;
}

std::uint64_t popcount_andnot_and(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c,
                                  std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(~a[i] & b[i] & c[i]));
    return total;
}

// Reference projection formula. The AVX2 variant repeats exactly these
// operations in this order.
inline double point_segment_dist2(const Segment& s, double dx, double dy, double len2, double px, double py) {
    if (len2 == 0.0) {
        const double ex = px - s.x0;
        const double ey = py - s.y0;
        return ex * ex + ey * ey;
    }
    double t = ((px - s.x0) * dx + (py - s.y0) * dy) / len2;
    t = t < 0.0 ? 0.0 : t;
    t = t > 1.0 ? 1.0 : t;
    const double qx = s.x0 + t * dx;
    const double qy = s.y0 + t * dy;
    const double ex = px - qx;
    const double ey = py - qy;
    return ex * ex + ey * ey;
}

void segment_dist2(const Segment& s, const double* xs, const double* ys, std::size_t n, double* out) {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    for (std::size_t i = 0; i < n; ++i) out[i] = point_segment_dist2(s, dx, dy, len2, xs[i], ys[i]);
}

double segment_min_dist2(const Segment& s, const double* xs, const double* ys, std::size_t n) {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = point_segment_dist2(s, dx, dy, len2, xs[i], ys[i]);
        best = d2 < best ? d2 : best;
    }
    return best;
}

Moments centered_moments(const double* x, const double* y, std::size_t n, double mx, double my) {
    Moments m;
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = x[i] - mx;
        const double cy = y[i] - my;
        m.sxx += cx * cx;
        m.sxy += cx * cy;
        m.syy += cy * cy;
    }
    return m;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        Isa::scalar,          "scalar",      &popcount,         &popcount_and,      &popcount_and3,
        &popcount_andnot_and, &segment_dist2, &segment_min_dist2, &centered_moments,
    };
    return table;
}

}  // namespace atomcycle::kernels::detail
