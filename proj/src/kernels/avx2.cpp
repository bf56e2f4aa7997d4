// AVX2 kernel variants. This translation unit is compiled with -mavx2, so it
// must not instantiate inline library templates (std::min, std::popcount, ...):
// the linker could pick the AVX2 copy for scalar callers. Only intrinsics,
// builtins and internal-linkage helpers are used here.

#include <immintrin.h>

#include "internal.hpp"

namespace atomcycle::kernels::detail {
namespace {

inline __m256i popcount_epi64(__m256i v) {
    const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                                         0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low = _mm256_set1_epi8(0x0f);
    const __m256i lo = _mm256_and_si256(v, low);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
    const __m256i per_byte = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    return _mm256_sad_epu8(per_byte, _mm256_setzero_si256());
}

inline std::uint64_t hsum_epi64(__m256i v) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

inline __m256i load(const std::uint64_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }

std::uint64_t popcount(const std::uint64_t* a, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_epi64(acc, popcount_epi64(load(a + i)));
    std::uint64_t total = hsum_epi64(acc);
    for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i]));
    return total;
}

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_epi64(acc, popcount_epi64(_mm256_and_si256(load(a + i), load(b + i))));
    std::uint64_t total = hsum_epi64(acc);
    for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i]));
    return total;
}

std::uint64_t popcount_and3(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i v = _mm256_and_si256(_mm256_and_si256(load(a + i), load(b + i)), load(c + i));
        acc = _mm256_add_epi64(acc, popcount_epi64(v));
    }
    std::uint64_t total = hsum_epi64(acc);
    for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i] & c[i]));
    return total;
}

std::uint64_t popcount_andnot_and(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c,
                                  std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i v = _mm256_and_si256(_mm256_andnot_si256(load(a + i), load(b + i)), load(c + i));
        acc = _mm256_add_epi64(acc, popcount_epi64(v));
    }
    std::uint64_t total = hsum_epi64(acc);
    for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(~a[i] & b[i] & c[i]));
    return total;
}

// Same operation sequence as the scalar reference: mul, mul, add, div, clamp
// with max(0, t) then min(1, t), which match `t < 0 ? 0 : t` and `t > 1 ? 1 : t`
// including signed zeros.
struct SegmentLanes {
    __m256d x0, y0, dx, dy, len2, zero, one;
};

inline __m256d dist2_lanes(const SegmentLanes& s, __m256d px, __m256d py) {
    const __m256d ax = _mm256_sub_pd(px, s.x0);
    const __m256d ay = _mm256_sub_pd(py, s.y0);
    __m256d t = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(ax, s.dx), _mm256_mul_pd(ay, s.dy)), s.len2);
    t = _mm256_max_pd(s.zero, t);
    t = _mm256_min_pd(s.one, t);
    const __m256d ex = _mm256_sub_pd(px, _mm256_add_pd(s.x0, _mm256_mul_pd(t, s.dx)));
    const __m256d ey = _mm256_sub_pd(py, _mm256_add_pd(s.y0, _mm256_mul_pd(t, s.dy)));
    return _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
}

inline __m256d dist2_lanes_point(const SegmentLanes& s, __m256d px, __m256d py) {
    const __m256d ex = _mm256_sub_pd(px, s.x0);
    const __m256d ey = _mm256_sub_pd(py, s.y0);
    return _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
}

inline double dist2_scalar(const Segment& s, double dx, double dy, double len2, double px, double py) {
    if (len2 == 0.0) {
        const double ex = px - s.x0;
        const double ey = py - s.y0;
        return ex * ex + ey * ey;
    }
    double t = ((px - s.x0) * dx + (py - s.y0) * dy) / len2;
    t = t < 0.0 ? 0.0 : t;
    t = t > 1.0 ? 1.0 : t;
    const double ex = px - (s.x0 + t * dx);
    const double ey = py - (s.y0 + t * dy);
    return ex * ex + ey * ey;
}

inline SegmentLanes broadcast(const Segment& s, double dx, double dy, double len2) {
    return SegmentLanes{_mm256_set1_pd(s.x0), _mm256_set1_pd(s.y0), _mm256_set1_pd(dx),      _mm256_set1_pd(dy),
                        _mm256_set1_pd(len2), _mm256_setzero_pd(),  _mm256_set1_pd(1.0)};
}

void segment_dist2(const Segment& s, const double* xs, const double* ys, std::size_t n, double* out) {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    const SegmentLanes lanes = broadcast(s, dx, dy, len2);
    std::size_t i = 0;
    if (len2 == 0.0) {
        for (; i + 4 <= n; i += 4)
            _mm256_storeu_pd(out + i, dist2_lanes_point(lanes, _mm256_loadu_pd(xs + i), _mm256_loadu_pd(ys + i)));
    } else {
        for (; i + 4 <= n; i += 4)
            _mm256_storeu_pd(out + i, dist2_lanes(lanes, _mm256_loadu_pd(xs + i), _mm256_loadu_pd(ys + i)));
    }
    for (; i < n; ++i) out[i] = dist2_scalar(s, dx, dy, len2, xs[i], ys[i]);
}

double segment_min_dist2(const Segment& s, const double* xs, const double* ys, std::size_t n) {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    const SegmentLanes lanes = broadcast(s, dx, dy, len2);
    __m256d best4 = _mm256_set1_pd(__builtin_inf());
    std::size_t i = 0;
    if (len2 == 0.0) {
        for (; i + 4 <= n; i += 4)
            best4 = _mm256_min_pd(dist2_lanes_point(lanes, _mm256_loadu_pd(xs + i), _mm256_loadu_pd(ys + i)), best4);
    } else {
        for (; i + 4 <= n; i += 4)
            best4 = _mm256_min_pd(dist2_lanes(lanes, _mm256_loadu_pd(xs + i), _mm256_loadu_pd(ys + i)), best4);
    }
    alignas(32) double v[4];
    _mm256_store_pd(v, best4);
    double best = v[0];
    for (int k = 1; k < 4; ++k) best = v[k] < best ? v[k] : best;
    for (; i < n; ++i) {
        const double d2 = dist2_scalar(s, dx, dy, len2, xs[i], ys[i]);
        best = d2 < best ? d2 : best;
    }
    return best;
}

Moments centered_moments(const double* x, const double* y, std::size_t n, double mx, double my) {
    const __m256d vmx = _mm256_set1_pd(mx);
    const __m256d vmy = _mm256_set1_pd(my);
    __m256d axx = _mm256_setzero_pd();
    __m256d axy = _mm256_setzero_pd();
    __m256d ayy = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d cx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
        const __m256d cy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
        axx = _mm256_add_pd(axx, _mm256_mul_pd(cx, cx));
        axy = _mm256_add_pd(axy, _mm256_mul_pd(cx, cy));
        ayy = _mm256_add_pd(ayy, _mm256_mul_pd(cy, cy));
    }
    alignas(32) double lxx[4], lxy[4], lyy[4];
    _mm256_store_pd(lxx, axx);
    _mm256_store_pd(lxy, axy);
    _mm256_store_pd(lyy, ayy);
    Moments m{(lxx[0] + lxx[1]) + (lxx[2] + lxx[3]), (lxy[0] + lxy[1]) + (lxy[2] + lxy[3]),
              (lyy[0] + lyy[1]) + (lyy[2] + lyy[3])};
    for (; i < n; ++i) {
        const double cx = x[i] - mx;
        const double cy = y[i] - my;
        m.sxx += cx * cx;
        m.sxy += cx * cy;
        m.syy += cy * cy;
    }
    return m;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        Isa::avx2,            "avx2",         &popcount,          &popcount_and,     &popcount_and3,
        &popcount_andnot_and, &segment_dist2, &segment_min_dist2, &centered_moments,
    };
    return table;
}

}  // namespace atomcycle::kernels::detail
