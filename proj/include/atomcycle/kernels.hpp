#pragma once

// Data-parallel inner loops used by the geometry, planner, simulator and
// analysis modules. Every kernel has a scalar reference implementation; SIMD
// variants are selected once at startup from the host CPU features.
//
// Distance kernels are required to be bit-identical to the scalar reference
// (same operation order, no FMA). Reductions over doubles (centered moments)
// may differ in the last bits because lanes are summed in a different order.

#include <cstddef>
#include <cstdint>

namespace atomcycle::kernels {

/// Closed segment from (x0, y0) to (x1, y1).
struct Segment {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

struct Moments {
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
};

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t n_words);
    std::uint64_t (*popcount_and)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n_words);
    std::uint64_t (*popcount_and3)(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c,
                                   std::size_t n_words);
    // popcount(~a & b & c)
    std::uint64_t (*popcount_andnot_and)(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* c,
                                         std::size_t n_words);

    // Squared distance from each point to the segment, written to out[0..n).
    void (*segment_dist2)(const Segment& seg, const double* xs, const double* ys, std::size_t n, double* out);
    // Minimum squared distance from the segment to any point; +inf when n == 0.
    double (*segment_min_dist2)(const Segment& seg, const double* xs, const double* ys, std::size_t n);

    // Sums of (x-mx)^2, (x-mx)(y-my), (y-my)^2.
    Moments (*centered_moments)(const double* x, const double* y, std::size_t n, double mean_x, double mean_y);
};

/// True when the variant was compiled in and the CPU can run it.
bool supported(Isa isa);

/// Table for an explicit variant; throws std::invalid_argument if unsupported.
const KernelTable& table(Isa isa);

/// The variant in use. Chosen on first call: the widest supported ISA, unless
/// the environment variable ATOMCYCLE_KERNELS=scalar forces the reference path.
const KernelTable& active();

}  // namespace atomcycle::kernels
