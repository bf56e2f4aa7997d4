#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "internal.hpp"

namespace atomcycle::kernels {

bool supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(ATOMCYCLE_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa)) throw std::invalid_argument("kernel variant not available on this host");
#if defined(ATOMCYCLE_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table();
#endif
    return detail::scalar_table();
}

namespace {

const KernelTable& select() {
    if (const char* forced = std::getenv("ATOMCYCLE_KERNELS")) {
        if (std::string_view(forced) == "scalar") return detail::scalar_table();
    }
    if (supported(Isa::avx2)) return table(Isa::avx2);
    return detail::scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace atomcycle::kernels
