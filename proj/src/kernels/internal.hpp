#pragma once

#include "atomcycle/kernels.hpp"

namespace atomcycle::kernels::detail {

const KernelTable& scalar_table();
#if defined(ATOMCYCLE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace atomcycle::kernels::detail
