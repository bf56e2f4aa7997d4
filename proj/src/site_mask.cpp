#include "atomcycle/site_mask.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "atomcycle/kernels.hpp"

namespace atomcycle {
namespace {

void require_same_size(const SiteMask& a, const SiteMask& b) {
    if (a.size() != b.size()) throw std::invalid_argument("site masks cover different lattices");
}

}  // namespace

void SiteMask::clear() { std::fill(words_.begin(), words_.end(), 0); }

std::size_t SiteMask::count() const { return kernels::active().popcount(words_.data(), words_.size()); }

std::vector<SiteIndex> SiteMask::indices() const {
    std::vector<SiteIndex> out;
    out.reserve(count());
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits != 0) {
            const int bit = std::countr_zero(bits);
            out.push_back(static_cast<SiteIndex>(w * 64 + static_cast<std::size_t>(bit)));
            bits &= bits - 1;
        }
    }
    return out;
}

SiteMask& SiteMask::operator&=(const SiteMask& other) {
    require_same_size(*this, other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
}

SiteMask& SiteMask::operator|=(const SiteMask& other) {
    require_same_size(*this, other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
}

SiteMask& SiteMask::subtract(const SiteMask& other) {
    require_same_size(*this, other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~other.words_[w];
    return *this;
}

std::size_t count_and(const SiteMask& a, const SiteMask& b) {
    require_same_size(a, b);
    return kernels::active().popcount_and(a.words().data(), b.words().data(), a.words().size());
}

std::size_t count_and(const SiteMask& a, const SiteMask& b, const SiteMask& c) {
    require_same_size(a, b);
    require_same_size(a, c);
    return kernels::active().popcount_and3(a.words().data(), b.words().data(), c.words().data(), a.words().size());
}

std::size_t count_andnot_and(const SiteMask& a, const SiteMask& b, const SiteMask& c) {
    require_same_size(a, b);
    require_same_size(a, c);
    // Padding bits of ~a are set, but b and c keep them zero.
    return kernels::active().popcount_andnot_and(a.words().data(), b.words().data(), c.words().data(),
                                                 a.words().size());
}

}  // namespace atomcycle
