#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace atomcycle {

using SiteIndex = std::uint32_t;

/// Fixed-size set of lattice sites, bit-packed in 64-bit words. Bits past
/// size() in the last word are always zero.
class SiteMask {
public:
    SiteMask() = default;
    explicit SiteMask(std::size_t n_sites) : n_sites_(n_sites), words_((n_sites + 63) / 64, 0) {}

    std::size_t size() const noexcept { return n_sites_; }
    bool empty() const noexcept { return count() == 0; }

    bool test(SiteIndex i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(SiteIndex i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(SiteIndex i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void assign(SiteIndex i, bool value) { value ? set(i) : reset(i); }
    void clear();

    std::size_t count() const;
    std::vector<SiteIndex> indices() const;
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    SiteMask& operator&=(const SiteMask& other);
    SiteMask& operator|=(const SiteMask& other);
    /// Removes every site present in `other`.
    SiteMask& subtract(const SiteMask& other);

    friend SiteMask operator&(SiteMask a, const SiteMask& b) { return a &= b; }
    friend SiteMask operator|(SiteMask a, const SiteMask& b) { return a |= b; }
    friend bool operator==(const SiteMask&, const SiteMask&) = default;

private:
    std::size_t n_sites_ = 0;
    std::vector<std::uint64_t> words_;
};

/// |a ∩ b|
std::size_t count_and(const SiteMask& a, const SiteMask& b);
/// |a ∩ b ∩ c|
std::size_t count_and(const SiteMask& a, const SiteMask& b, const SiteMask& c);
/// |(complement of a) ∩ b ∩ c|
std::size_t count_andnot_and(const SiteMask& a, const SiteMask& b, const SiteMask& c);

}  // namespace atomcycle
