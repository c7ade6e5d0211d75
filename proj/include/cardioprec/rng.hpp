#pragma once

#include <cstdint>
#include <string_view>

namespace cardioprec {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based random stream: the i-th output is a pure function of
/// (key, i). Child streams derive their key from the parent key and an id,
/// so a stream's contents never depend on what else was drawn or when.
class Stream {
public:
    constexpr explicit Stream(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    constexpr Stream child(std::uint64_t id) const noexcept {
        return Stream(key_ ^ mix64(id ^ 0x632be59bd9b4e019ULL), Raw{});
    }
    constexpr Stream child(std::string_view tag) const noexcept { return child(fnv1a(tag)); }

    constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + 0xd1b54a32d192ed03ULL * counter_++); }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    struct Raw {};
    constexpr Stream(std::uint64_t key, Raw) noexcept : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace cardioprec
