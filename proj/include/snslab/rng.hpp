#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace snslab {

// SplitMix64 finalizer; a full-avalanche bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based splittable random stream ("splitmix64ctr/v1" in run manifests).
///
/// A stream is a 64-bit key; the n-th raw output is mix64(key + n*gamma), so
/// streams are pure functions of (key, counter). Child streams are derived by
/// hashing the parent key with a label, which makes any (master seed, label
/// path) name the same stream on every run regardless of worker scheduling.
class RngStream {
  public:
    static constexpr const char* kAlgorithm = "splitmix64ctr/v1";

    explicit RngStream(std::uint64_t key) : key_(key) {}

    static RngStream root(std::uint64_t master_seed) {
        return RngStream(mix64(master_seed ^ 0x5851f42d4c957f2dULL));
    }

    RngStream child(std::uint64_t label) const {
        return RngStream(mix64(key_ ^ (kGoldenGamma * (label + 0x632be59bd9b4e019ULL))));
    }
    RngStream child(std::string_view label) const { return child(fnv1a(label)); }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGoldenGamma); }

    /// Uniform on (0, 1]; never 0, safe under log().
    double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller. Always consumes exactly two raw draws,
    /// so the draw position of any variate is independent of past values.
    double normal() {
        const double u = next_unit();
        const double v = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }

    std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace snslab
