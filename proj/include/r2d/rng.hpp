#pragma once

#include <cstdint>
#include <string_view>

#include "r2d/vec.hpp"

namespace r2d {

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ splitmix64(b ^ 0x6a09e667f3bcc909ULL));
}

// Counter-based Gaussian stream: every draw is a pure function of
// (seed, stream name, counter), so parallel runs with distinct names never
// interfere and a run replays identically from its seed.
class GaussianStream {
  public:
    GaussianStream(std::uint64_t seed, std::string_view name)
        : key_(mix64(seed, fnv1a64(name))) {}

    // uniform on (0, 1]
    double uniform() { return to_unit(splitmix64(key_ ^ splitmix64(counter_++))); }

    // standard normal via Box-Muller; two uniforms per draw keeps the stream
    // strictly counter-addressable (the sine twin is discarded)
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    ParamVector normal_vector(std::size_t d, double scale = 1.0) {
        ParamVector v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = scale * normal();
        return v;
    }

    std::uint64_t counter() const { return counter_; }

  private:
    static double to_unit(std::uint64_t x) {
        // 53-bit mantissa, shifted into (0, 1] so log() is always valid
        return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Deterministic initialization: standard normal entries scaled by 1/sqrt(d).
inline ParamVector initial_point(std::size_t dim, std::uint64_t seed) {
    GaussianStream g(seed, "theta0");
    return g.normal_vector(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

}  // namespace r2d
