#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gripsense::util {

// Counter-based pseudo-random helpers. Every stochastic quantity in the
// simulator is a pure function of (seed, counter), so replaying a scenario
// reproduces the exact byte stream regardless of call order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(seed ^ splitmix64(counter));
}

/// Uniform double in (0, 1]; never returns 0 so it is safe to feed into log().
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t bits = mix(seed, counter) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Fully specified, unlike
/// std::normal_distribution, so traces stay identical across toolchains.
inline double gaussian(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// FNV-1a over a byte string; used to fingerprint scenario files in reports.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

/// Normalize an angle in degrees to [0, 360).
inline double wrap_degrees(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

/// Smallest absolute difference between two angles in degrees, in [0, 180].
inline double angle_difference_deg(double a, double b) {
    double d = std::fabs(wrap_degrees(a) - wrap_degrees(b));
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace gripsense::util
