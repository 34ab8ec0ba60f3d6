#include "anygraph/rng.hpp"

#include <cmath>

namespace anygraph {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view tag)
    : gen_(splitmix64(splitmix64(seed) ^ fnv1a64(tag))) {}

std::uint64_t RngStream::next_u64() {
    return gen_();
}

double RngStream::next_real() {
    // 53 high bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    // Reject draws from the tail that would bias the modulus.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

double RngStream::next_normal() {
    const double u1 = 1.0 - next_real();  // (0, 1]
    const double u2 = next_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

double RngStream::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_real();
}

}  // namespace anygraph
