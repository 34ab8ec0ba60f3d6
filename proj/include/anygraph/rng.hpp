#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace anygraph {

/// Reproducible random stream keyed by (seed, tag).
///
/// Every stochastic operation in the engine draws from a stream constructed
/// with a tag naming the call site, e.g. "dataset:cora:svd:3" or
/// "dropout:2:1841". Streams with the same key produce identical sequences
/// on any platform; distributions are implemented here rather than taken
/// from <random> because the standard does not pin their output.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view tag);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double next_real();

    /// Uniform integer in [0, n). Rejection-sampled, unbiased. n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal via Box-Muller. Two u64 draws per value.
    double next_normal();

    /// Uniform double in [lo, hi).
    double next_uniform(double lo, double hi);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

/// FNV-1a 64-bit hash, used to fold stream tags into seeds.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace anygraph
