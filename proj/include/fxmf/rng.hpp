#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fxmf {

/// Seedable 64-bit source with portable derived distributions. The standard
/// library's distribution objects are implementation defined, so uniform and
/// normal deviates are built here from raw mt19937_64 output.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform on (0, 1); never returns 0.
    double uniform_open();
    /// Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal by the Box-Muller transform.
    double normal();
    double exponential(double rate);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for an independent sub-stream derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace fxmf
