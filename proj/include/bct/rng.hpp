#pragma once

#include <cstdint>
#include <random>

namespace bct {

/// splitmix64 finalizer; used to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for batch `batch` of stream `stream` under master seed `master`:
///   h(s, r, b) = splitmix64(splitmix64(splitmix64(s) ^ r) + b)
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                       std::uint64_t batch) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) + batch);
}

/// Uniform source for the protocol. Draws are bit-identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace bct
