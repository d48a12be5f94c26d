#pragma once

#include <cstdint>
#include <random>

namespace stgcn {

/// Deterministic random source. Distribution mapping is hand-rolled on top of
/// std::mt19937_64 so that a given seed produces the same stream on every
/// standard library implementation; reproducibility guarantees (bitwise
/// identical init, byte-identical generated files) depend on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Box-Muller draw; consumes two uniforms per call.
    double normal(double mean, double stddev);

    /// Uniform index in [0, n), rejection-sampled to avoid modulo bias.
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Stream splitting: mixes a base seed with a stream id (splitmix64 finalizer)
/// so independent consumers get decorrelated deterministic seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace stgcn
