#pragma once

#include <cstdint>

#include "stgcn/graph.hpp"
#include "stgcn/skl.hpp"

namespace stgcn {

/// Deterministic synthetic motion classes for desk-scale training:
///   0 — sinusoidal side-to-side oscillation of the distal limb chain
///   1 — linear raise of the same chain
///   2 — circular in-plane motion of the chain
///   3 — stationary pose
/// Every sample gets a uniform random global offset and phase plus Gaussian
/// jitter of `jitter_sigma` meters on each coordinate.
constexpr std::size_t kSynthClassCount = 4;

SkeletonSequence synth_generate(std::size_t class_id, const SkeletonTemplate& skeleton,
                                std::size_t frames, std::uint64_t seed,
                                double jitter_sigma = 0.01);

}  // namespace stgcn
