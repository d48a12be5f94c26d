#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stgcn/skl.hpp"
#include "stgcn/tensor.hpp"

namespace stgcn {

/// Labeled corpus with disjoint train/test splits.
struct Dataset {
    std::vector<SkeletonSequence> train;
    std::vector<SkeletonSequence> test;
    std::vector<std::string> class_names;
    std::size_t num_classes = 0;
};

/// Balanced synthetic dataset; sample i of a split draws class i % num_classes
/// with a seed derived from (seed, split, i), so every sample is independent
/// and the whole dataset is reproducible.
Dataset make_synth_dataset(const std::string& template_name, std::size_t num_classes,
                           std::size_t train_count, std::size_t test_count, std::size_t frames,
                           std::uint64_t seed);

/// Loads every *.skl file under train/ and test/ subdirectories of `dir`
/// (sorted by filename), padding or cropping each sequence to `frames`.
Dataset load_skl_dataset(const std::string& dir, std::size_t num_classes, std::size_t frames);

/// Loads every *.skl file directly under `dir`, sorted by filename, at native
/// length.
std::vector<SkeletonSequence> load_skl_dir(const std::string& dir);

/// Keeps the leading min(T, T_file) frames exactly; padding repeats the final
/// frame rather than inventing motion.
SkeletonSequence pad_crop(const SkeletonSequence& sequence, std::size_t frames);

struct Batch {
    Tensor inputs;  // (B, 3, J, T)
    std::vector<std::size_t> labels;
};

/// Splits the samples into batches of `batch_size` (final partial batch
/// included). With a shuffle seed the order is a seeded permutation;
/// without one the original order is preserved. All samples must share
/// (J, T). Throws on an empty sample list.
std::vector<Batch> make_batches(const std::vector<SkeletonSequence>& samples,
                                std::size_t batch_size, std::optional<std::uint64_t> shuffle_seed);

}  // namespace stgcn
