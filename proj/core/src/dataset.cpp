#include "stgcn/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "stgcn/graph.hpp"
#include "stgcn/rng.hpp"
#include "stgcn/synth.hpp"

namespace stgcn {

namespace {

std::vector<std::string> default_class_names(std::size_t n) {
    static const char* kSynthNames[] = {"oscillate", "raise", "circle", "still"};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(i < 4 ? kSynthNames[i] : "class" + std::to_string(i));
    }
    return names;
}

}  // namespace

Dataset make_synth_dataset(const std::string& template_name, std::size_t num_classes,
                           std::size_t train_count, std::size_t test_count, std::size_t frames,
                           std::uint64_t seed) {
    if (num_classes < 2 || num_classes > kSynthClassCount) {
        throw std::invalid_argument("make_synth_dataset: num_classes must be in [2, " +
                                    std::to_string(kSynthClassCount) + "]");
    }
    const SkeletonTemplate& tmpl = find_template(template_name);
    Dataset ds;
    ds.num_classes = num_classes;
    ds.class_names = default_class_names(num_classes);
    for (std::size_t i = 0; i < train_count; ++i) {
        ds.train.push_back(synth_generate(i % num_classes, tmpl, frames,
                                          derive_seed(seed, 2 * i)));
    }
    for (std::size_t i = 0; i < test_count; ++i) {
        ds.test.push_back(synth_generate(i % num_classes, tmpl, frames,
                                         derive_seed(seed, 2 * (train_count + i) + 1)));
    }
    return ds;
}

std::vector<SkeletonSequence> load_skl_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("'" + dir + "' is not a directory");
    }
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".skl") {
            paths.push_back(entry.path().string());
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<SkeletonSequence> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_skl_file(p));
    return out;
}

Dataset load_skl_dataset(const std::string& dir, std::size_t num_classes, std::size_t frames) {
    Dataset ds;
    ds.num_classes = num_classes;
    ds.class_names = default_class_names(num_classes);
    for (auto& seq : load_skl_dir(dir + "/train")) ds.train.push_back(pad_crop(seq, frames));
    for (auto& seq : load_skl_dir(dir + "/test")) ds.test.push_back(pad_crop(seq, frames));
    for (const auto& split : {&ds.train, &ds.test}) {
        for (const auto& seq : *split) {
            if (seq.label >= num_classes) {
                throw std::runtime_error("sample label " + std::to_string(seq.label) +
                                         " exceeds num_classes " + std::to_string(num_classes));
            }
        }
    }
    return ds;
}

SkeletonSequence pad_crop(const SkeletonSequence& sequence, std::size_t frames) {
    if (frames == 0) throw std::invalid_argument("pad_crop: frames must be positive");
    const std::size_t c_n = sequence.joints.extent(0), j_n = sequence.joints.extent(1),
                      t_in = sequence.joints.extent(2);
    if (t_in == frames) return sequence;
    SkeletonSequence out = sequence;
    out.joints = Tensor({c_n, j_n, frames});
    for (std::size_t c = 0; c < c_n; ++c) {
        for (std::size_t j = 0; j < j_n; ++j) {
            for (std::size_t t = 0; t < frames; ++t) {
                std::size_t src = t < t_in ? t : t_in - 1;
                out.joints.at(c, j, t) = sequence.joints.at(c, j, src);
            }
        }
    }
    return out;
}

std::vector<Batch> make_batches(const std::vector<SkeletonSequence>& samples,
                                std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
    if (samples.empty()) {
        throw std::invalid_argument("make_batches: empty dataset");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("make_batches: batch size must be positive");
    }
    const std::size_t j_n = samples.front().joints.extent(1);
    const std::size_t t_n = samples.front().joints.extent(2);
    for (const auto& s : samples) {
        if (s.joints.extent(1) != j_n || s.joints.extent(2) != t_n) {
            throw std::invalid_argument("make_batches: samples must share (J, T), got " +
                                        shape_string(s.joints) + " vs " +
                                        shape_string(samples.front().joints));
        }
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.index(i)]);
        }
    }
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        std::size_t b_n = std::min(batch_size, order.size() - start);
        Batch batch;
        batch.inputs = Tensor({b_n, 3, j_n, t_n});
        for (std::size_t b = 0; b < b_n; ++b) {
            const SkeletonSequence& s = samples[order[start + b]];
            std::copy(s.joints.data(), s.joints.data() + s.joints.size(),
                      batch.inputs.data() + b * s.joints.size());
            batch.labels.push_back(s.label);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace stgcn
