#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stgcn/dataset.hpp"
#include "stgcn/model.hpp"
#include "stgcn/param_store.hpp"

namespace stgcn {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double learning_rate = 0.01;
    std::vector<std::size_t> decay_epochs = {30, 40};  // multiply by decay_factor at each
    double decay_factor = 0.1;
    double momentum = 0.0;      // plain SGD by default
    double weight_decay = 0.0;  // off by default
    std::uint64_t seed = 1;
    std::size_t checkpoint_interval = 10;  // epochs; 0 disables periodic checkpoints
    std::string out_dir = "out";
};

/// value <- value - lr * grad for every entry, then gradients reset to zero.
/// Throws (naming the parameter) if any gradient is non-finite.
void sgd_step(ParameterStore& store, double learning_rate);

/// Step-decay schedule on 0-based epochs: the base rate multiplied by
/// decay_factor once per milestone <= epoch. Defaults give 0.01 before epoch
/// 30, 0.001 in [30, 40), 0.0001 after.
double lr_at(const TrainConfig& config, std::size_t epoch);

struct EpochStats {
    std::size_t epoch = 0;  // 1-based in reports
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t parameter_total = 0;

    /// "epoch,train_loss,train_acc,test_acc,seconds" rows.
    std::string to_csv() const;
};

struct TrainOutputs {
    Model model;
    TrainReport report;
    std::string final_checkpoint;
};

/// Raised when the loss goes non-finite; carries the last checkpoint written.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(std::string checkpoint)
        : std::runtime_error(checkpoint.empty()
                                 ? "training diverged (non-finite loss); no checkpoint written"
                                 : "training diverged (non-finite loss); last good checkpoint: " +
                                       checkpoint),
          last_checkpoint(std::move(checkpoint)) {}
    std::string last_checkpoint;
};

/// End-to-end optimization: seeded shuffling, mean-over-batch cross-entropy,
/// step-decayed SGD, per-epoch test evaluation, periodic checkpoints plus a
/// final one under config.out_dir. Single-threaded and deterministic given
/// the seeds.
TrainOutputs train(const ModelConfig& model_config, const TrainConfig& train_config,
                   const Dataset& dataset);

struct EvalResult {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::vector<std::size_t> per_class_total;
    std::vector<std::size_t> per_class_correct;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

/// Counting layer shared by evaluate() and tests that inject predictions.
EvalResult evaluate_predictions(const std::vector<std::size_t>& labels,
                                const std::vector<std::size_t>& predictions,
                                std::size_t num_classes);

/// Eval-mode accuracy over a split. Sequences are evaluated independently at
/// native length; STGCN_KIT_THREADS > 1 fans samples out over that many
/// threads without changing any result.
EvalResult evaluate(Model& model, const std::vector<SkeletonSequence>& split);

/// Thread cap from the environment (default 1, the reference path).
std::size_t configured_threads();

}  // namespace stgcn
