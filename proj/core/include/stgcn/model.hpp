#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stgcn/dhtcn.hpp"
#include "stgcn/grad_check.hpp"
#include "stgcn/graph.hpp"
#include "stgcn/gvfe.hpp"
#include "stgcn/ops.hpp"
#include "stgcn/param_store.hpp"
#include "stgcn/tensor.hpp"

namespace stgcn {

/// Everything needed to rebuild a network deterministically.
struct ModelConfig {
    std::string template_name = "ntu25";
    std::size_t num_classes = 4;
    std::size_t gvfe_out_channels = 8;
    std::size_t gvfe_temporal_window = 9;
    std::vector<std::size_t> blocks = {64, 128, 128, 256};
    std::size_t dhtcn_layers = 2;
    std::size_t dhtcn_temporal_window = 9;
    bool gvfe_relu = false;  // ablation flag; degrades the encoder by design
    bool gvfe_bn = false;    // ablation flag
    bool bias = false;       // convolution bias (classifier is always biased)
    std::uint64_t seed = 42;
};

std::string model_config_to_text(const ModelConfig& config);
ModelConfig model_config_from_text(const std::string& text);

/// One network block: spatial graph convolution lifting C_prev -> C_k
/// channels, the dilated temporal stack at C_k, and a shortcut from the block
/// input (learned 1x1 projection when the widths differ, identity otherwise).
struct BlockParams {
    std::size_t sgcn_weight = 0;
    bool has_projection = false;
    std::size_t projection = 0;
    DhtcnParams dhtcn;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
};

/// Built network: parameters live in the store (registration order is the
/// documented checkpoint order), batch-norm running statistics live beside
/// their layers as non-trainable buffers.
struct Model {
    ModelConfig config;
    SkeletonGraph graph{1, {}};
    ParameterStore store;
    GvfeParams gvfe;
    std::size_t gvfe_bn_gamma = 0;  // only registered when config.gvfe_bn
    std::size_t gvfe_bn_beta = 0;
    RunningStats gvfe_bn_stats;
    std::vector<BlockParams> blocks;
    std::size_t classifier_weight = 0;
    std::size_t classifier_bias = 0;
};

/// Deterministic construction from the config; same config + seed rebuilds
/// bitwise-identical parameters. Throws on unknown templates, empty block
/// lists or num_classes < 2.
Model build_model(const ModelConfig& config);

/// Captures every intermediate the backward pass reads.
struct BlockTrace {
    Tensor input;
    Tensor sgcn_out;
    DhtcnTrace dhtcn;
    Tensor output;
};

struct ForwardTrace {
    Mode mode = Mode::kTrain;
    Tensor input;
    Tensor gvfe_linear;
    Tensor gvfe_relu_out;  // defined only when gvfe_relu is on
    BnVars gvfe_bn_vars;   // only when gvfe_bn is on
    Tensor gvfe_out;
    std::vector<BlockTrace> blocks;
    Tensor pooled;
    Tensor logits;
};

/// Batched pipeline: encoder, blocks, global average pool over joints and
/// time, affine classifier. Input (B, 3, J, T), logits (B, num_classes).
/// Train mode updates batch-norm running statistics.
Tensor forward_batch(Model& model, const Tensor& input, Mode mode, ForwardTrace* trace);

/// Accumulates parameter gradients (+=) into the store; returns grad wrt the
/// input coordinates. `grad_logits` is (B, num_classes).
Tensor backward_batch(Model& model, const ForwardTrace& trace, const Tensor& grad_logits);

/// Single-sample (3, J, T) -> (num_classes) logits.
Tensor model_forward(Model& model, const Tensor& coords, Mode mode);

/// Argmax with ties broken toward the lowest class index.
std::size_t predict_label(const Tensor& logits);

struct ParamCount {
    std::size_t total = 0;
    std::vector<std::pair<std::string, std::size_t>> breakdown;
};

/// Sums element counts over all registered tensors, grouped by component
/// (gvfe, per-block sgcn / residual / dhtcn, classifier).
ParamCount count_parameters(const Model& model);

/// FNV-1a over the raw bytes of all parameter values, registration order.
std::uint64_t parameter_checksum(const Model& model);

/// Builds the model, registers a random (3, J, frames) input under "input.P"
/// and runs central differences (train mode) over every parameter and the
/// input against the analytic backward pass.
///
/// The objective is the cross-entropy loss plus l2_coeff * sum((theta + 2)^2)
/// over every entry. The quadratic term conditions the check: it pins every
/// true gradient well above the rounding noise of central differences
/// (~ulp(loss)/2h), which otherwise dominates the relative error wherever
/// the cross-entropy gradient happens to vanish. Zero disables it.
///
/// `flip_sign_of`, when non-empty, negates that entry's analytic gradient —
/// a fault-injection hook for exercising failure reporting.
GradCheckReport model_grad_check(const ModelConfig& config, std::size_t frames, std::size_t label,
                                 double step, double l2_coeff = 0.0,
                                 const std::string& flip_sign_of = "");

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat binary container: magic "STGCNCP1", a config echo, then named blobs
/// (parameters in registration order, then batch-norm buffers). Little-endian
/// doubles, written raw, so a save/load round trip is bit-exact.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace stgcn
