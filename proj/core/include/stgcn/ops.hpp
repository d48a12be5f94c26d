#pragma once

#include <cstddef>

#include "stgcn/tensor.hpp"

namespace stgcn {

enum class Mode { kTrain, kEval };

enum class Padding {
    kCausal,     // output[t] reads inputs at t, t-d, t-2d, ...; zero pad on the left
    kSymmetric,  // kernel centered at t, equal zero pad both sides; odd window required
};

/// Temporal convolution over one channel-time map.
///
/// input   (C_in, T), kernels (C_out, T_w, C_in). Output is (C_out, T): the
/// time extent is always preserved, zero padding supplies missing samples.
/// Kernel taps run oldest-to-newest in causal mode (tap T_w-1 reads the
/// current sample) and left-to-right across the centered window in symmetric
/// mode. Optional bias has extent C_out.
Tensor conv_temporal(const Tensor& input, const Tensor& kernels, std::size_t dilation,
                     Padding padding, const Tensor* bias = nullptr);

struct ConvGrads {
    Tensor grad_input;
    Tensor grad_kernels;
    Tensor grad_bias;  // undefined tensor when the forward had no bias
};

/// Reverse-mode companion of conv_temporal: gradients of
/// sum(output * upstream_grad) with respect to input, kernels and bias.
ConvGrads conv_temporal_backward(const Tensor& input, const Tensor& kernels,
                                 std::size_t dilation, Padding padding,
                                 const Tensor& upstream_grad, const Tensor* bias = nullptr);

Tensor relu(const Tensor& input);

/// grad wrt relu input; preactivation supplies the mask (strictly positive passes).
Tensor relu_backward(const Tensor& preactivation, const Tensor& upstream_grad);

/// Exponential-moving-average statistics consumed by eval-mode batch norm.
struct RunningStats {
    Tensor mean;
    Tensor var;
    double momentum = 0.1;
};

RunningStats make_running_stats(std::size_t channels, double momentum = 0.1);

/// Per-channel train-mode statistics captured at forward time, needed by the
/// train-mode backward pass.
struct BnVars {
    Tensor mean;
    Tensor inv_std;
};

/// Batch normalization over a (C, J, T) map: channel statistics are taken
/// over the joint and time axes. Train mode normalizes with batch statistics
/// and folds them into `running` (EMA, biased variance); eval mode reads
/// `running` and is deterministic.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, double eps,
                  Mode mode, RunningStats& running);

/// Batched form over (B, C, J, T); statistics reduce over (B, J, T).
/// `vars`, when non-null, receives the batch statistics for the backward pass.
Tensor batch_norm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                          double eps, Mode mode, RunningStats& running, BnVars* vars);

/// grad wrt batch-norm input; accumulates (+=) into grad_gamma / grad_beta.
/// `vars` must come from the matching train-mode forward; eval mode uses
/// `running` instead.
Tensor batch_norm_backward(const Tensor& input, const Tensor& gamma, double eps, Mode mode,
                           const RunningStats& running, const BnVars& vars,
                           const Tensor& upstream_grad, Tensor& grad_gamma, Tensor& grad_beta);

struct SoftmaxResult {
    double loss = 0.0;
    Tensor probabilities;
};

/// Numerically stabilized softmax + negative log likelihood of `label`.
SoftmaxResult softmax_cross_entropy(const Tensor& logits, std::size_t label);

/// grad of the loss wrt logits, scaled by `upstream` (1.0 for a plain loss).
Tensor softmax_cross_entropy_backward(const SoftmaxResult& result, std::size_t label,
                                      double upstream = 1.0);

namespace detail {

// Strided single-line convolution kernels shared by the spec-level op and the
// batched encoder/temporal-block paths. x and y address channel c at
// x[c * x_cstride + t]; kernels are (c_out, t_w, c_in) contiguous.
struct ConvSpec {
    std::size_t c_in, c_out, t, t_w, dilation;
    Padding padding;
};

void conv_line_forward(const double* x, std::size_t x_cstride, const double* kernel,
                       const double* bias, double* y, std::size_t y_cstride, const ConvSpec& s);

// Accumulates into gx.
void conv_line_backward_input(const double* kernel, const double* gy, std::size_t gy_cstride,
                              double* gx, std::size_t gx_cstride, const ConvSpec& s);

// Accumulates into gk (and gbias when non-null).
void conv_line_backward_kernel(const double* x, std::size_t x_cstride, const double* gy,
                               std::size_t gy_cstride, double* gk, double* gbias,
                               const ConvSpec& s);

}  // namespace detail

}  // namespace stgcn
