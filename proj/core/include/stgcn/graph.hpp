#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stgcn/tensor.hpp"

namespace stgcn {

/// Named skeleton topology: joint count plus undirected spatial edges.
struct SkeletonTemplate {
    std::string name;
    std::size_t joint_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::string> joint_labels;  // may be empty for synthetic chains
};

/// Registry lookup by name ("ntu25", "chain7", "chain3", "clique2").
/// Throws std::out_of_range for unknown names.
const SkeletonTemplate& find_template(std::string_view name);
bool has_template(std::string_view name);
std::vector<std::string> template_names();

/// Symmetric binary adjacency from an undirected edge set; duplicate and
/// swapped pairs collapse to one entry. Self-edges and out-of-range indices
/// are errors.
Tensor build_adjacency(std::size_t joint_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Degree-normalized adjacency with self-loops: entry (i, j) of the result is
/// (A + I)_ij / sqrt(d_i * d_j) with d_i = 1 + sum_j A_ij. Requires A square,
/// symmetric, binary, zero diagonal. Symmetric, spectrum within [-1, 1].
Tensor normalize_adjacency(const Tensor& adjacency);

/// Spatial skeleton graph; immutable after construction, safe to share.
class SkeletonGraph {
public:
    SkeletonGraph(std::size_t joint_count, std::vector<std::pair<std::size_t, std::size_t>> edges);

    static SkeletonGraph from_template(std::string_view name);

    std::size_t joint_count() const { return joint_count_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
    const Tensor& adjacency() const { return adjacency_; }
    const Tensor& normalized_adjacency() const { return normalized_; }
    const std::string& template_name() const { return template_name_; }

private:
    std::size_t joint_count_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    Tensor adjacency_;
    Tensor normalized_;
    std::string template_name_;
};

/// Spatial graph convolution: for each time step, mixes joint features
/// through the normalized adjacency and projects channels through the weight
/// matrix. f_in is (C_in, J, T), weight (C_in, C_out), result (C_out, J, T).
Tensor sgcn_forward(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm);

struct SgcnGrads {
    Tensor grad_input;
    Tensor grad_weight;
};

SgcnGrads sgcn_backward(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm,
                        const Tensor& upstream_grad);

/// Batched forms over (B, C, J, T), used by the network training path.
Tensor sgcn_forward_batched(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm);
void sgcn_backward_batched(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm,
                           const Tensor& upstream_grad, Tensor& grad_input, Tensor& grad_weight);

}  // namespace stgcn
