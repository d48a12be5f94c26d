#include "stgcn/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace stgcn {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> chain_edges(std::size_t joints) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i + 1 < joints; ++i) e.emplace_back(i, i + 1);
    return e;
}

// Kinect-style 25-joint body topology, 0-based.
SkeletonTemplate make_ntu25() {
    SkeletonTemplate t;
    t.name = "ntu25";
    t.joint_count = 25;
    t.edges = {{0, 1},   {1, 20},  {2, 20},  {3, 2},   {4, 20},  {5, 4},   {6, 5},   {7, 6},
               {8, 20},  {9, 8},   {10, 9},  {11, 10}, {12, 0},  {13, 12}, {14, 13}, {15, 14},
               {16, 0},  {17, 16}, {18, 17}, {19, 18}, {21, 22}, {22, 7},  {23, 24}, {24, 11}};
    t.joint_labels = {"spine_base",     "spine_mid",      "neck",          "head",
                      "shoulder_left",  "elbow_left",     "wrist_left",    "hand_left",
                      "shoulder_right", "elbow_right",    "wrist_right",   "hand_right",
                      "hip_left",       "knee_left",      "ankle_left",    "foot_left",
                      "hip_right",      "knee_right",     "ankle_right",   "foot_right",
                      "spine_shoulder", "hand_tip_left",  "thumb_left",    "hand_tip_right",
                      "thumb_right"};
    return t;
}

SkeletonTemplate make_chain(const char* name, std::size_t joints) {
    SkeletonTemplate t;
    t.name = name;
    t.joint_count = joints;
    t.edges = chain_edges(joints);
    return t;
}

const std::vector<SkeletonTemplate>& registry() {
    static const std::vector<SkeletonTemplate> templates = [] {
        std::vector<SkeletonTemplate> v;
        v.push_back(make_ntu25());
        v.push_back(make_chain("chain3", 3));
        v.push_back(make_chain("chain7", 7));
        SkeletonTemplate clique2;
        clique2.name = "clique2";
        clique2.joint_count = 2;
        clique2.edges = {{0, 1}};
        v.push_back(std::move(clique2));
        return v;
    }();
    return templates;
}

}  // namespace

const SkeletonTemplate& find_template(std::string_view name) {
    for (const auto& t : registry()) {
        if (t.name == name) return t;
    }
    throw std::out_of_range("unknown skeleton template '" + std::string(name) + "'");
}

bool has_template(std::string_view name) {
    for (const auto& t : registry()) {
        if (t.name == name) return true;
    }
    return false;
}

std::vector<std::string> template_names() {
    std::vector<std::string> names;
    for (const auto& t : registry()) names.push_back(t.name);
    return names;
}

Tensor build_adjacency(std::size_t joint_count,
                       const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    if (joint_count == 0) {
        throw std::invalid_argument("build_adjacency: joint count must be positive");
    }
    Tensor a({joint_count, joint_count});
    for (const auto& [i, j] : edges) {
        if (i >= joint_count || j >= joint_count) {
            throw std::invalid_argument("build_adjacency: edge (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ") out of range for " +
                                        std::to_string(joint_count) + " joints");
        }
        if (i == j) {
            throw std::invalid_argument("build_adjacency: self-edge at joint " +
                                        std::to_string(i));
        }
        a.at(i, j) = 1.0;
        a.at(j, i) = 1.0;
    }
    return a;
}

Tensor normalize_adjacency(const Tensor& adjacency) {
    if (adjacency.rank() != 2 || adjacency.extent(0) != adjacency.extent(1)) {
        throw std::invalid_argument("normalize_adjacency: adjacency must be square, got " +
                                    shape_string(adjacency));
    }
    const std::size_t j_n = adjacency.extent(0);
    for (std::size_t i = 0; i < j_n; ++i) {
        for (std::size_t j = 0; j < j_n; ++j) {
            double v = adjacency.at(i, j);
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("normalize_adjacency: adjacency must be binary");
            }
            if (v != adjacency.at(j, i)) {
                throw std::invalid_argument("normalize_adjacency: adjacency must be symmetric");
            }
            if (i == j && v != 0.0) {
                throw std::invalid_argument("normalize_adjacency: diagonal must be zero");
            }
        }
    }
    // Self-loop degrees are at least 1, so the scaling is always defined.
    std::vector<double> degree(j_n);
    for (std::size_t i = 0; i < j_n; ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < j_n; ++j) d += adjacency.at(i, j);
        degree[i] = d;
    }
    Tensor out({j_n, j_n});
    for (std::size_t i = 0; i < j_n; ++i) {
        for (std::size_t j = 0; j < j_n; ++j) {
            double aij = adjacency.at(i, j) + (i == j ? 1.0 : 0.0);
            if (aij != 0.0) {
                out.at(i, j) = aij / std::sqrt(degree[i] * degree[j]);
            }
        }
    }
    return out;
}

SkeletonGraph::SkeletonGraph(std::size_t joint_count,
                             std::vector<std::pair<std::size_t, std::size_t>> edges)
    : joint_count_(joint_count), edges_(std::move(edges)) {
    adjacency_ = build_adjacency(joint_count_, edges_);
    normalized_ = normalize_adjacency(adjacency_);
}

SkeletonGraph SkeletonGraph::from_template(std::string_view name) {
    const SkeletonTemplate& t = find_template(name);
    SkeletonGraph g(t.joint_count, t.edges);
    g.template_name_ = t.name;
    return g;
}

namespace {

void check_sgcn_args(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm,
                     std::size_t joint_axis) {
    if (weight.rank() != 2) {
        throw std::invalid_argument("sgcn: weight must be (C_in, C_out), got " +
                                    shape_string(weight));
    }
    if (a_norm.rank() != 2 || a_norm.extent(0) != a_norm.extent(1)) {
        throw std::invalid_argument("sgcn: adjacency must be square, got " + shape_string(a_norm));
    }
    if (f_in.extent(joint_axis) != a_norm.extent(0)) {
        throw std::invalid_argument("sgcn: joint extent mismatch, features " +
                                    shape_string(f_in) + " vs adjacency " + shape_string(a_norm));
    }
    if (f_in.extent(joint_axis - 1) != weight.extent(0)) {
        throw std::invalid_argument("sgcn: channel extent mismatch, features " +
                                    shape_string(f_in) + " vs weight " + shape_string(weight));
    }
}

// One batch element: mixes joints through a_norm after projecting channels.
// x is (C_in, J, T) at `x`, y is (C_out, J, T) at `y`; scratch holds J * C_out.
void sgcn_slice_forward(const double* x, double* y, const double* w, const double* a,
                        std::size_t c_in, std::size_t c_out, std::size_t j_n, std::size_t t_n,
                        double* scratch) {
    for (std::size_t t = 0; t < t_n; ++t) {
        for (std::size_t j = 0; j < j_n; ++j) {
            for (std::size_t co = 0; co < c_out; ++co) {
                double acc = 0.0;
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    acc += x[(ci * j_n + j) * t_n + t] * w[ci * c_out + co];
                }
                scratch[j * c_out + co] = acc;
            }
        }
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* arow = a + j * j_n;
            for (std::size_t co = 0; co < c_out; ++co) {
                double acc = 0.0;
                for (std::size_t j2 = 0; j2 < j_n; ++j2) {
                    acc += arow[j2] * scratch[j2 * c_out + co];
                }
                y[(co * j_n + j) * t_n + t] = acc;
            }
        }
    }
}

// Gradients for one batch element; accumulates into gx and gw.
void sgcn_slice_backward(const double* x, const double* gy, const double* w, const double* a,
                         std::size_t c_in, std::size_t c_out, std::size_t j_n, std::size_t t_n,
                         double* gx, double* gw, double* scratch) {
    for (std::size_t t = 0; t < t_n; ++t) {
        // dG = A^T dY; the adjacency is symmetric by construction.
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* arow = a + j * j_n;
            for (std::size_t co = 0; co < c_out; ++co) {
                double acc = 0.0;
                for (std::size_t j2 = 0; j2 < j_n; ++j2) {
                    acc += arow[j2] * gy[(co * j_n + j2) * t_n + t];
                }
                scratch[j * c_out + co] = acc;
            }
        }
        for (std::size_t j = 0; j < j_n; ++j) {
            const double* grow = scratch + j * c_out;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                double xv = x[(ci * j_n + j) * t_n + t];
                const double* wrow = w + ci * c_out;
                double acc = 0.0;
                double* gwrow = gw + ci * c_out;
                for (std::size_t co = 0; co < c_out; ++co) {
                    acc += grow[co] * wrow[co];
                    gwrow[co] += xv * grow[co];
                }
                gx[(ci * j_n + j) * t_n + t] += acc;
            }
        }
    }
}

}  // namespace

Tensor sgcn_forward(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm) {
    if (f_in.rank() != 3) {
        throw std::invalid_argument("sgcn_forward: features must be (C_in, J, T), got " +
                                    shape_string(f_in));
    }
    check_sgcn_args(f_in, weight, a_norm, 1);
    const std::size_t c_in = f_in.extent(0), j_n = f_in.extent(1), t_n = f_in.extent(2);
    const std::size_t c_out = weight.extent(1);
    Tensor out({c_out, j_n, t_n});
    std::vector<double> scratch(j_n * c_out);
    sgcn_slice_forward(f_in.data(), out.data(), weight.data(), a_norm.data(), c_in, c_out, j_n,
                       t_n, scratch.data());
    return out;
}

SgcnGrads sgcn_backward(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm,
                        const Tensor& upstream_grad) {
    check_sgcn_args(f_in, weight, a_norm, 1);
    const std::size_t c_in = f_in.extent(0), j_n = f_in.extent(1), t_n = f_in.extent(2);
    const std::size_t c_out = weight.extent(1);
    if (upstream_grad.rank() != 3 || upstream_grad.extent(0) != c_out ||
        upstream_grad.extent(1) != j_n || upstream_grad.extent(2) != t_n) {
        throw std::invalid_argument("sgcn_backward: upstream grad shape " +
                                    shape_string(upstream_grad) + " does not match output");
    }
    SgcnGrads g{Tensor(f_in.shape()), Tensor(weight.shape())};
    std::vector<double> scratch(j_n * c_out);
    sgcn_slice_backward(f_in.data(), upstream_grad.data(), weight.data(), a_norm.data(), c_in,
                        c_out, j_n, t_n, g.grad_input.data(), g.grad_weight.data(),
                        scratch.data());
    return g;
}

Tensor sgcn_forward_batched(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm) {
    if (f_in.rank() != 4) {
        throw std::invalid_argument("sgcn_forward_batched: features must be (B, C_in, J, T)");
    }
    check_sgcn_args(f_in, weight, a_norm, 2);
    const std::size_t b_n = f_in.extent(0), c_in = f_in.extent(1), j_n = f_in.extent(2),
                      t_n = f_in.extent(3);
    const std::size_t c_out = weight.extent(1);
    Tensor out({b_n, c_out, j_n, t_n});
    std::vector<double> scratch(j_n * c_out);
    for (std::size_t b = 0; b < b_n; ++b) {
        sgcn_slice_forward(f_in.data() + b * c_in * j_n * t_n, out.data() + b * c_out * j_n * t_n,
                           weight.data(), a_norm.data(), c_in, c_out, j_n, t_n, scratch.data());
    }
    return out;
}

void sgcn_backward_batched(const Tensor& f_in, const Tensor& weight, const Tensor& a_norm,
                           const Tensor& upstream_grad, Tensor& grad_input, Tensor& grad_weight) {
    const std::size_t b_n = f_in.extent(0), c_in = f_in.extent(1), j_n = f_in.extent(2),
                      t_n = f_in.extent(3);
    const std::size_t c_out = weight.extent(1);
    std::vector<double> scratch(j_n * c_out);
    for (std::size_t b = 0; b < b_n; ++b) {
        sgcn_slice_backward(f_in.data() + b * c_in * j_n * t_n, upstream_grad.data() + b * c_out * j_n * t_n,
                            weight.data(), a_norm.data(), c_in, c_out, j_n, t_n,
                            grad_input.data() + b * c_in * j_n * t_n, grad_weight.data(),
                            scratch.data());
    }
}

}  // namespace stgcn
