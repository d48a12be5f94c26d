#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stgcn {

/// Dense row-major tensor of doubles with an explicit shape.
///
/// This is the universal value type of the toolkit: inputs, activations,
/// parameters, gradients and adjacency matrices are all Tensors. Shapes are
/// ordered lists of positive extents; data length always equals the product
/// of the extents. Operations return new tensors, in-place mutation is
/// reserved for gradient accumulation.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape. Every extent must be positive.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor ones(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const;
    std::size_t size() const { return data_.size(); }
    bool defined() const { return !shape_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Indexed access for the shapes used throughout: (i), (i,j), (i,j,k), (i,j,k,l).
    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    void fill(double value);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Human-readable shape, e.g. "(3, 25, 300)". Used by error messages.
std::string shape_string(const std::vector<std::size_t>& shape);
std::string shape_string(const Tensor& t);

/// Throws std::invalid_argument naming both shapes unless they match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* context);

/// y += alpha * x, elementwise; shapes must match.
void axpy(double alpha, const Tensor& x, Tensor& y);

}  // namespace stgcn
