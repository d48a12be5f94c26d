#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "stgcn/tensor.hpp"

namespace stgcn {

struct ParamEntry {
    std::string name;
    Tensor value;
    Tensor grad;  // always the same shape as value
};

/// Named collection of trainable tensors with matching gradient buffers.
/// Entries keep registration order; that order is the documented layout of
/// checkpoints and gradient reports.
class ParameterStore {
public:
    /// Registers a tensor under a unique name, gradient zero-filled.
    /// Returns the entry index. Throws on duplicate names.
    std::size_t add(std::string name, Tensor value);

    std::size_t count() const { return entries_.size(); }
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    ParamEntry& entry(std::size_t i) { return entries_[i]; }
    const ParamEntry& entry(std::size_t i) const { return entries_[i]; }

    std::size_t index_of(const std::string& name) const;

    Tensor& value(std::size_t i) { return entries_[i].value; }
    const Tensor& value(std::size_t i) const { return entries_[i].value; }
    Tensor& grad(std::size_t i) { return entries_[i].grad; }
    const Tensor& grad(std::size_t i) const { return entries_[i].grad; }

    Tensor& value(const std::string& name) { return entries_[index_of(name)].value; }
    Tensor& grad(const std::string& name) { return entries_[index_of(name)].grad; }

    void zero_gradients();

    /// Sum of element counts over all registered tensors.
    std::size_t total_elements() const;

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::vector<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace stgcn
