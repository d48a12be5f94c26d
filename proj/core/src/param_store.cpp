#include "stgcn/param_store.hpp"

#include <stdexcept>

namespace stgcn {

std::size_t ParameterStore::add(std::string name, Tensor value) {
    if (index_.count(name)) {
        throw std::invalid_argument("parameter '" + name + "' registered twice");
    }
    Tensor grad(value.shape());
    std::size_t i = entries_.size();
    index_.emplace(name, i);
    entries_.push_back(ParamEntry{std::move(name), std::move(value), std::move(grad)});
    return i;
}

std::size_t ParameterStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw std::out_of_range("no parameter named '" + name + "'");
    }
    return it->second;
}

void ParameterStore::zero_gradients() {
    for (auto& e : entries_) e.grad.fill(0.0);
}

std::size_t ParameterStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

}  // namespace stgcn
