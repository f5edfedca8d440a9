#pragma once

#include <string>
#include <vector>

#include "kanids/tensor.hpp"

namespace kanids {

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

/// Named parameters of one layer, each paired with a same-shaped gradient buffer.
/// Insertion order is the serialization order.
class LayerParams {
public:
    Parameter& add(std::string name, Tensor value);

    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<Parameter>& entries() noexcept { return entries_; }
    const std::vector<Parameter>& entries() const noexcept { return entries_; }

    std::size_t count() const;
    void zero_grad();

private:
    std::vector<Parameter> entries_;
};

}  // namespace kanids
