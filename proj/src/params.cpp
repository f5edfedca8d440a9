#include "kanids/params.hpp"

#include "kanids/error.hpp"

namespace kanids {

Parameter& LayerParams::add(std::string name, Tensor value) {
    require(!contains(name), ErrorKind::SchemaMismatch, "duplicate parameter name '" + name + "'");
    Tensor grad(value.shape());
    entries_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
    return entries_.back();
}

Parameter& LayerParams::get(const std::string& name) {
    for (auto& p : entries_)
        if (p.name == name) return p;
    throw Error(ErrorKind::IndexOutOfRange, "no parameter named '" + name + "'");
}

const Parameter& LayerParams::get(const std::string& name) const {
    return const_cast<LayerParams*>(this)->get(name);
}

bool LayerParams::contains(const std::string& name) const {
    for (const auto& p : entries_)
        if (p.name == name) return true;
    return false;
}

std::size_t LayerParams::count() const {
    std::size_t n = 0;
    for (const auto& p : entries_) n += p.value.size();
    return n;
}

void LayerParams::zero_grad() {
    for (auto& p : entries_) p.grad.fill(0.0);
}

}  // namespace kanids
