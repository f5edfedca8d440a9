#include "kanids/tensor.hpp"

#include <cmath>
#include <numeric>

#include "kanids/error.hpp"

namespace kanids {

std::string shape_string(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    require(shape_size(shape_) == data_.size(), ErrorKind::ShapeMismatch,
            "shape " + shape_string(shape_) + " does not match " + std::to_string(data_.size()) + " values");
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
    require(index.size() == shape_.size(), ErrorKind::IndexOutOfRange, "index rank differs from tensor rank");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
        require(i < shape_[axis], ErrorKind::IndexOutOfRange, "index out of range on axis " + std::to_string(axis));
        flat = flat * shape_[axis] + i;
        ++axis;
    }
    return flat;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void expect_shape(const Tensor& t, const Shape& expected, const char* what) {
    require(t.shape() == expected, ErrorKind::ShapeMismatch,
            std::string(what) + ": expected " + shape_string(expected) + ", got " + shape_string(t.shape()));
}

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
    require(t.rank() == rank, ErrorKind::ShapeMismatch,
            std::string(what) + ": expected rank " + std::to_string(rank) + ", got " + shape_string(t.shape()));
}

}  // namespace kanids
