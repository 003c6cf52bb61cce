#include "xaibench/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "xaibench/error.hpp"

namespace xaibench {

std::size_t shape_volume(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    s += ")";
    return s;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_volume(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_volume(shape_)) {
        fail(ErrorCode::shape, "tensor init: " + std::to_string(data_.size()) +
                                   " values for shape " + shape_string(shape_));
    }
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
        fail(ErrorCode::shape, "tensor index rank " + std::to_string(idx.size()) +
                                   " vs shape " + shape_string(shape_));
    }
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
        if (i >= shape_[axis]) {
            fail(ErrorCode::shape, "tensor index " + std::to_string(i) + " out of bounds on axis " +
                                       std::to_string(axis) + " of " + shape_string(shape_));
        }
        flat = flat * shape_[axis] + i;
        ++axis;
    }
    return flat;
}

double& Tensor::at(std::initializer_list<std::size_t> idx) { return data_[flat_index(idx)]; }

double Tensor::at(std::initializer_list<std::size_t> idx) const { return data_[flat_index(idx)]; }

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (shape_volume(shape) != data_.size()) {
        fail(ErrorCode::shape, "reshape " + shape_string(shape_) + " -> " + shape_string(shape) +
                                   " changes element count");
    }
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

Tensor Tensor::row(std::size_t i) const {
    if (shape_.empty() || i >= shape_[0]) {
        fail(ErrorCode::shape,
             "row " + std::to_string(i) + " out of bounds for " + shape_string(shape_));
    }
    std::vector<std::size_t> sub(shape_.begin() + 1, shape_.end());
    std::size_t stride = shape_volume(sub);
    Tensor out(sub);
    std::memcpy(out.data(), data_.data() + i * stride, stride * sizeof(double));
    return out;
}

void Tensor::set_row(std::size_t i, const Tensor& value) {
    if (shape_.empty() || i >= shape_[0]) {
        fail(ErrorCode::shape,
             "row " + std::to_string(i) + " out of bounds for " + shape_string(shape_));
    }
    std::vector<std::size_t> sub(shape_.begin() + 1, shape_.end());
    std::size_t stride = shape_volume(sub);
    if (value.size() != stride) {
        fail(ErrorCode::shape, "set_row: " + shape_string(value.shape()) + " into row of " +
                                   shape_string(shape_));
    }
    std::memcpy(data_.data() + i * stride, value.data(), stride * sizeof(double));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::min() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::min(m, v);
    return m;
}

double Tensor::max() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::max(m, v);
    return m;
}

double Tensor::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

double Tensor::abs_sum() const {
    double s = 0.0;
    for (double v : data_) s += std::fabs(v);
    return s;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& expected,
                   const std::string& where) {
    if (t.shape() != expected) {
        fail(ErrorCode::shape,
             where + ": expected " + shape_string(expected) + ", got " + shape_string(t.shape()));
    }
}

} // namespace xaibench
