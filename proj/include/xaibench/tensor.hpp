#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace xaibench {

// Dense row-major tensor of doubles. All model math in this library runs in
// 64-bit floats; there is deliberately no float32 path.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::initializer_list<std::size_t> idx);
    double at(std::initializer_list<std::size_t> idx) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Same storage, new shape; element count must match.
    Tensor reshaped(std::vector<std::size_t> shape) const;

    // Row `i` of the leading axis as a rank-(r-1) tensor (copies).
    Tensor row(std::size_t i) const;
    void set_row(std::size_t i, const Tensor& value);

    void fill(double v);
    double min() const;
    double max() const;
    double sum() const;
    double abs_sum() const;
    bool all_finite() const;

private:
    std::size_t flat_index(std::initializer_list<std::size_t> idx) const;

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_volume(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Throws ErrorCode::shape with a message naming `where`, the expected shape
// and the actual one.
void require_shape(const Tensor& t, const std::vector<std::size_t>& expected,
                   const std::string& where);

} // namespace xaibench
