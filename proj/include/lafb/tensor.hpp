#pragma once

#include "lafb/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lafb {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s)
{
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

/// Dense row-major grid of doubles. Images and features use [batch, channels, height, width].
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(shape_size(shape_), fill)
    {}

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
    {
        if (data_.size() != shape_size(shape_))
            throw DimensionError("tensor: data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor full(Shape shape, double v) { return Tensor(std::move(shape), v); }
    static Tensor scalar(double v) { return Tensor(Shape{1}, v); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t dim(std::size_t axis) const
    {
        if (axis >= shape_.size())
            throw DimensionError("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                                 shape_str(shape_));
        return shape_[axis];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* ptr() noexcept { return data_.data(); }
    const double* ptr() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // rank-4 accessors
    double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w)
    {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const
    {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    double item() const
    {
        if (data_.size() != 1) throw ContractError("tensor: item() on non-scalar " + shape_str(shape_));
        return data_[0];
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Tensor reshaped(Shape s) const
    {
        if (shape_size(s) != data_.size())
            throw DimensionError("tensor: cannot reshape " + shape_str(shape_) + " to " + shape_str(s));
        return Tensor(std::move(s), data_);
    }

    friend bool operator==(const Tensor& a, const Tensor& b)
    {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

inline void require_rank(const Tensor& t, std::size_t rank, const char* op)
{
    if (t.rank() != rank)
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_str(t.shape()));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op)
{
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace lafb
