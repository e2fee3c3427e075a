#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape disagreements between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Non-finite values or out-of-domain arguments.
struct ValueError : Error {
    using Error::Error;
};

// Invalid configuration values.
struct ConfigError : Error {
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& s) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out << 'x';
        out << s[i];
    }
    out << ']';
    return out.str();
}

inline std::size_t shape_numel(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
}

/**
 * Dense fp64 tensor in row-major order. Rank 1 and 2 cover everything the
 * model needs; the shape is kept general so utilities stay uniform.
 */
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

    Tensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != data_.size())
            throw ShapeError("tensor: shape " + shape_string(shape_) + " does not match " +
                             std::to_string(data_.size()) + " values");
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor row(std::vector<double> values) {
        Shape s{values.size()};
        return Tensor(std::move(s), std::move(values));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
        return Tensor({rows, cols}, std::move(values));
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return shape_.empty() && data_.empty(); }

    std::size_t rows() const {
        require_rank(2, "rows()");
        return shape_[0];
    }
    std::size_t cols() const {
        require_rank(2, "cols()");
        return shape_[1];
    }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    double at(std::size_t r, std::size_t c) const {
        require_rank(2, "at(r,c)");
        return data_[r * shape_[1] + c];
    }
    double& at(std::size_t r, std::size_t c) {
        require_rank(2, "at(r,c)");
        return data_[r * shape_[1] + c];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // In-place accumulation; shapes must match exactly.
    void add_(const Tensor& other) {
        if (!same_shape(other))
            throw ShapeError("tensor add_: " + shape_string(shape_) + " vs " +
                             shape_string(other.shape_));
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    }

    void fill(double v) {
        for (auto& x : data_) x = v;
    }

private:
    void require_rank(std::size_t r, const char* what) const {
        if (shape_.size() != r)
            throw ShapeError(std::string(what) + " requires rank " + std::to_string(r) +
                             ", tensor is " + shape_string(shape_));
    }

    Shape shape_;
    std::vector<double> data_;
};

}  // namespace dx
