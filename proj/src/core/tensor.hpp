#pragma once

#include <string>
#include <vector>

#include "core/errors.hpp"

namespace sca {

// Dense row-major matrix of 64-bit floats. Vectors are 1xN, scalars 1x1.
class Tensor {
  public:
    Tensor() = default;
    Tensor(int rows, int cols) : rows_(rows), cols_(cols), data_(checked_len(rows, cols), 0.0) {}
    Tensor(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows <= 0 || cols <= 0 || data_.size() != size_t(rows) * cols)
            throw ShapeError("tensor data length does not match " + shape_str());
    }

    static Tensor scalar(double v) { return Tensor(1, 1, {v}); }
    static Tensor full(int rows, int cols, double v) {
        Tensor t(rows, cols);
        for (double& x : t.data_) x = v;
        return t;
    }
    static Tensor row(std::vector<double> v) {
        int n = int(v.size());
        return Tensor(1, n, std::move(v));
    }
    static Tensor col(std::vector<double> v) {
        int n = int(v.size());
        return Tensor(n, 1, std::move(v));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(int r, int c) { return data_[size_t(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[size_t(r) * cols_ + c]; }
    double& at(size_t i) { return data_[i]; }
    double at(size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double item() const {
        if (size() != 1) throw ContractError("item() on non-scalar tensor " + shape_str());
        return data_[0];
    }

    bool all_finite() const;
    std::string shape_str() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    bool operator==(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    static size_t checked_len(int rows, int cols) {
        if (rows <= 0 || cols <= 0)
            throw ShapeError("tensor dims must be positive, got " + std::to_string(rows) + "x" +
                             std::to_string(cols));
        return size_t(rows) * cols;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// in-place axpy-style helpers used by the tape and the optimizer
void add_scaled(Tensor& dst, const Tensor& src, double s);

// C = A*B (optionally transposed operands); accumulate adds into C.
void matmul_into(Tensor& C, const Tensor& A, const Tensor& B, bool trans_a = false, bool trans_b = false,
                 bool accumulate = false);

} // namespace sca
