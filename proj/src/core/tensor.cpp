#include "core/tensor.hpp"

#include <Eigen/Core>
#include <cmath>

namespace sca {

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void add_scaled(Tensor& dst, const Tensor& src, double s) {
    if (!dst.same_shape(src))
        throw ShapeError("add_scaled: " + dst.shape_str() + " vs " + src.shape_str());
    double* d = dst.data();
    const double* a = src.data();
    for (size_t i = 0; i < dst.size(); ++i) d[i] += s * a[i];
}

using EigenMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void matmul_into(Tensor& C, const Tensor& A, const Tensor& B, bool trans_a, bool trans_b, bool accumulate) {
    int ar = trans_a ? A.cols() : A.rows();
    int ac = trans_a ? A.rows() : A.cols();
    int br = trans_b ? B.cols() : B.rows();
    int bc = trans_b ? B.rows() : B.cols();
    if (ac != br)
        throw ShapeError("matmul: " + A.shape_str() + (trans_a ? "^T" : "") + " vs " + B.shape_str() +
                         (trans_b ? "^T" : ""));
    if (C.rows() != ar || C.cols() != bc)
        throw ShapeError("matmul: output " + C.shape_str() + " does not fit " + std::to_string(ar) + "x" +
                         std::to_string(bc));

    EigenMap a(A.data(), A.rows(), A.cols());
    EigenMap b(B.data(), B.rows(), B.cols());
    EigenMapMut c(C.data(), C.rows(), C.cols());

    if (!trans_a && !trans_b) {
        if (accumulate) c.noalias() += a * b;
        else c.noalias() = a * b;
    } else if (trans_a && !trans_b) {
        if (accumulate) c.noalias() += a.transpose() * b;
        else c.noalias() = a.transpose() * b;
    } else if (!trans_a && trans_b) {
        if (accumulate) c.noalias() += a * b.transpose();
        else c.noalias() = a * b.transpose();
    } else {
        if (accumulate) c.noalias() += a.transpose() * b.transpose();
        else c.noalias() = a.transpose() * b.transpose();
    }
}

} // namespace sca
