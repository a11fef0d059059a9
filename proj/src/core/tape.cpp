#include "core/tape.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace sca {

namespace {

bool g_default_check_finite = false;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

} // namespace

void ParamStore::add(const std::string& name, Tensor value, bool trainable) {
    if (has(name)) throw ContractError("ParamStore: duplicate parameter '" + name + "'");
    values_.emplace(name, std::move(value));
    trainable_[name] = trainable;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

bool ParamStore::trainable(const std::string& name) const {
    auto it = trainable_.find(name);
    if (it == trainable_.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

std::vector<std::string> ParamStore::trainable_names() const {
    std::vector<std::string> out;
    for (const auto& [name, value] : values_) {
        if (trainable_.at(name)) out.push_back(name);
    }
    return out;
}

size_t ParamStore::trainable_entry_count() const {
    size_t n = 0;
    for (const auto& [name, value] : values_) {
        if (trainable_.at(name)) n += value.size();
    }
    return n;
}

Tape::Tape(ParamStore* params) : params_(params), check_finite_(g_default_check_finite) {}

void Tape::set_default_check_finite(bool on) { g_default_check_finite = on; }

const char* Tape::op_name(Op op) {
    switch (op) {
        case Op::kLeaf: return "constant";
        case Op::kParam: return "param";
        case Op::kMatmul: return "matmul";
        case Op::kAdd: return "add";
        case Op::kMul: return "mul";
        case Op::kDiv: return "div";
        case Op::kScale: return "scale";
        case Op::kReshape: return "reshape";
        case Op::kConcatRows: return "concat_rows";
        case Op::kConcatCols: return "concat_cols";
        case Op::kSliceRows: return "slice_rows";
        case Op::kSliceCols: return "slice_cols";
        case Op::kTranspose: return "transpose";
        case Op::kSumAll: return "sum_all";
        case Op::kMeanAll: return "mean_all";
        case Op::kSumCols: return "sum_cols";
        case Op::kMeanCols: return "mean_cols";
        case Op::kCos: return "cos";
        case Op::kSin: return "sin";
        case Op::kExp: return "exp";
        case Op::kTanh: return "tanh";
        case Op::kSoftplus: return "softplus";
        case Op::kSquare: return "square";
        case Op::kSqrt: return "sqrt";
        case Op::kSoftmax: return "softmax";
    }
    return "?";
}

Var Tape::push(Node n) {
    if (check_finite_ && !n.val.all_finite()) {
        throw NumericError(std::string(op_name(n.op)) + ": non-finite value in result " + n.val.shape_str());
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::kLeaf;
    n.val = std::move(value);
    n.needs_grad = false;
    return push(std::move(n));
}

Var Tape::param(const std::string& name) {
    if (params_ == nullptr) throw ContractError("param: tape has no parameter store");
    auto it = bound_params_.find(name);
    if (it != bound_params_.end()) return Var{it->second};
    Node n;
    n.op = Op::kParam;
    n.val = params_->get(name);
    n.param_name = name;
    n.needs_grad = params_->trainable(name);
    Var v = push(std::move(n));
    bound_params_[name] = v.id;
    return v;
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    Tensor out(ta.rows(), tb.cols());
    matmul_into(out, ta, tb);
    Node n;
    n.op = Op::kMatmul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape("add", ta, tb);
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.at(i) += tb.at(i);
    Node n;
    n.op = Op::kAdd;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape("mul", ta, tb);
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.at(i) *= tb.at(i);
    Node n;
    n.op = Op::kMul;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::div(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape("div", ta, tb);
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.at(i) /= tb.at(i);
    Node n;
    n.op = Op::kDiv;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
    Tensor out = val(a);
    for (size_t i = 0; i < out.size(); ++i) out.at(i) *= c;
    Node n;
    n.op = Op::kScale;
    n.a = a.id;
    n.c0 = c;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::reshape(Var a, int rows, int cols) {
    const Tensor& ta = val(a);
    if (rows <= 0 || cols <= 0 || static_cast<size_t>(rows) * cols != ta.size()) {
        throw ShapeError("reshape: " + ta.shape_str() + " to " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    Tensor out(rows, cols);
    for (size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i);
    Node n;
    n.op = Op::kReshape;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::concat_rows(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (ta.cols() != tb.cols()) {
        throw ShapeError("concat_rows: column mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    }
    Tensor out(ta.rows() + tb.rows(), ta.cols());
    std::copy(ta.data(), ta.data() + ta.size(), out.data());
    std::copy(tb.data(), tb.data() + tb.size(), out.data() + ta.size());
    Node n;
    n.op = Op::kConcatRows;
    n.a = a.id;
    n.b = b.id;
    n.i0 = ta.rows();
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (ta.rows() != tb.rows()) {
        throw ShapeError("concat_cols: row mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    }
    Tensor out(ta.rows(), ta.cols() + tb.cols());
    for (int r = 0; r < ta.rows(); ++r) {
        for (int c = 0; c < ta.cols(); ++c) out(r, c) = ta(r, c);
        for (int c = 0; c < tb.cols(); ++c) out(r, ta.cols() + c) = tb(r, c);
    }
    Node n;
    n.op = Op::kConcatCols;
    n.a = a.id;
    n.b = b.id;
    n.i0 = ta.cols();
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::slice_rows(Var a, int begin, int end) {
    const Tensor& ta = val(a);
    if (begin < 0 || end > ta.rows() || begin >= end) {
        throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + ta.shape_str());
    }
    Tensor out(end - begin, ta.cols());
    std::copy(ta.data() + static_cast<size_t>(begin) * ta.cols(),
              ta.data() + static_cast<size_t>(end) * ta.cols(), out.data());
    Node n;
    n.op = Op::kSliceRows;
    n.a = a.id;
    n.i0 = begin;
    n.i1 = end;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::slice_cols(Var a, int begin, int end) {
    const Tensor& ta = val(a);
    if (begin < 0 || end > ta.cols() || begin >= end) {
        throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + ta.shape_str());
    }
    Tensor out(ta.rows(), end - begin);
    for (int r = 0; r < ta.rows(); ++r) {
        for (int c = begin; c < end; ++c) out(r, c - begin) = ta(r, c);
    }
    Node n;
    n.op = Op::kSliceCols;
    n.a = a.id;
    n.i0 = begin;
    n.i1 = end;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::transpose(Var a) {
    const Tensor& ta = val(a);
    Tensor out(ta.cols(), ta.rows());
    for (int r = 0; r < ta.rows(); ++r) {
        for (int c = 0; c < ta.cols(); ++c) out(c, r) = ta(r, c);
    }
    Node n;
    n.op = Op::kTranspose;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::sum_all(Var a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (size_t i = 0; i < ta.size(); ++i) s += ta.at(i);
    Node n;
    n.op = Op::kSumAll;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor::scalar(s);
    return push(std::move(n));
}

Var Tape::mean_all(Var a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (size_t i = 0; i < ta.size(); ++i) s += ta.at(i);
    Node n;
    n.op = Op::kMeanAll;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = Tensor::scalar(s / static_cast<double>(ta.size()));
    return push(std::move(n));
}

Var Tape::sum_cols(Var a) {
    const Tensor& ta = val(a);
    Tensor out(ta.rows(), 1);
    for (int r = 0; r < ta.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < ta.cols(); ++c) s += ta(r, c);
        out(r, 0) = s;
    }
    Node n;
    n.op = Op::kSumCols;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

Var Tape::mean_cols(Var a) {
    const Tensor& ta = val(a);
    Tensor out(ta.rows(), 1);
    for (int r = 0; r < ta.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < ta.cols(); ++c) s += ta(r, c);
        out(r, 0) = s / static_cast<double>(ta.cols());
    }
    Node n;
    n.op = Op::kMeanCols;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

namespace {

template <typename F>
Tensor map_elems(const Tensor& t, F f) {
    Tensor out = t;
    for (size_t i = 0; i < out.size(); ++i) out.at(i) = f(out.at(i));
    return out;
}

double softplus_stable(double x) {
    // log(1 + e^x) without overflow for large |x|
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

} // namespace

Var Tape::cos(Var a) {
    Node n;
    n.op = Op::kCos;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return std::cos(x); });
    return push(std::move(n));
}

Var Tape::sin(Var a) {
    Node n;
    n.op = Op::kSin;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return std::sin(x); });
    return push(std::move(n));
}

Var Tape::exp(Var a) {
    Node n;
    n.op = Op::kExp;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return std::exp(x); });
    return push(std::move(n));
}

Var Tape::tanh(Var a) {
    Node n;
    n.op = Op::kTanh;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return std::tanh(x); });
    return push(std::move(n));
}

Var Tape::softplus(Var a) {
    Node n;
    n.op = Op::kSoftplus;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), softplus_stable);
    return push(std::move(n));
}

Var Tape::square(Var a) {
    Node n;
    n.op = Op::kSquare;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return x * x; });
    return push(std::move(n));
}

Var Tape::sqrt(Var a) {
    Node n;
    n.op = Op::kSqrt;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = map_elems(val(a), [](double x) { return std::sqrt(x); });
    return push(std::move(n));
}

Var Tape::softmax(Var a) {
    const Tensor& ta = val(a);
    Tensor out = ta;
    for (int r = 0; r < out.rows(); ++r) {
        double mx = out(r, 0);
        for (int c = 1; c < out.cols(); ++c) mx = std::max(mx, out(r, c));
        double denom = 0.0;
        for (int c = 0; c < out.cols(); ++c) {
            out(r, c) = std::exp(out(r, c) - mx);
            denom += out(r, c);
        }
        for (int c = 0; c < out.cols(); ++c) out(r, c) /= denom;
    }
    Node n;
    n.op = Op::kSoftmax;
    n.a = a.id;
    n.needs_grad = nodes_[a.id].needs_grad;
    n.val = std::move(out);
    return push(std::move(n));
}

const Tensor& Tape::val(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("val: variable does not belong to this tape");
    }
    return nodes_[v.id].val;
}

Tensor& Tape::grad_of(int id, std::vector<Tensor>& grads) {
    if (grads[id].size() == 0) {
        const Tensor& v = nodes_[id].val;
        grads[id] = Tensor(v.rows(), v.cols()); // zero-filled
    }
    return grads[id];
}

void Tape::backward_node(int id, std::vector<Tensor>& grads) {
    const Node& n = nodes_[id];
    const Tensor& g = grads[id];
    auto needs = [&](int in) { return in >= 0 && nodes_[in].needs_grad; };

    switch (n.op) {
        case Op::kLeaf:
        case Op::kParam:
            break;
        case Op::kMatmul: {
            if (needs(n.a)) matmul_into(grad_of(n.a, grads), g, nodes_[n.b].val, false, true, true);
            if (needs(n.b)) matmul_into(grad_of(n.b, grads), nodes_[n.a].val, g, true, false, true);
            break;
        }
        case Op::kAdd: {
            if (needs(n.a)) add_scaled(grad_of(n.a, grads), g, 1.0);
            if (needs(n.b)) add_scaled(grad_of(n.b, grads), g, 1.0);
            break;
        }
        case Op::kMul: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                const Tensor& vb = nodes_[n.b].val;
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += g.at(i) * vb.at(i);
            }
            if (needs(n.b)) {
                Tensor& gb = grad_of(n.b, grads);
                const Tensor& va = nodes_[n.a].val;
                for (size_t i = 0; i < gb.size(); ++i) gb.at(i) += g.at(i) * va.at(i);
            }
            break;
        }
        case Op::kDiv: {
            const Tensor& vb = nodes_[n.b].val;
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += g.at(i) / vb.at(i);
            }
            if (needs(n.b)) {
                Tensor& gb = grad_of(n.b, grads);
                for (size_t i = 0; i < gb.size(); ++i) gb.at(i) -= g.at(i) * n.val.at(i) / vb.at(i);
            }
            break;
        }
        case Op::kScale: {
            if (needs(n.a)) add_scaled(grad_of(n.a, grads), g, n.c0);
            break;
        }
        case Op::kReshape: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += g.at(i);
            }
            break;
        }
        case Op::kConcatRows: {
            const Tensor& va = nodes_[n.a].val;
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < va.size(); ++i) ga.at(i) += g.at(i);
            }
            if (needs(n.b)) {
                Tensor& gb = grad_of(n.b, grads);
                for (size_t i = 0; i < gb.size(); ++i) gb.at(i) += g.at(va.size() + i);
            }
            break;
        }
        case Op::kConcatCols: {
            int ca = n.i0;
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < ga.rows(); ++r)
                    for (int c = 0; c < ca; ++c) ga(r, c) += g(r, c);
            }
            if (needs(n.b)) {
                Tensor& gb = grad_of(n.b, grads);
                for (int r = 0; r < gb.rows(); ++r)
                    for (int c = 0; c < gb.cols(); ++c) gb(r, c) += g(r, ca + c);
            }
            break;
        }
        case Op::kSliceRows: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < g.rows(); ++r)
                    for (int c = 0; c < g.cols(); ++c) ga(n.i0 + r, c) += g(r, c);
            }
            break;
        }
        case Op::kSliceCols: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < g.rows(); ++r)
                    for (int c = 0; c < g.cols(); ++c) ga(r, n.i0 + c) += g(r, c);
            }
            break;
        }
        case Op::kTranspose: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < g.rows(); ++r)
                    for (int c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
            }
            break;
        }
        case Op::kSumAll: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                double gv = g.at(0);
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += gv;
            }
            break;
        }
        case Op::kMeanAll: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                double gv = g.at(0) / static_cast<double>(ga.size());
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += gv;
            }
            break;
        }
        case Op::kSumCols: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < ga.rows(); ++r)
                    for (int c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, 0);
            }
            break;
        }
        case Op::kMeanCols: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < ga.rows(); ++r) {
                    double gv = g(r, 0) / static_cast<double>(ga.cols());
                    for (int c = 0; c < ga.cols(); ++c) ga(r, c) += gv;
                }
            }
            break;
        }
        case Op::kCos: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                const Tensor& va = nodes_[n.a].val;
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) -= g.at(i) * std::sin(va.at(i));
            }
            break;
        }
        case Op::kSin: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                const Tensor& va = nodes_[n.a].val;
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += g.at(i) * std::cos(va.at(i));
            }
            break;
        }
        case Op::kExp: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += g.at(i) * n.val.at(i);
            }
            break;
        }
        case Op::kTanh: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < ga.size(); ++i) {
                    double y = n.val.at(i);
                    ga.at(i) += g.at(i) * (1.0 - y * y);
                }
            }
            break;
        }
        case Op::kSoftplus: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                const Tensor& va = nodes_[n.a].val;
                for (size_t i = 0; i < ga.size(); ++i) {
                    double x = va.at(i);
                    double sig = (x > 0.0) ? 1.0 / (1.0 + std::exp(-x))
                                           : std::exp(x) / (1.0 + std::exp(x));
                    ga.at(i) += g.at(i) * sig;
                }
            }
            break;
        }
        case Op::kSquare: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                const Tensor& va = nodes_[n.a].val;
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += 2.0 * g.at(i) * va.at(i);
            }
            break;
        }
        case Op::kSqrt: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (size_t i = 0; i < ga.size(); ++i) ga.at(i) += 0.5 * g.at(i) / n.val.at(i);
            }
            break;
        }
        case Op::kSoftmax: {
            if (needs(n.a)) {
                Tensor& ga = grad_of(n.a, grads);
                for (int r = 0; r < ga.rows(); ++r) {
                    double dot = 0.0;
                    for (int c = 0; c < ga.cols(); ++c) dot += g(r, c) * n.val(r, c);
                    for (int c = 0; c < ga.cols(); ++c) {
                        ga(r, c) += n.val(r, c) * (g(r, c) - dot);
                    }
                }
            }
            break;
        }
    }
}

GradMap Tape::backward(Var scalar_output) {
    const Tensor& out = val(scalar_output);
    if (out.size() != 1) {
        throw ContractError("backward: output must be a scalar, got " + out.shape_str());
    }
    std::vector<Tensor> grads(nodes_.size());
    grads[scalar_output.id] = Tensor::scalar(1.0);
    for (int id = scalar_output.id; id >= 0; --id) {
        if (!nodes_[id].needs_grad) continue;
        if (grads[id].size() == 0) continue; // not on a path to the output
        backward_node(id, grads);
    }
    GradMap result;
    for (const auto& [name, node_id] : bound_params_) {
        if (!params_->trainable(name)) continue;
        if (grads[node_id].size() == 0) {
            const Tensor& v = nodes_[node_id].val;
            result.emplace(name, Tensor(v.rows(), v.cols()));
        } else {
            result.emplace(name, std::move(grads[node_id]));
        }
    }
    return result;
}

void Tape::reset() {
    nodes_.clear();
    bound_params_.clear();
}

long double Tape::eval_shifted(Var scalar_output, const std::string& param_name, size_t entry,
                               double delta) const {
    if (scalar_output.id < 0 || scalar_output.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("eval_shifted: variable does not belong to this tape");
    }
    if (val(scalar_output).size() != 1) {
        throw ContractError("eval_shifted: output must be a scalar");
    }

    using Col = std::vector<long double>;
    std::vector<Col> vals(scalar_output.id + 1);

    auto rows_of = [&](int id) { return nodes_[id].val.rows(); };
    auto cols_of = [&](int id) { return nodes_[id].val.cols(); };

    for (int id = 0; id <= scalar_output.id; ++id) {
        const Node& n = nodes_[id];
        int R = n.val.rows();
        int C = n.val.cols();
        Col& out = vals[id];

        switch (n.op) {
            case Op::kLeaf: {
                out.assign(n.val.data(), n.val.data() + n.val.size());
                break;
            }
            case Op::kParam: {
                const Tensor& p = params_->get(n.param_name);
                out.assign(p.data(), p.data() + p.size());
                if (n.param_name == param_name) {
                    if (entry >= out.size()) throw ContractError("eval_shifted: entry out of range");
                    out[entry] += static_cast<long double>(delta);
                }
                break;
            }
            case Op::kMatmul: {
                const Col& a = vals[n.a];
                const Col& b = vals[n.b];
                int inner = cols_of(n.a);
                int bc = cols_of(n.b);
                out.assign(size_t(R) * C, 0.0L);
                for (int r = 0; r < R; ++r) {
                    for (int k = 0; k < inner; ++k) {
                        long double arx = a[size_t(r) * inner + k];
                        if (arx == 0.0L) continue;
                        const long double* brow = b.data() + size_t(k) * bc;
                        long double* orow = out.data() + size_t(r) * C;
                        for (int c = 0; c < C; ++c) orow[c] += arx * brow[c];
                    }
                }
                break;
            }
            case Op::kAdd: {
                out = vals[n.a];
                const Col& b = vals[n.b];
                for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
                break;
            }
            case Op::kMul: {
                out = vals[n.a];
                const Col& b = vals[n.b];
                for (size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
                break;
            }
            case Op::kDiv: {
                out = vals[n.a];
                const Col& b = vals[n.b];
                for (size_t i = 0; i < out.size(); ++i) out[i] /= b[i];
                break;
            }
            case Op::kScale: {
                out = vals[n.a];
                for (long double& v : out) v *= static_cast<long double>(n.c0);
                break;
            }
            case Op::kReshape: {
                out = vals[n.a];
                break;
            }
            case Op::kConcatRows: {
                out = vals[n.a];
                out.insert(out.end(), vals[n.b].begin(), vals[n.b].end());
                break;
            }
            case Op::kConcatCols: {
                int ca = cols_of(n.a);
                out.resize(size_t(R) * C);
                for (int r = 0; r < R; ++r) {
                    for (int c = 0; c < ca; ++c) out[size_t(r) * C + c] = vals[n.a][size_t(r) * ca + c];
                    for (int c = ca; c < C; ++c)
                        out[size_t(r) * C + c] = vals[n.b][size_t(r) * (C - ca) + (c - ca)];
                }
                break;
            }
            case Op::kSliceRows: {
                int ac = cols_of(n.a);
                out.assign(vals[n.a].begin() + size_t(n.i0) * ac, vals[n.a].begin() + size_t(n.i1) * ac);
                break;
            }
            case Op::kSliceCols: {
                int ac = cols_of(n.a);
                out.resize(size_t(R) * C);
                for (int r = 0; r < R; ++r)
                    for (int c = 0; c < C; ++c) out[size_t(r) * C + c] = vals[n.a][size_t(r) * ac + n.i0 + c];
                break;
            }
            case Op::kTranspose: {
                out.resize(size_t(R) * C);
                for (int r = 0; r < R; ++r)
                    for (int c = 0; c < C; ++c) out[size_t(r) * C + c] = vals[n.a][size_t(c) * R + r];
                break;
            }
            case Op::kSumAll: {
                long double s = 0.0L;
                for (long double v : vals[n.a]) s += v;
                out.assign(1, s);
                break;
            }
            case Op::kMeanAll: {
                long double s = 0.0L;
                for (long double v : vals[n.a]) s += v;
                out.assign(1, s / static_cast<long double>(vals[n.a].size()));
                break;
            }
            case Op::kSumCols: {
                int ac = cols_of(n.a);
                out.resize(R);
                for (int r = 0; r < R; ++r) {
                    long double s = 0.0L;
                    for (int c = 0; c < ac; ++c) s += vals[n.a][size_t(r) * ac + c];
                    out[r] = s;
                }
                break;
            }
            case Op::kMeanCols: {
                int ac = cols_of(n.a);
                out.resize(R);
                for (int r = 0; r < R; ++r) {
                    long double s = 0.0L;
                    for (int c = 0; c < ac; ++c) s += vals[n.a][size_t(r) * ac + c];
                    out[r] = s / static_cast<long double>(ac);
                }
                break;
            }
            case Op::kCos: {
                out = vals[n.a];
                for (long double& v : out) v = cosl(v);
                break;
            }
            case Op::kSin: {
                out = vals[n.a];
                for (long double& v : out) v = sinl(v);
                break;
            }
            case Op::kExp: {
                out = vals[n.a];
                for (long double& v : out) v = expl(v);
                break;
            }
            case Op::kTanh: {
                out = vals[n.a];
                for (long double& v : out) v = tanhl(v);
                break;
            }
            case Op::kSoftplus: {
                out = vals[n.a];
                for (long double& v : out) v = v > 0.0L ? v + log1pl(expl(-v)) : log1pl(expl(v));
                break;
            }
            case Op::kSquare: {
                out = vals[n.a];
                for (long double& v : out) v *= v;
                break;
            }
            case Op::kSqrt: {
                out = vals[n.a];
                for (long double& v : out) v = sqrtl(v);
                break;
            }
            case Op::kSoftmax: {
                out = vals[n.a];
                for (int r = 0; r < R; ++r) {
                    long double* row = out.data() + size_t(r) * C;
                    long double mx = row[0];
                    for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
                    long double denom = 0.0L;
                    for (int c = 0; c < C; ++c) {
                        row[c] = expl(row[c] - mx);
                        denom += row[c];
                    }
                    for (int c = 0; c < C; ++c) row[c] /= denom;
                }
                break;
            }
        }
        (void)rows_of;
    }
    long double result = vals[scalar_output.id][0];
    if (!std::isfinite(static_cast<double>(result))) {
        throw NumericError("eval_shifted: non-finite loss");
    }
    return result;
}

double fd_gradient_check(const std::function<Var(Tape&)>& loss_fn, ParamStore& params, double h) {
    if (!(h > 0.0)) throw ContractError("fd_gradient_check: h must be positive");
    Tape tape(&params);
    Var loss = loss_fn(tape);
    if (!std::isfinite(tape.val(loss).item())) throw NumericError("fd_gradient_check: non-finite loss");
    GradMap grads = tape.backward(loss);

    double worst = 0.0;
    for (const auto& name : params.trainable_names()) {
        auto git = grads.find(name);
        if (git == grads.end()) continue; // parameter not used by this loss
        const Tensor& g = git->second;
        for (size_t i = 0; i < g.size(); ++i) {
            long double up = tape.eval_shifted(loss, name, i, h);
            long double down = tape.eval_shifted(loss, name, i, -h);
            long double fd = (up - down) / (2.0L * h);
            // A gradient that is zero on both sides carries only replay
            // rounding noise; comparing the noise terms is meaningless.
            if (std::abs(g.at(i)) < 1e-10 && std::abs(static_cast<double>(fd)) < 1e-10) continue;
            double rel = std::abs(static_cast<double>(fd - g.at(i))) / std::max(std::abs(g.at(i)), 1e-12);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace sca
