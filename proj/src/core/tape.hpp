#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace sca {

// Named leaf tensors; the trainable subset receives gradients.
class ParamStore {
  public:
    void add(const std::string& name, Tensor value, bool trainable = true);
    bool has(const std::string& name) const { return values_.count(name) != 0; }
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool trainable(const std::string& name) const;
    std::vector<std::string> trainable_names() const;
    size_t trainable_entry_count() const;

    std::map<std::string, Tensor>& values() { return values_; }
    const std::map<std::string, Tensor>& values() const { return values_; }

  private:
    std::map<std::string, Tensor> values_; // ordered: deterministic iteration
    std::map<std::string, bool> trainable_;
};

struct Var {
    int id = -1;
};

using GradMap = std::map<std::string, Tensor>;

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order;
// backward walks them once in reverse. The tape is rebuilt each forward
// pass, which lets the graph change across epochs (token augmentation,
// mixing-factor strategies).
class Tape {
  public:
    explicit Tape(ParamStore* params = nullptr);
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var scalar_const(double v) { return constant(Tensor::scalar(v)); }
    Var param(const std::string& name);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var mul(Var a, Var b);       // elementwise, same shape
    Var div(Var a, Var b);       // elementwise, same shape
    Var scale(Var a, double c);
    Var reshape(Var a, int rows, int cols);
    Var concat_rows(Var a, Var b);
    Var concat_cols(Var a, Var b);
    Var slice_rows(Var a, int begin, int end);
    Var slice_cols(Var a, int begin, int end);
    Var transpose(Var a);
    Var sum_all(Var a);   // 1x1
    Var mean_all(Var a);  // 1x1
    Var sum_cols(Var a);  // px q -> px1, sum over the last axis
    Var mean_cols(Var a);
    Var cos(Var a);
    Var sin(Var a);
    Var exp(Var a);
    Var tanh(Var a);
    Var softplus(Var a);
    Var square(Var a);
    Var sqrt(Var a);
    Var softmax(Var a); // rowwise over the last axis, max-subtracted

    const Tensor& val(Var v) const;
    size_t node_count() const { return nodes_.size(); }

    // Gradients of a scalar output w.r.t. every trainable leaf used here.
    GradMap backward(Var scalar_output);

    // Re-runs the recorded graph in extended precision with one parameter
    // entry shifted by delta, returning the scalar output's value. This is
    // the evaluation path of the finite-difference oracle: the difference
    // L(p+h)-L(p-h) cancels to ~h*gradient, so evaluating L at double
    // precision would drown small gradients in rounding noise.
    long double eval_shifted(Var scalar_output, const std::string& param_name, size_t entry,
                             double delta) const;

    // Clear recorded nodes; the tape can then run a fresh forward pass.
    void reset();

    void set_check_finite(bool on) { check_finite_ = on; }
    static void set_default_check_finite(bool on);

    ParamStore* params() { return params_; }

  private:
    enum class Op {
        kLeaf, kParam, kMatmul, kAdd, kMul, kDiv, kScale, kReshape,
        kConcatRows, kConcatCols, kSliceRows, kSliceCols, kTranspose,
        kSumAll, kMeanAll, kSumCols, kMeanCols,
        kCos, kSin, kExp, kTanh, kSoftplus, kSquare, kSqrt, kSoftmax,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        int i0 = 0;
        int i1 = 0;
        double c0 = 0.0;
        bool needs_grad = false;
        Tensor val;
        std::string param_name; // kParam only
    };

    Var push(Node n);
    static const char* op_name(Op op);
    void backward_node(int id, std::vector<Tensor>& grads);
    Tensor& grad_of(int id, std::vector<Tensor>& grads);

    ParamStore* params_ = nullptr;
    std::vector<Node> nodes_;
    std::map<std::string, int> bound_params_;
    bool check_finite_ = false;
};

// Max over trainable parameter entries of the relative disagreement between
// reverse-mode gradients and central finite differences of loss_fn.
double fd_gradient_check(const std::function<Var(Tape&)>& loss_fn, ParamStore& params, double h);

} // namespace sca
