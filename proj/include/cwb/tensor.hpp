#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cwb/common.hpp"

namespace cwb::ad {

using cwb::Index;
using cwb::Matrix;

class Tape;

// Lightweight handle into a tape: rank-2 tensors only (row-major semantics;
// a scalar is 1x1, a row vector 1xC). Valid while its tape is alive.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

// Dynamic reverse-mode tape. Nodes are recorded in evaluation order;
// backward() walks them once, last to first. Single-threaded by contract;
// run distinct tapes on distinct threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable leaf (parameters, inputs under test).
  Tensor input(Matrix value);
  // Non-differentiable leaf (data, masks, structural ones-matrices).
  Tensor constant(Matrix value);

  const Matrix& value(int id) const;
  // Gradient of the last backward() target w.r.t. tensor t; zero matrix if
  // the target did not depend on t.
  Matrix grad(const Tensor& t) const;

  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

  // --- primitive-author interface ---
  Tensor emplace(Matrix value, bool needs_grad);
  void set_back(int id, std::function<void(Tape&)> back);
  bool needs_grad(int id) const;
  // Adds g into id's gradient buffer (no-op for non-differentiable nodes).
  void accumulate(int id, const Matrix& g);
  const Matrix* grad_if_touched(int id) const;

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until first accumulation
    std::function<void(Tape&)> back;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Primitives. Shape mismatches throw ContractError naming both shapes.
Tensor matmul(Tensor a, Tensor b);
// Same-shape addition, or bias broadcast when b is a 1 x cols(a) row vector.
Tensor add(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);        // elementwise, same shape
Tensor scale(Tensor a, double s);
Tensor transpose(Tensor a);
Tensor concat(Tensor a, Tensor b, int axis);
Tensor slice(Tensor a, Index row0, Index col0, Index rows, Index cols);
// axis semantics: axis=1 normalizes each row (across columns), axis=0 each
// column (across rows).
Tensor softmax(Tensor a, int axis);
Tensor layer_norm(Tensor a, int axis, double eps = 1e-12);  // non-affine
Tensor relu(Tensor a);
Tensor gelu(Tensor a);  // exact erf form
Tensor sigmoid(Tensor a);
Tensor mean(Tensor a, int axis);
// Gathers rows of table; ids must lie in [0, rows).
Tensor embedding_lookup(Tensor table, const std::vector<int>& ids);
// Scalar binary cross-entropy from logits (Lx1), summed over positions:
// sum_l softplus(z_l) - t_l * z_l.
Tensor bce_with_logits(Tensor logits, const std::vector<double>& targets);

inline Tensor sub(Tensor a, Tensor b) { return add(a, scale(b, -1.0)); }

using ParamMap = std::map<std::string, Matrix>;
using BoundParams = std::map<std::string, Tensor>;
// Scalar-valued differentiable function of named parameters.
using DiffFn = std::function<Tensor(Tape&, const BoundParams&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool pass = false;
  std::map<std::string, double> per_param;
};

// Compares reverse-mode gradients of f against central differences with step
// h, coordinate by coordinate. Relative error uses an absolute floor of 1:
// |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(const DiffFn& f, const ParamMap& params,
                           double h = 1e-5, double tol = 1e-6);

}  // namespace cwb::ad
