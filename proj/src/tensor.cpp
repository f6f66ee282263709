#include "cwb/tensor.hpp"

#include <cmath>

namespace cwb::ad {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_same_tape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.tape != nullptr && b.tape != nullptr,
          std::string(op) + ": tensor not bound to a tape");
  require(a.tape == b.tape, std::string(op) + ": operands live on different tapes");
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw cwb::ContractError(std::string(op) + ": incompatible shapes " +
                           shape_str(a) + " and " + shape_str(b));
}

}  // namespace

const Matrix& Tensor::value() const {
  require(tape != nullptr, "Tensor: not bound to a tape");
  return tape->value(id);
}

Tensor Tape::input(Matrix value) {
  nodes_.push_back({std::move(value), {}, {}, true});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), {}, {}, false});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(int id) const {
  require(id >= 0 && id < static_cast<int>(nodes_.size()), "Tape: bad tensor id");
  return nodes_[static_cast<std::size_t>(id)].value;
}

Matrix Tape::grad(const Tensor& t) const {
  require(t.tape == this, "Tape::grad: tensor from another tape");
  const Node& node = nodes_.at(static_cast<std::size_t>(t.id));
  if (node.grad.size() == 0)
    return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Tensor Tape::emplace(Matrix value, bool needs_grad) {
  nodes_.push_back({std::move(value), {}, {}, needs_grad});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::set_back(int id, std::function<void(Tape&)> back) {
  nodes_[static_cast<std::size_t>(id)].back = std::move(back);
}

bool Tape::needs_grad(int id) const {
  return nodes_[static_cast<std::size_t>(id)].needs_grad;
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
    return;
  }
  if (node.grad.rows() != g.rows() || node.grad.cols() != g.cols())
    shape_error("accumulate", node.grad, g);
  node.grad += g;
}

const Matrix* Tape::grad_if_touched(int id) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  return node.grad.size() == 0 ? nullptr : &node.grad;
}

void Tape::backward(const Tensor& loss) {
  require(loss.tape == this, "backward: loss from another tape");
  require(!nodes_.empty(), "backward: empty tape");
  const Node& last = nodes_.at(static_cast<std::size_t>(loss.id));
  if (last.value.rows() != 1 || last.value.cols() != 1)
    throw cwb::ContractError("backward: loss must be a 1x1 scalar, got " +
                             shape_str(last.value));
  for (Node& n : nodes_) n.grad.resize(0, 0);
  accumulate(loss.id, Matrix::Ones(1, 1));
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.grad.size() != 0 && node.back) node.back(*this);
  }
}

Tensor matmul(Tensor a, Tensor b) {
  check_same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(av * bv, tape.needs_grad(a.id) || tape.needs_grad(b.id));
  int aid = a.id, bid = b.id, oid = out.id;
  tape.set_back(oid, [aid, bid, oid](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    if (t.needs_grad(aid)) t.accumulate(aid, g * t.value(bid).transpose());
    if (t.needs_grad(bid)) t.accumulate(bid, t.value(aid).transpose() * g);
  });
  return out;
}

Tensor add(Tensor a, Tensor b) {
  check_same_tape(a, b, "add");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Tape& tape = *a.tape;
  bool bias = bv.rows() == 1 && bv.cols() == av.cols() && av.rows() != 1;
  if (!bias && (av.rows() != bv.rows() || av.cols() != bv.cols()))
    shape_error("add", av, bv);
  Matrix value = bias ? Matrix(av.rowwise() + bv.row(0)) : Matrix(av + bv);
  Tensor out = tape.emplace(std::move(value),
                            tape.needs_grad(a.id) || tape.needs_grad(b.id));
  int aid = a.id, bid = b.id, oid = out.id;
  tape.set_back(oid, [aid, bid, oid, bias](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    if (t.needs_grad(aid)) t.accumulate(aid, g);
    if (t.needs_grad(bid)) t.accumulate(bid, bias ? Matrix(g.colwise().sum()) : g);
  });
  return out;
}

Tensor mul(Tensor a, Tensor b) {
  check_same_tape(a, b, "mul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("mul", av, bv);
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(av.cwiseProduct(bv),
                            tape.needs_grad(a.id) || tape.needs_grad(b.id));
  int aid = a.id, bid = b.id, oid = out.id;
  tape.set_back(oid, [aid, bid, oid](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    if (t.needs_grad(aid)) t.accumulate(aid, g.cwiseProduct(t.value(bid)));
    if (t.needs_grad(bid)) t.accumulate(bid, g.cwiseProduct(t.value(aid)));
  });
  return out;
}

Tensor scale(Tensor a, double s) {
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(a.value() * s, tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, s](Tape& t) {
    t.accumulate(aid, *t.grad_if_touched(oid) * s);
  });
  return out;
}

Tensor transpose(Tensor a) {
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(a.value().transpose(), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid](Tape& t) {
    t.accumulate(aid, t.grad_if_touched(oid)->transpose());
  });
  return out;
}

Tensor concat(Tensor a, Tensor b, int axis) {
  check_same_tape(a, b, "concat");
  require(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix value;
  if (axis == 0) {
    if (av.cols() != bv.cols()) shape_error("concat", av, bv);
    value.resize(av.rows() + bv.rows(), av.cols());
    value.topRows(av.rows()) = av;
    value.bottomRows(bv.rows()) = bv;
  } else {
    if (av.rows() != bv.rows()) shape_error("concat", av, bv);
    value.resize(av.rows(), av.cols() + bv.cols());
    value.leftCols(av.cols()) = av;
    value.rightCols(bv.cols()) = bv;
  }
  Tape& tape = *a.tape;
  // Capture shapes before emplace: growing the tape invalidates av/bv.
  Index ar = av.rows(), ac = av.cols();
  Tensor out = tape.emplace(std::move(value),
                            tape.needs_grad(a.id) || tape.needs_grad(b.id));
  int aid = a.id, bid = b.id, oid = out.id;
  tape.set_back(oid, [aid, bid, oid, axis, ar, ac](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    if (axis == 0) {
      if (t.needs_grad(aid)) t.accumulate(aid, g.topRows(ar));
      if (t.needs_grad(bid)) t.accumulate(bid, g.bottomRows(g.rows() - ar));
    } else {
      if (t.needs_grad(aid)) t.accumulate(aid, g.leftCols(ac));
      if (t.needs_grad(bid)) t.accumulate(bid, g.rightCols(g.cols() - ac));
    }
  });
  return out;
}

Tensor slice(Tensor a, Index row0, Index col0, Index rows, Index cols) {
  const Matrix& av = a.value();
  require(row0 >= 0 && col0 >= 0 && rows >= 1 && cols >= 1 &&
              row0 + rows <= av.rows() && col0 + cols <= av.cols(),
          "slice: block [" + std::to_string(row0) + "," + std::to_string(col0) +
              " + " + std::to_string(rows) + "x" + std::to_string(cols) +
              "] out of bounds for " + shape_str(av));
  Tape& tape = *a.tape;
  // Capture shapes before emplace: growing the tape invalidates av.
  Index ar = av.rows(), ac = av.cols();
  Tensor out = tape.emplace(av.block(row0, col0, rows, cols), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, row0, col0, rows, cols, ar, ac](Tape& t) {
    Matrix g = Matrix::Zero(ar, ac);
    g.block(row0, col0, rows, cols) = *t.grad_if_touched(oid);
    t.accumulate(aid, g);
  });
  return out;
}

namespace {

Matrix softmax_rows_value(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    double mx = a.row(i).maxCoeff();
    Eigen::ArrayXd e = (a.row(i).array() - mx).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

}  // namespace

Tensor softmax(Tensor a, int axis) {
  require(axis == 0 || axis == 1, "softmax: axis must be 0 or 1");
  const Matrix& av = a.value();
  Matrix value = axis == 1 ? softmax_rows_value(av)
                           : softmax_rows_value(av.transpose()).transpose();
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, axis](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& s = t.value(oid);
    Matrix da(s.rows(), s.cols());
    if (axis == 1) {
      for (Index i = 0; i < s.rows(); ++i) {
        double dot = g.row(i).dot(s.row(i));
        da.row(i) = (g.row(i).array() - dot).matrix().cwiseProduct(s.row(i));
      }
    } else {
      for (Index j = 0; j < s.cols(); ++j) {
        double dot = g.col(j).dot(s.col(j));
        da.col(j) = (g.col(j).array() - dot).matrix().cwiseProduct(s.col(j));
      }
    }
    t.accumulate(aid, da);
  });
  return out;
}

Tensor layer_norm(Tensor a, int axis, double eps) {
  require(axis == 0 || axis == 1, "layer_norm: axis must be 0 or 1");
  const Matrix& av = a.value();
  const Index span = axis == 1 ? av.cols() : av.rows();
  require(span >= 2, "layer_norm: normalized span must be >= 2");
  Matrix value(av.rows(), av.cols());
  Matrix inv_sigma(axis == 1 ? av.rows() : 1, axis == 1 ? 1 : av.cols());
  auto normalize = [&](auto src, auto dst, Index k) {
    double mean = src.mean();
    double var = (src.array() - mean).square().sum() / static_cast<double>(span);
    double inv = 1.0 / std::sqrt(var + eps);
    dst = ((src.array() - mean) * inv).matrix();
    (axis == 1 ? inv_sigma(k, 0) : inv_sigma(0, k)) = inv;
  };
  if (axis == 1) {
    for (Index i = 0; i < av.rows(); ++i) normalize(av.row(i), value.row(i), i);
  } else {
    for (Index j = 0; j < av.cols(); ++j) normalize(av.col(j), value.col(j), j);
  }
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, axis, inv_sigma](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& y = t.value(oid);
    Matrix da(y.rows(), y.cols());
    auto backrow = [&](auto gr, auto yr, double inv, auto dr) {
      double gm = gr.mean();
      double gym = (gr.array() * yr.array()).mean();
      dr = ((gr.array() - gm - yr.array() * gym) * inv).matrix();
    };
    if (axis == 1) {
      for (Index i = 0; i < y.rows(); ++i)
        backrow(g.row(i), y.row(i), inv_sigma(i, 0), da.row(i));
    } else {
      for (Index j = 0; j < y.cols(); ++j)
        backrow(g.col(j), y.col(j), inv_sigma(0, j), da.col(j));
    }
    t.accumulate(aid, da);
  });
  return out;
}

Tensor relu(Tensor a) {
  const Matrix& av = a.value();
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(av.cwiseMax(0.0), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& x = t.value(aid);
    t.accumulate(aid, (x.array() > 0.0).select(g, Matrix::Zero(g.rows(), g.cols())));
  });
  return out;
}

Tensor gelu(Tensor a) {
  const Matrix& av = a.value();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Matrix value = av.unaryExpr([inv_sqrt2](double x) {
    return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  });
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, inv_sqrt2](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& x = t.value(aid);
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
    Matrix d = x.unaryExpr([inv_sqrt2, inv_sqrt2pi](double v) {
      double phi_cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      double phi_pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
      return phi_cdf + v * phi_pdf;
    });
    t.accumulate(aid, g.cwiseProduct(d));
  });
  return out;
}

Tensor sigmoid(Tensor a) {
  const Matrix& av = a.value();
  Matrix value = av.unaryExpr([](double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  });
  Tape& tape = *a.tape;
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& s = t.value(oid);
    t.accumulate(aid, g.cwiseProduct(
                          s.cwiseProduct((1.0 - s.array()).matrix())));
  });
  return out;
}

Tensor mean(Tensor a, int axis) {
  require(axis == 0 || axis == 1, "mean: axis must be 0 or 1");
  const Matrix& av = a.value();
  Matrix value = axis == 0 ? Matrix(av.colwise().mean())
                           : Matrix(av.rowwise().mean());
  Tape& tape = *a.tape;
  // Capture shapes before emplace: growing the tape invalidates av.
  Index rows = av.rows(), cols = av.cols();
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(a.id));
  int aid = a.id, oid = out.id;
  tape.set_back(oid, [aid, oid, axis, rows, cols](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    if (axis == 0) {
      t.accumulate(aid, (Matrix::Ones(rows, 1) * g) / static_cast<double>(rows));
    } else {
      t.accumulate(aid, (g * Matrix::Ones(1, cols)) / static_cast<double>(cols));
    }
  });
  return out;
}

Tensor embedding_lookup(Tensor table, const std::vector<int>& ids) {
  const Matrix& tv = table.value();
  for (int id : ids)
    require(id >= 0 && id < tv.rows(),
            "embedding_lookup: id " + std::to_string(id) + " out of range [0, " +
                std::to_string(tv.rows()) + ")");
  Matrix value(static_cast<Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i)
    value.row(static_cast<Index>(i)) = tv.row(ids[i]);
  Tape& tape = *table.tape;
  Tensor out = tape.emplace(std::move(value), tape.needs_grad(table.id));
  int tid = table.id, oid = out.id;
  std::vector<int> ids_copy = ids;
  tape.set_back(oid, [tid, oid, ids_copy](Tape& t) {
    const Matrix& g = *t.grad_if_touched(oid);
    const Matrix& tv = t.value(tid);
    Matrix dt = Matrix::Zero(tv.rows(), tv.cols());
    for (std::size_t i = 0; i < ids_copy.size(); ++i)
      dt.row(ids_copy[i]) += g.row(static_cast<Index>(i));
    t.accumulate(tid, dt);
  });
  return out;
}

Tensor bce_with_logits(Tensor logits, const std::vector<double>& targets) {
  const Matrix& lv = logits.value();
  require(lv.cols() == 1, "bce_with_logits: logits must be a column vector");
  require(static_cast<std::size_t>(lv.rows()) == targets.size(),
          "bce_with_logits: " + std::to_string(lv.rows()) + " logits vs " +
              std::to_string(targets.size()) + " targets");
  double loss = 0.0;
  for (Index i = 0; i < lv.rows(); ++i) {
    double z = lv(i, 0);
    double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    loss += softplus - targets[static_cast<std::size_t>(i)] * z;
  }
  Tape& tape = *logits.tape;
  Tensor out = tape.emplace(Matrix::Constant(1, 1, loss), tape.needs_grad(logits.id));
  int lid = logits.id, oid = out.id;
  std::vector<double> tgt = targets;
  tape.set_back(oid, [lid, oid, tgt](Tape& t) {
    double g = (*t.grad_if_touched(oid))(0, 0);
    const Matrix& z = t.value(lid);
    Matrix dz(z.rows(), 1);
    for (Index i = 0; i < z.rows(); ++i) {
      double v = z(i, 0);
      double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                            : std::exp(v) / (1.0 + std::exp(v));
      dz(i, 0) = g * (sig - tgt[static_cast<std::size_t>(i)]);
    }
    t.accumulate(lid, dz);
  });
  return out;
}

GradCheckReport grad_check(const DiffFn& f, const ParamMap& params, double h,
                           double tol) {
  auto eval = [&](const ParamMap& p) {
    Tape tape;
    BoundParams bound;
    for (const auto& [name, value] : p) bound[name] = tape.input(value);
    Tensor loss = f(tape, bound);
    require(loss.rows() == 1 && loss.cols() == 1,
            "grad_check: f must return a scalar");
    return loss.value()(0, 0);
  };

  // Analytic gradients.
  ParamMap analytic;
  {
    Tape tape;
    BoundParams bound;
    for (const auto& [name, value] : params) bound[name] = tape.input(value);
    Tensor loss = f(tape, bound);
    require(loss.rows() == 1 && loss.cols() == 1,
            "grad_check: f must return a scalar");
    tape.backward(loss);
    for (const auto& [name, tensor] : bound) analytic[name] = tape.grad(tensor);
  }

  GradCheckReport report;
  ParamMap work = params;
  for (auto& [name, value] : work) {
    double worst = 0.0;
    for (Index i = 0; i < value.rows(); ++i) {
      for (Index j = 0; j < value.cols(); ++j) {
        double orig = value(i, j);
        value(i, j) = orig + h;
        double up = eval(work);
        value(i, j) = orig - h;
        double down = eval(work);
        value(i, j) = orig;
        double numeric = (up - down) / (2.0 * h);
        double a = analytic[name](i, j);
        double rel = std::abs(a - numeric) /
                     std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, rel);
      }
    }
    report.per_param[name] = worst;
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  report.pass = report.max_rel_error < tol;
  return report;
}

}  // namespace cwb::ad
