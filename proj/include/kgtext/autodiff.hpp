#pragma once

// Tape-based reverse-mode automatic differentiation over Eigen double
// matrices.  A Tape owns every node created through it; backward() seeds a
// scalar root and sweeps the tape in reverse creation order, accumulating
// gradients into parents and finally into bound Parameters.
//
// Conventions: matrices are (rows = positions/steps, cols = features);
// scalars are 1x1.  All math is double precision so finite-difference
// checks can hold tight tolerances.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kgtext/common.hpp"

namespace kgtext {

using Eigen::MatrixXd;

struct Node {
  MatrixXd value;
  MatrixXd grad;  // lazily sized on first touch
  bool needs_grad = false;
  std::function<void()> backward;  // accumulates into parent grads

  void ensure_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols())
      grad = MatrixXd::Zero(value.rows(), value.cols());
  }
};

using Var = std::shared_ptr<Node>;

// A named trainable tensor that outlives any single tape.
struct Parameter {
  std::string name;
  MatrixXd value;
  MatrixXd grad;
  MatrixXd m, v;  // optimizer moment estimates

  void zero_grad() {
    if (grad.size() == 0) grad = MatrixXd::Zero(value.rows(), value.cols());
    grad.setZero();
  }
};

inline void check_finite(const MatrixXd& m, const std::string& context) {
  if (!m.allFinite()) throw NumericError("non-finite values in " + context);
}

// Relative-position bucketing for attention bias tables: one exact bucket
// per offset in [-window, window], then kRelFarBuckets log-spaced buckets
// per direction covering |offset| in (window, kRelMaxDistance], clamped
// beyond.  Bucket indices run 0..rel_n_buckets(window)-1 with the zero
// offset at index window + kRelFarBuckets.
inline constexpr int kRelFarBuckets = 4;
inline constexpr double kRelMaxDistance = 128.0;

inline int rel_n_buckets(int window) { return 2 * (window + kRelFarBuckets) + 1; }

inline int rel_bucket(long offset, int window) {
  const int side = window + kRelFarBuckets;
  const long a = offset < 0 ? -offset : offset;
  int steps;
  if (a <= window) {
    steps = static_cast<int>(a);
  } else {
    double ratio = std::max(kRelMaxDistance, 2.0 * window) / window;
    double frac = std::log(static_cast<double>(a) / window) / std::log(ratio);
    steps = window + std::min(kRelFarBuckets, 1 + static_cast<int>(frac * kRelFarBuckets));
  }
  return offset < 0 ? side - steps : side + steps;
}

class Tape {
 public:
  // grad_enabled = false builds a forward-only tape: parameters become
  // plain constants and no backward closures are created.
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var leaf(MatrixXd v, bool needs_grad = false) {
    return make(std::move(v), needs_grad && grad_enabled_, nullptr);
  }

  Var constant(MatrixXd v) { return leaf(std::move(v), false); }

  Var scalar(double v) { return leaf(MatrixXd::Constant(1, 1, v), false); }

  // Binds a Parameter into this tape; after backward(), the accumulated
  // node gradient is added into p.grad.
  Var param(Parameter& p) {
    if (!grad_enabled_) return make(p.value, false, nullptr);
    Var n = make(p.value, true, nullptr);
    bindings_.emplace_back(&p, n);
    return n;
  }

  // --- elementwise / affine ----------------------------------------------

  Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Var out = make(a->value + b->value, a->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, b] {
        if (a->needs_grad) accum(a, self->grad);
        if (b->needs_grad) accum(b, self->grad);
      };
    return out;
  }

  Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    Var out = make(a->value - b->value, a->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, b] {
        if (a->needs_grad) accum(a, self->grad);
        if (b->needs_grad) accum(b, -self->grad);
      };
    return out;
  }

  Var mul(const Var& a, const Var& b) {  // Hadamard
    require_same_shape(a, b, "mul");
    Var out = make(a->value.cwiseProduct(b->value), a->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, b] {
        if (a->needs_grad) accum(a, self->grad.cwiseProduct(b->value));
        if (b->needs_grad) accum(b, self->grad.cwiseProduct(a->value));
      };
    return out;
  }

  Var scale(const Var& a, double c) {
    Var out = make(a->value * c, a->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, c] { accum(a, self->grad * c); };
    return out;
  }

  // Adds a constant matrix (masks, fixed offsets); no gradient through it.
  Var add_const(const Var& a, const MatrixXd& m) {
    if (a->value.rows() != m.rows() || a->value.cols() != m.cols())
      throw UsageError("add_const: shape mismatch");
    Var out = make(a->value + m, a->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a] { accum(a, self->grad); };
    return out;
  }

  // --- matrix products ----------------------------------------------------

  Var matmul(const Var& a, const Var& b) {  // A * B
    if (a->value.cols() != b->value.rows()) throw UsageError("matmul: inner dims differ");
    Var out = make(a->value * b->value, a->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, b] {
        if (a->needs_grad) accum(a, self->grad * b->value.transpose());
        if (b->needs_grad) accum(b, a->value.transpose() * self->grad);
      };
    return out;
  }

  Var matmul_nt(const Var& a, const Var& b) {  // A * B^T
    if (a->value.cols() != b->value.cols()) throw UsageError("matmul_nt: inner dims differ");
    Var out = make(a->value * b->value.transpose(), a->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), a, b] {
        if (a->needs_grad) accum(a, self->grad * b->value);
        if (b->needs_grad) accum(b, self->grad.transpose() * a->value);
      };
    return out;
  }

  // y = x W^T + b, with W (d_out, d_in) and b (1, d_out) broadcast to rows.
  Var linear(const Var& x, const Var& W, const Var& b) {
    if (x->value.cols() != W->value.cols()) throw UsageError("linear: input dim mismatch");
    if (b->value.rows() != 1 || b->value.cols() != W->value.rows())
      throw UsageError("linear: bias shape mismatch");
    MatrixXd y = x->value * W->value.transpose();
    y.rowwise() += b->value.row(0);
    Var out = make(std::move(y), x->needs_grad || W->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, W, b] {
        if (x->needs_grad) accum(x, self->grad * W->value);
        if (W->needs_grad) accum(W, self->grad.transpose() * x->value);
        if (b->needs_grad) accum(b, self->grad.colwise().sum());
      };
    return out;
  }

  // Row gather: out.row(t) = x.row(ids[t]); backward scatter-adds.
  Var gather_rows(const Var& x, const std::vector<int>& ids) {
    for (int id : ids)
      if (id < 0 || id >= x->value.rows())
        throw UsageError("gather_rows: index out of range");
    MatrixXd v(static_cast<Eigen::Index>(ids.size()), x->value.cols());
    for (size_t t = 0; t < ids.size(); ++t) v.row(static_cast<Eigen::Index>(t)) = x->value.row(ids[t]);
    Var out = make(std::move(v), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, ids] {
        for (size_t t = 0; t < ids.size(); ++t)
          x->grad.row(ids[t]) += self->grad.row(static_cast<Eigen::Index>(t));
      };
    return out;
  }

  Var slice_rows(const Var& x, int start, int n) {
    if (start < 0 || n < 0 || start + n > x->value.rows())
      throw UsageError("slice_rows: out of range");
    Var out = make(x->value.middleRows(start, n), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, start, n] {
        x->grad.middleRows(start, n) += self->grad;
      };
    return out;
  }

  Var slice_cols(const Var& x, int start, int n) {
    if (start < 0 || n < 0 || start + n > x->value.cols())
      throw UsageError("slice_cols: out of range");
    Var out = make(x->value.middleCols(start, n), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, start, n] {
        x->grad.middleCols(start, n) += self->grad;
      };
    return out;
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw UsageError("concat_rows: empty");
    Eigen::Index rows = 0, cols = parts[0]->value.cols();
    bool ng = false;
    for (const Var& p : parts) {
      if (p->value.cols() != cols) throw UsageError("concat_rows: col mismatch");
      rows += p->value.rows();
      ng = ng || p->needs_grad;
    }
    MatrixXd v(rows, cols);
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      v.middleRows(at, p->value.rows()) = p->value;
      at += p->value.rows();
    }
    Var out = make(std::move(v), ng, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), parts] {
        Eigen::Index at2 = 0;
        for (const Var& p : parts) {
          if (p->needs_grad) accum(p, self->grad.middleRows(at2, p->value.rows()));
          at2 += p->value.rows();
        }
      };
    return out;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw UsageError("concat_cols: empty");
    Eigen::Index rows = parts[0]->value.rows(), cols = 0;
    bool ng = false;
    for (const Var& p : parts) {
      if (p->value.rows() != rows) throw UsageError("concat_cols: row mismatch");
      cols += p->value.cols();
      ng = ng || p->needs_grad;
    }
    MatrixXd v(rows, cols);
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      v.middleCols(at, p->value.cols()) = p->value;
      at += p->value.cols();
    }
    Var out = make(std::move(v), ng, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), parts] {
        Eigen::Index at2 = 0;
        for (const Var& p : parts) {
          if (p->needs_grad) accum(p, self->grad.middleCols(at2, p->value.cols()));
          at2 += p->value.cols();
        }
      };
    return out;
  }

  // --- nonlinearities -----------------------------------------------------

  Var gelu(const Var& x) {
    const double c = std::sqrt(2.0 / M_PI);
    MatrixXd u = (c * (x->value.array() + 0.044715 * x->value.array().cube())).matrix();
    MatrixXd t = u.array().tanh().matrix();
    MatrixXd y = (0.5 * x->value.array() * (1.0 + t.array())).matrix();
    Var out = make(std::move(y), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, t, c] {
        auto xa = x->value.array();
        auto ta = t.array();
        auto sech2 = 1.0 - ta * ta;
        MatrixXd dydx =
            (0.5 * (1.0 + ta) + 0.5 * xa * sech2 * c * (1.0 + 3.0 * 0.044715 * xa * xa)).matrix();
        accum(x, self->grad.cwiseProduct(dydx));
      };
    return out;
  }

  Var sigmoid(const Var& x) {
    MatrixXd y = (1.0 / (1.0 + (-x->value.array()).exp())).matrix();
    Var out = make(y, x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, y] {
        accum(x, self->grad.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
      };
    return out;
  }

  Var tanh_(const Var& x) {
    MatrixXd y = x->value.array().tanh().matrix();
    Var out = make(y, x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, y] {
        accum(x, self->grad.cwiseProduct((1.0 - y.array() * y.array()).matrix()));
      };
    return out;
  }

  // Inverted dropout; identity when rate == 0.  Deterministic given rng.
  Var dropout(const Var& x, double rate, std::mt19937_64& rng) {
    if (rate <= 0.0) return x;
    if (rate >= 1.0) throw UsageError("dropout rate must be < 1");
    std::bernoulli_distribution keep(1.0 - rate);
    MatrixXd mask(x->value.rows(), x->value.cols());
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        mask(i, j) = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
    Var out = make(x->value.cwiseProduct(mask), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, mask] {
        accum(x, self->grad.cwiseProduct(mask));
      };
    return out;
  }

  // --- row-wise normalizations -------------------------------------------

  // Per-row layer normalization with gain g and bias b, both (1, d).
  Var layernorm(const Var& x, const Var& g, const Var& b, double eps = 1e-5) {
    const Eigen::Index d = x->value.cols();
    if (g->value.cols() != d || b->value.cols() != d || g->value.rows() != 1 ||
        b->value.rows() != 1)
      throw UsageError("layernorm: gain/bias must be (1, d)");
    MatrixXd xhat(x->value.rows(), d);
    Eigen::VectorXd inv_std(x->value.rows());
    for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
      double mean = x->value.row(r).mean();
      double var = (x->value.row(r).array() - mean).square().mean();
      double is = 1.0 / std::sqrt(var + eps);
      inv_std(r) = is;
      xhat.row(r) = ((x->value.row(r).array() - mean) * is).matrix();
    }
    MatrixXd y = xhat.array().rowwise() * g->value.row(0).array();
    y.rowwise() += b->value.row(0);
    Var out = make(std::move(y), x->needs_grad || g->needs_grad || b->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, g, b, xhat, inv_std] {
        const Eigen::Index dd = x->value.cols();
        if (g->needs_grad) accum(g, (self->grad.cwiseProduct(xhat)).colwise().sum());
        if (b->needs_grad) accum(b, self->grad.colwise().sum());
        if (x->needs_grad) {
          MatrixXd dx(x->value.rows(), dd);
          for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
            Eigen::ArrayXd dxhat =
                self->grad.row(r).array() * g->value.row(0).array();
            double sum_dxhat = dxhat.sum();
            double sum_dxhat_xhat = (dxhat * xhat.row(r).transpose().array()).sum();
            dx.row(r) = (inv_std(r) *
                         (dxhat - sum_dxhat / dd - xhat.row(r).transpose().array() * sum_dxhat_xhat / dd))
                            .matrix()
                            .transpose();
          }
          accum(x, dx);
        }
      };
    return out;
  }

  Var softmax_rows(const Var& x) {
    MatrixXd y(x->value.rows(), x->value.cols());
    for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
      Eigen::ArrayXd row = x->value.row(r).transpose().array();
      Eigen::ArrayXd e = (row - row.maxCoeff()).exp();
      y.row(r) = (e / e.sum()).matrix().transpose();
    }
    Var out = make(y, x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, y] {
        MatrixXd dx(y.rows(), y.cols());
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
          double dot = self->grad.row(r).dot(y.row(r));
          dx.row(r) = ((self->grad.row(r).array() - dot) * y.row(r).array()).matrix();
        }
        accum(x, dx);
      };
    return out;
  }

  Var log_softmax_rows(const Var& x) {
    MatrixXd y(x->value.rows(), x->value.cols());
    for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
      Eigen::ArrayXd row = x->value.row(r).transpose().array();
      double mx = row.maxCoeff();
      double lse = mx + std::log((row - mx).exp().sum());
      y.row(r) = (row - lse).matrix().transpose();
    }
    Var out = make(y, x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x, y] {
        MatrixXd dx(y.rows(), y.cols());
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
          double gsum = self->grad.row(r).sum();
          dx.row(r) =
              (self->grad.row(r).array() - y.row(r).array().exp() * gsum).matrix();
        }
        accum(x, dx);
      };
    return out;
  }

  // Adds a learned relative-position bias to square self-attention scores:
  // scores(i, j) += table(head, rel_bucket(j - i, window)).  Offsets within
  // +-window get one exact bucket each; larger offsets share log-spaced
  // buckets out to kRelMaxDistance (clamped beyond), so distant positions
  // stay distinguishable by coarse distance in either direction.
  Var add_rel_bias(const Var& scores, const Var& table, int head, int window) {
    const Eigen::Index T = scores->value.rows();
    if (scores->value.cols() != T) throw UsageError("add_rel_bias: scores must be square");
    if (head < 0 || head >= table->value.rows()) throw UsageError("add_rel_bias: bad head");
    if (table->value.cols() != rel_n_buckets(window))
      throw UsageError("add_rel_bias: table must have rel_n_buckets(window) cols");
    auto bucket = [window](Eigen::Index i, Eigen::Index j) {
      return rel_bucket(static_cast<long>(j) - static_cast<long>(i), window);
    };
    MatrixXd v = scores->value;
    for (Eigen::Index i = 0; i < T; ++i)
      for (Eigen::Index j = 0; j < T; ++j) v(i, j) += table->value(head, bucket(i, j));
    Var out = make(std::move(v), scores->needs_grad || table->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), scores, table, head, bucket, T] {
        if (scores->needs_grad) accum(scores, self->grad);
        if (table->needs_grad) {
          table->ensure_grad();
          for (Eigen::Index i = 0; i < T; ++i)
            for (Eigen::Index j = 0; j < T; ++j)
              table->grad(head, bucket(i, j)) += self->grad(i, j);
        }
      };
    return out;
  }

  // --- reductions / losses ------------------------------------------------

  Var sum_all(const Var& x) {
    Var out = make(MatrixXd::Constant(1, 1, x->value.sum()), x->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), x] {
        x->ensure_grad();
        x->grad.array() += self->grad(0, 0);
      };
    return out;
  }

  // Negative log likelihood: -sum_t logp(t, ids[t]).  logp rows are
  // log-probabilities; ids.size() must equal logp rows.
  Var nll_pick(const Var& logp, const std::vector<int>& ids) {
    if (static_cast<Eigen::Index>(ids.size()) != logp->value.rows())
      throw UsageError("nll_pick: ids length mismatch");
    double total = 0.0;
    for (size_t t = 0; t < ids.size(); ++t) {
      if (ids[t] < 0 || ids[t] >= logp->value.cols())
        throw UsageError("nll_pick: target id out of range");
      total -= logp->value(static_cast<Eigen::Index>(t), ids[t]);
    }
    Var out = make(MatrixXd::Constant(1, 1, total), logp->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), logp, ids] {
        logp->ensure_grad();
        for (size_t t = 0; t < ids.size(); ++t)
          logp->grad(static_cast<Eigen::Index>(t), ids[t]) -= self->grad(0, 0);
      };
    return out;
  }

  // Binary cross-entropy summed over steps; p is (K, 1) of probabilities.
  Var bce_sum(const Var& p, const std::vector<int>& labels, double eps = 1e-12) {
    if (static_cast<Eigen::Index>(labels.size()) != p->value.rows() || p->value.cols() != 1)
      throw UsageError("bce_sum: p must be (K,1) matching labels");
    double total = 0.0;
    for (size_t t = 0; t < labels.size(); ++t) {
      double pt = std::clamp(p->value(static_cast<Eigen::Index>(t), 0), eps, 1.0 - eps);
      total -= labels[t] ? std::log(pt) : std::log(1.0 - pt);
    }
    Var out = make(MatrixXd::Constant(1, 1, total), p->needs_grad, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), p, labels, eps] {
        p->ensure_grad();
        for (size_t t = 0; t < labels.size(); ++t) {
          double raw = p->value(static_cast<Eigen::Index>(t), 0);
          if (raw <= eps || raw >= 1.0 - eps) continue;  // clamped: flat
          double y = labels[t] ? 1.0 : 0.0;
          p->grad(static_cast<Eigen::Index>(t), 0) +=
              self->grad(0, 0) * (raw - y) / (raw * (1.0 - raw));
        }
      };
    return out;
  }

  // Weighted sum of scalars evaluated strictly left to right:
  // ((c0*s0 + c1*s1) + c2*s2) + ...  — the exact association order matters
  // for bit-reproducible loss identities.
  Var linear_comb(const std::vector<Var>& vars, const std::vector<double>& coeffs) {
    if (vars.empty() || vars.size() != coeffs.size())
      throw UsageError("linear_comb: size mismatch");
    bool ng = false;
    double total = 0.0;
    for (size_t i = 0; i < vars.size(); ++i) {
      if (vars[i]->value.rows() != 1 || vars[i]->value.cols() != 1)
        throw UsageError("linear_comb: scalar inputs required");
      total = total + coeffs[i] * vars[i]->value(0, 0);
      ng = ng || vars[i]->needs_grad;
    }
    Var out = make(MatrixXd::Constant(1, 1, total), ng, nullptr);
    if (out->needs_grad)
      out->backward = [self = out.get(), vars, coeffs] {
        for (size_t i = 0; i < vars.size(); ++i)
          if (vars[i]->needs_grad) {
            vars[i]->ensure_grad();
            vars[i]->grad(0, 0) += coeffs[i] * self->grad(0, 0);
          }
      };
    return out;
  }

  // --- sweep --------------------------------------------------------------

  void backward(const Var& root) {
    if (!grad_enabled_) throw UsageError("backward on a forward-only tape");
    if (root->value.rows() != 1 || root->value.cols() != 1)
      throw UsageError("backward: root must be scalar");
    for (const Var& n : order_) n->ensure_grad();
    root->grad(0, 0) += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
      if ((*it)->needs_grad && (*it)->backward) (*it)->backward();
    for (auto& [p, n] : bindings_) {
      if (p->grad.size() == 0) p->zero_grad();
      p->grad += n->grad;
    }
  }

  size_t size() const { return order_.size(); }

 private:
  static void accum(const Var& v, const MatrixXd& g) {
    v->ensure_grad();
    v->grad += g;
  }

  void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
      throw UsageError(std::string(op) + ": shape mismatch");
  }

  Var make(MatrixXd v, bool needs_grad, std::function<void()> back) {
    Var n = std::make_shared<Node>();
    n->value = std::move(v);
    n->needs_grad = needs_grad;
    n->backward = std::move(back);
    order_.push_back(n);
    return n;
  }

  std::vector<Var> order_;
  std::vector<std::pair<Parameter*, Var>> bindings_;
  bool grad_enabled_ = true;
};

}  // namespace kgtext
