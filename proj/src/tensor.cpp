#include "gdp/tensor.hpp"

#include <cmath>
#include <utility>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace gdp::num {

namespace {

// Tape chunks allocate and free many multi-megabyte intermediates per epoch.
// glibc serves those with mmap and returns them to the kernel on free, which
// makes the allocator the bottleneck; raising the thresholds keeps the blocks
// on the arena for reuse.
#if defined(__GLIBC__)
const bool g_malloc_tuned = [] {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return true;
}();
#endif

thread_local Tape* g_active_tape = nullptr;

bool any_requires_grad(const std::vector<Tensor>& inputs) {
  for (const auto& t : inputs)
    if (t.requires_grad()) return true;
  return false;
}

// Accumulate g into the node's grad buffer (allocating on first touch).
template <typename Expr>
void accum(const std::shared_ptr<TensorNode>& n, const Expr& g) {
  if (!n->requires_grad) return;
  if (n->grad.size() == 0) n->grad = Mat::Zero(n->value.rows(), n->value.cols());
  n->grad += g;
  n->has_grad = true;
}

void check(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

Tensor make_op_output(Mat value, const std::vector<Tensor>& inputs) {
  auto node = std::make_shared<TensorNode>();
  node->value = std::move(value);
  node->requires_grad = g_active_tape != nullptr && any_requires_grad(inputs);
  return Tensor(std::move(node));
}

Tensor Tensor::constant(Mat v) {
  auto node = std::make_shared<TensorNode>();
  node->value = std::move(v);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Tensor Tensor::param(Mat v, std::string name) {
  auto node = std::make_shared<TensorNode>();
  node->value = std::move(v);
  node->requires_grad = true;
  node->name = std::move(name);
  return Tensor(std::move(node));
}

Mat& Tensor::grad() {
  if (node_->grad.size() == 0)
    node_->grad = Mat::Zero(node_->value.rows(), node_->value.cols());
  node_->has_grad = true;
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_ && node_->grad.size() != 0) node_->grad.setZero();
  if (node_) node_->has_grad = false;
}

Tape::Tape() = default;
Tape::~Tape() = default;

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::function<void()> bw) {
  check(!consumed_, "tape: cannot record on a consumed tape");
  records_.push_back(std::move(bw));
}

void Tape::backward(const Tensor& loss) {
  check(!consumed_, "tape: backward on a consumed tape");
  check(loss.defined() && loss.rows() == 1 && loss.cols() == 1,
        "tape: backward requires a scalar (1x1) loss");
  check(loss.requires_grad(), "tape: loss does not depend on any parameter");
  consumed_ = true;
  loss.node()->grad = Mat::Ones(1, 1);
  loss.node()->has_grad = true;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
  records_.clear();
}

TapeScope::TapeScope(Tape& t) : prev_(g_active_tape) { g_active_tape = &t; }
TapeScope::~TapeScope() { g_active_tape = prev_; }

// ---- op helpers ------------------------------------------------------------

namespace {

// Record a backward closure when the output tracks gradients.
void maybe_record(const Tensor& out, std::function<void()> bw) {
  if (out.requires_grad()) g_active_tape->record(std::move(bw));
}

bool same_shape(const Tensor& a, const Tensor& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tensor out = make_op_output(a.value() * b.value(), {a, b});
  maybe_record(out, [an = a.shared(), bn = b.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    if (an->requires_grad) accum(an, on->grad * bn->value.transpose());
    if (bn->requires_grad) accum(bn, an->value.transpose() * on->grad);
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool bias_row = b.rows() == 1 && b.cols() == a.cols() && a.rows() != 1;
  check(same_shape(a, b) || bias_row, "add: shape mismatch");
  Mat v = bias_row ? Mat(a.value().rowwise() + b.value().row(0))
                   : Mat(a.value() + b.value());
  Tensor out = make_op_output(std::move(v), {a, b});
  maybe_record(out, [an = a.shared(), bn = b.shared(), on = out.shared(), bias_row] {
    if (!on->has_grad) return;
    if (an->requires_grad) accum(an, on->grad);
    if (bn->requires_grad) {
      if (bias_row)
        accum(bn, on->grad.colwise().sum());
      else
        accum(bn, on->grad);
    }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check(same_shape(a, b), "sub: shape mismatch");
  Tensor out = make_op_output(a.value() - b.value(), {a, b});
  maybe_record(out, [an = a.shared(), bn = b.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    if (an->requires_grad) accum(an, on->grad);
    if (bn->requires_grad) accum(bn, -on->grad);
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  // Same shape, or one operand an r x 1 column broadcast across the other.
  if (same_shape(a, b)) {
    Tensor out = make_op_output(a.value().cwiseProduct(b.value()), {a, b});
    maybe_record(out, [an = a.shared(), bn = b.shared(), on = out.shared()] {
      if (!on->has_grad) return;
      if (an->requires_grad) accum(an, on->grad.cwiseProduct(bn->value));
      if (bn->requires_grad) accum(bn, on->grad.cwiseProduct(an->value));
    });
    return out;
  }
  const Tensor* col = nullptr;
  const Tensor* full = nullptr;
  if (a.cols() == 1 && a.rows() == b.rows()) {
    col = &a;
    full = &b;
  } else if (b.cols() == 1 && b.rows() == a.rows()) {
    col = &b;
    full = &a;
  }
  check(col != nullptr, "mul: shape mismatch");
  Mat v = (full->value().array().colwise() * col->value().col(0).array()).matrix();
  Tensor out = make_op_output(std::move(v), {a, b});
  maybe_record(out, [cn = col->shared(), fn = full->shared(), on = out.shared()] {
    if (!on->has_grad) return;
    if (fn->requires_grad)
      accum(fn, (on->grad.array().colwise() * cn->value.col(0).array()).matrix());
    if (cn->requires_grad)
      accum(cn, on->grad.cwiseProduct(fn->value).rowwise().sum());
  });
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = make_op_output(a.value() * c, {a});
  maybe_record(out, [an = a.shared(), on = out.shared(), c] {
    if (!on->has_grad) return;
    accum(an, on->grad * c);
  });
  return out;
}

Tensor scale(const Tensor& a, const Tensor& s) {
  check(s.rows() == 1 && s.cols() == 1, "scale: scale factor must be 1x1");
  Tensor out = make_op_output(a.value() * s.value()(0, 0), {a, s});
  maybe_record(out, [an = a.shared(), sn = s.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    if (an->requires_grad) accum(an, on->grad * sn->value(0, 0));
    if (sn->requires_grad) {
      Mat g(1, 1);
      g(0, 0) = on->grad.cwiseProduct(an->value).sum();
      accum(sn, g);
    }
  });
  return out;
}

Tensor sum_all(const Tensor& a) {
  Mat v(1, 1);
  v(0, 0) = a.value().sum();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, Mat::Constant(an->value.rows(), an->value.cols(), on->grad(0, 0)));
  });
  return out;
}

Tensor row_sum(const Tensor& a) {
  Mat v = a.value().rowwise().sum();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, on->grad.col(0).replicate(1, an->value.cols()));
  });
  return out;
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  check(same_shape(pred, target), "mse: shape mismatch");
  const double n = static_cast<double>(pred.value().size());
  Mat v(1, 1);
  v(0, 0) = (pred.value() - target.value()).squaredNorm() / n;
  Tensor out = make_op_output(std::move(v), {pred, target});
  maybe_record(out, [pn = pred.shared(), tn = target.shared(), on = out.shared(), n] {
    if (!on->has_grad) return;
    const double c = 2.0 * on->grad(0, 0) / n;
    if (pn->requires_grad) accum(pn, (pn->value - tn->value) * c);
    if (tn->requires_grad) accum(tn, (tn->value - pn->value) * c);
  });
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  check(a.rows() == b.rows(), "concat_cols: row count mismatch");
  Mat v(a.rows(), a.cols() + b.cols());
  v.leftCols(a.cols()) = a.value();
  v.rightCols(b.cols()) = b.value();
  Tensor out = make_op_output(std::move(v), {a, b});
  maybe_record(out, [an = a.shared(), bn = b.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    const Eigen::Index ca = an->value.cols();
    if (an->requires_grad) accum(an, on->grad.leftCols(ca));
    if (bn->requires_grad) accum(bn, on->grad.rightCols(on->grad.cols() - ca));
  });
  return out;
}

Tensor slice_cols(const Tensor& a, Eigen::Index c0, Eigen::Index c1) {
  check(0 <= c0 && c0 < c1 && c1 <= a.cols(), "slice_cols: bad column range");
  Tensor out = make_op_output(a.value().middleCols(c0, c1 - c0), {a});
  maybe_record(out, [an = a.shared(), on = out.shared(), c0, c1] {
    if (!on->has_grad) return;
    if (!an->requires_grad) return;
    if (an->grad.size() == 0)
      an->grad = Mat::Zero(an->value.rows(), an->value.cols());
    an->grad.middleCols(c0, c1 - c0) += on->grad;
    an->has_grad = true;
  });
  return out;
}

Tensor reshape(const Tensor& a, Eigen::Index r, Eigen::Index c) {
  check(r * c == a.value().size(), "reshape: element count mismatch");
  // Row-major storage, so the flat order is preserved by a plain remap.
  Mat v = Eigen::Map<const Mat>(a.value().data(), r, c);
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, Eigen::Map<const Mat>(on->grad.data(), an->value.rows(),
                                    an->value.cols()));
  });
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out = make_op_output(a.value().transpose(), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, on->grad.transpose());
  });
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = make_op_output(a.value().cwiseMax(0.0), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, ((on->value.array() > 0.0).cast<double>() * on->grad.array()).matrix());
  });
  return out;
}

Tensor tanh_act(const Tensor& a) {
  // tanh(x) = 1 - 2/(exp(2x) + 1). Eigen vectorizes exp for doubles but not
  // tanh, and this layer dominates the training profile. Clamping at +-19
  // keeps exp finite; there tanh is already 1 to the last ulp.
  const auto clamped = a.value().array().cwiseMax(-19.0).cwiseMin(19.0);
  Mat v = (1.0 - 2.0 / ((2.0 * clamped).exp() + 1.0)).matrix();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, ((1.0 - on->value.array().square()) * on->grad.array()).matrix());
  });
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Mat v = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    accum(an, (on->value.array() * (1.0 - on->value.array()) * on->grad.array()).matrix());
  });
  return out;
}

Tensor softsign(const Tensor& a) {
  Mat v = (a.value().array() / (1.0 + a.value().array().abs())).matrix();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    // y = x/(1+|x|) has dy/dx = (1-|y|)^2, recoverable from the output alone.
    accum(an, ((1.0 - on->value.array().abs()).square() * on->grad.array()).matrix());
  });
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  Mat v = (a.value().colwise() - a.value().rowwise().maxCoeff()).array().exp().matrix();
  Vec sums = v.rowwise().sum();
  v.array().colwise() /= sums.array();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared()] {
    if (!on->has_grad) return;
    Vec rs = on->grad.cwiseProduct(on->value).rowwise().sum();
    accum(an, ((on->grad.array().colwise() - rs.array()) * on->value.array()).matrix());
  });
  return out;
}

Tensor rsqrt_floor(const Tensor& a, double eps) {
  check(eps > 0.0, "rsqrt_floor: eps must be positive");
  Mat v = a.value().cwiseMax(eps).array().rsqrt().matrix();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared(), eps] {
    if (!on->has_grad) return;
    auto mask = (an->value.array() > eps).cast<double>();
    accum(an, (mask * (-0.5) * on->value.array().cube() * on->grad.array()).matrix());
  });
  return out;
}

Tensor recip_floor(const Tensor& a, double eps) {
  check(eps > 0.0, "recip_floor: eps must be positive");
  Mat v = a.value().cwiseMax(eps).array().inverse().matrix();
  Tensor out = make_op_output(std::move(v), {a});
  maybe_record(out, [an = a.shared(), on = out.shared(), eps] {
    if (!on->has_grad) return;
    auto mask = (an->value.array() > eps).cast<double>();
    accum(an, (mask * (-1.0) * on->value.array().square() * on->grad.array()).matrix());
  });
  return out;
}

Tensor edge_aggregate(const Tensor& w, const Tensor& e, Eigen::Index n_nodes) {
  const Eigen::Index n = n_nodes;
  check(w.rows() == n && w.cols() == n, "edge_aggregate: W must be n x n");
  check(e.rows() % (n * n) == 0, "edge_aggregate: E rows not a multiple of n^2");
  const Eigen::Index batches = e.rows() / (n * n);
  const Eigen::Index d = e.cols();
  Mat v(batches * n, d);
  for (Eigen::Index t = 0; t < batches; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      v.row(t * n + i).noalias() =
          w.value().row(i) * e.value().middleRows(t * n * n + i * n, n);
  Tensor out = make_op_output(std::move(v), {w, e});
  maybe_record(out, [wn = w.shared(), en = e.shared(), on = out.shared(), n,
                     batches] {
    if (!on->has_grad) return;
    if (wn->requires_grad && wn->grad.size() == 0)
      wn->grad = Mat::Zero(n, n);
    if (en->requires_grad && en->grad.size() == 0)
      en->grad = Mat::Zero(en->value.rows(), en->value.cols());
    for (Eigen::Index t = 0; t < batches; ++t)
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto gout = on->grad.row(t * n + i);
        const Eigen::Index base = t * n * n + i * n;
        if (wn->requires_grad)
          wn->grad.row(i).noalias() +=
              gout * en->value.middleRows(base, n).transpose();
        if (en->requires_grad)
          en->grad.middleRows(base, n).noalias() +=
              wn->value.row(i).transpose() * gout;
      }
    if (wn->requires_grad) wn->has_grad = true;
    if (en->requires_grad) en->has_grad = true;
  });
  return out;
}

Tensor pair_concat(const Tensor& z, Eigen::Index n_nodes) {
  const Eigen::Index n = n_nodes;
  check(z.rows() % n == 0, "pair_concat: Z rows not a multiple of n");
  const Eigen::Index batches = z.rows() / n;
  const Eigen::Index d = z.cols();
  Mat v(batches * n * n, 2 * d);
  for (Eigen::Index t = 0; t < batches; ++t)
    for (Eigen::Index i = 0; i < n; ++i) {
      auto block = v.middleRows(t * n * n + i * n, n);
      block.leftCols(d) = z.value().row(t * n + i).replicate(n, 1);
      block.rightCols(d) = z.value().middleRows(t * n, n);
    }
  Tensor out = make_op_output(std::move(v), {z});
  maybe_record(out, [zn = z.shared(), on = out.shared(), n, batches, d] {
    if (!on->has_grad) return;
    if (zn->grad.size() == 0)
      zn->grad = Mat::Zero(zn->value.rows(), zn->value.cols());
    for (Eigen::Index t = 0; t < batches; ++t)
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto gblock = on->grad.middleRows(t * n * n + i * n, n);
        zn->grad.row(t * n + i) += gblock.leftCols(d).colwise().sum();
        zn->grad.middleRows(t * n, n) += gblock.rightCols(d);
      }
    zn->has_grad = true;
  });
  return out;
}

}  // namespace gdp::num
