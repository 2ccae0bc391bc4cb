#include "quantgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace quantgan::ad {

namespace {

thread_local std::uint64_t g_tape_position = 0;
thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<detail::Node>;

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + what);
    }
  }
}

NodePtr make_node(Shape shape, std::vector<double> value) {
  auto node = std::make_shared<detail::Node>();
  node->position = ++g_tape_position;
  node->shape = std::move(shape);
  node->value = std::move(value);
  return node;
}

// Creates an op result. When recording is on and any parent needs a gradient,
// the node keeps its parents and adjoint rule; otherwise it is a plain leaf.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<NodePtr> parents, std::function<void(detail::Node&)> rule) {
  check_finite(value, op);
  auto node = make_node(std::move(shape), std::move(value));
  const bool needs_grad =
      g_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                    [](const NodePtr& p) { return p && p->requires_grad; });
  if (needs_grad) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(rule);
  }
  return Tensor(std::move(node));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor argument");
}

// Accumulates g into the parent's adjoint if it participates in differentiation.
template <typename F>
void accumulate(const NodePtr& parent, F&& fill) {
  if (!parent || !parent->requires_grad) return;
  fill(parent->ensure_adjoint());
}

// Elementwise unary op with derivative expressed from input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  require_defined(x, op);
  const auto in = x.data();
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), fwd);
  NodePtr px = x.node();
  return make_result(op, x.shape(), std::move(out), {px}, [px, deriv](detail::Node& self) {
    accumulate(px, [&](std::vector<double>& gx) {
      for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] += self.adjoint[i] * deriv(px->value[i], self.value[i]);
      }
    });
  });
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::vector<double>& detail::Node::ensure_adjoint() {
  if (adjoint.empty()) adjoint.assign(value.size(), 0.0);
  return adjoint;
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (ad::numel(shape) != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_string(shape));
  }
  check_finite(data, "tensor construction");
  auto node = make_node(std::move(shape), std::move(data));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = ad::numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::extent(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw ShapeError("axis out of range for " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return node_ ? node_->value.size() : 0; }

std::span<const double> Tensor::data() const {
  require_defined(*this, "data");
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  require_defined(*this, "mutable_data");
  if (!node_->is_leaf()) throw std::logic_error("mutable_data on a non-leaf tensor");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  require_defined(*this, "set_requires_grad");
  if (!node_->is_leaf()) throw std::logic_error("set_requires_grad on a non-leaf tensor");
  node_->requires_grad = flag;
}

bool Tensor::is_leaf() const { return node_ && node_->is_leaf(); }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  require_defined(*this, "grad");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::detach() const {
  require_defined(*this, "detach");
  return from(node_->shape, node_->value, false);
}

Tensor Tensor::clone() const {
  require_defined(*this, "clone");
  return from(node_->shape, node_->value, node_->requires_grad);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
EnableGradGuard::EnableGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = true; }
EnableGradGuard::~EnableGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Convolution and affine maps

Tensor dilated_causal_conv(const Tensor& X, const Tensor& W, const Tensor& bias,
                           std::size_t dilation) {
  require_defined(X, "dilated_causal_conv");
  require_defined(W, "dilated_causal_conv");
  if (dilation == 0) throw ShapeError("dilated_causal_conv: dilation must be positive");
  if (W.rank() != 3) throw ShapeError("dilated_causal_conv: weight must be [K x N_I x N_O]");
  if (X.rank() != 2 && X.rank() != 3) {
    throw ShapeError("dilated_causal_conv: input must be [N_I x T] or [B x N_I x T]");
  }
  const bool batched = X.rank() == 3;
  const std::size_t B = batched ? X.extent(0) : 1;
  const std::size_t NI = X.extent(batched ? 1 : 0);
  const std::size_t T = X.extent(batched ? 2 : 1);
  const std::size_t K = W.extent(0);
  const std::size_t NO = W.extent(2);
  if (W.extent(1) != NI) {
    throw ShapeError("dilated_causal_conv: weight " + shape_string(W.shape()) +
                     " incompatible with input " + shape_string(X.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.extent(0) != NO)) {
    throw ShapeError("dilated_causal_conv: bias must be [N_O]");
  }
  if (K == 0) throw ShapeError("dilated_causal_conv: kernel size must be positive");
  const std::size_t span = dilation * (K - 1);
  if (T < span + 1) {
    throw ShapeError("dilated_causal_conv: input length " + std::to_string(T) +
                     " shorter than receptive window " + std::to_string(span + 1));
  }
  const std::size_t To = T - span;

  const auto x = X.data();
  const auto w = W.data();
  std::vector<double> out(B * NO * To, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t m = 0; m < NO; ++m) {
      double* orow = out.data() + (b * NO + m) * To;
      // Taps accumulate in (i, j) order and the bias is added last, so results
      // are reproducible against a plain double sum.
      for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < NI; ++j) {
          const double wij = w[(i * NI + j) * NO + m];
          const double* xrow = x.data() + (b * NI + j) * T + dilation * i;
          for (std::size_t o = 0; o < To; ++o) orow[o] += wij * xrow[o];
        }
      }
      if (bias.defined()) {
        const double bm = bias.data()[m];
        for (std::size_t o = 0; o < To; ++o) orow[o] += bm;
      }
    }
  }

  Shape out_shape = batched ? Shape{B, NO, To} : Shape{NO, To};
  NodePtr px = X.node(), pw = W.node(), pb = bias.defined() ? bias.node() : nullptr;
  return make_result(
      "dilated_causal_conv", std::move(out_shape), std::move(out), {px, pw, pb},
      [=](detail::Node& self) {
        const auto& g = self.adjoint;
        accumulate(px, [&](std::vector<double>& gx) {
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t m = 0; m < NO; ++m) {
              const double* grow = g.data() + (b * NO + m) * To;
              for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < NI; ++j) {
                  const double wij = pw->value[(i * NI + j) * NO + m];
                  double* gxrow = gx.data() + (b * NI + j) * T + dilation * i;
                  for (std::size_t o = 0; o < To; ++o) gxrow[o] += wij * grow[o];
                }
            }
        });
        accumulate(pw, [&](std::vector<double>& gw) {
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t m = 0; m < NO; ++m) {
              const double* grow = g.data() + (b * NO + m) * To;
              for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < NI; ++j) {
                  const double* xrow = px->value.data() + (b * NI + j) * T + dilation * i;
                  double acc = 0.0;
                  for (std::size_t o = 0; o < To; ++o) acc += grow[o] * xrow[o];
                  gw[(i * NI + j) * NO + m] += acc;
                }
            }
        });
        accumulate(pb, [&](std::vector<double>& gb) {
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t m = 0; m < NO; ++m) {
              const double* grow = g.data() + (b * NO + m) * To;
              gb[m] += std::accumulate(grow, grow + To, 0.0);
            }
        });
      });
}

Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b) {
  require_defined(x, "affine");
  require_defined(W, "affine");
  require_defined(b, "affine");
  if (W.rank() != 2) throw ShapeError("affine: weight must be [N_out x N_in]");
  const std::size_t NOut = W.extent(0), NIn = W.extent(1);
  if (b.rank() != 1 || b.extent(0) != NOut) throw ShapeError("affine: bias must be [N_out]");
  if (x.rank() != 1 && x.rank() != 2) throw ShapeError("affine: input must be [N] or [B x N]");
  const bool batched = x.rank() == 2;
  const std::size_t B = batched ? x.extent(0) : 1;
  if (x.extent(batched ? 1 : 0) != NIn) {
    throw ShapeError("affine: input " + shape_string(x.shape()) + " incompatible with weight " +
                     shape_string(W.shape()));
  }
  const auto xv = x.data();
  const auto wv = W.data();
  const auto bv = b.data();
  std::vector<double> out(B * NOut);
  for (std::size_t s = 0; s < B; ++s)
    for (std::size_t r = 0; r < NOut; ++r) {
      double acc = bv[r];
      for (std::size_t c = 0; c < NIn; ++c) acc += wv[r * NIn + c] * xv[s * NIn + c];
      out[s * NOut + r] = acc;
    }
  Shape out_shape = batched ? Shape{B, NOut} : Shape{NOut};
  NodePtr px = x.node(), pw = W.node(), pb = b.node();
  return make_result("affine", std::move(out_shape), std::move(out), {px, pw, pb},
                     [=](detail::Node& self) {
                       const auto& g = self.adjoint;
                       accumulate(px, [&](std::vector<double>& gx) {
                         for (std::size_t s = 0; s < B; ++s)
                           for (std::size_t r = 0; r < NOut; ++r)
                             for (std::size_t c = 0; c < NIn; ++c)
                               gx[s * NIn + c] += pw->value[r * NIn + c] * g[s * NOut + r];
                       });
                       accumulate(pw, [&](std::vector<double>& gw) {
                         for (std::size_t s = 0; s < B; ++s)
                           for (std::size_t r = 0; r < NOut; ++r)
                             for (std::size_t c = 0; c < NIn; ++c)
                               gw[r * NIn + c] += g[s * NOut + r] * px->value[s * NIn + c];
                       });
                       accumulate(pb, [&](std::vector<double>& gb) {
                         for (std::size_t s = 0; s < B; ++s)
                           for (std::size_t r = 0; r < NOut; ++r) gb[r] += g[s * NOut + r];
                       });
                     });
}

// ---------------------------------------------------------------------------
// Activations

Tensor prelu(const Tensor& x, const Tensor& slope) {
  require_defined(x, "prelu");
  require_defined(slope, "prelu");
  if (slope.numel() != 1) throw ShapeError("prelu: slope must have a single element");
  const double a = slope.data()[0];
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : a * in[i];
  NodePtr px = x.node(), pa = slope.node();
  return make_result("prelu", x.shape(), std::move(out), {px, pa}, [=](detail::Node& self) {
    const auto& g = self.adjoint;
    const double slope_value = pa->value[0];
    accumulate(px, [&](std::vector<double>& gx) {
      for (std::size_t i = 0; i < gx.size(); ++i)
        gx[i] += g[i] * (px->value[i] > 0.0 ? 1.0 : slope_value);
    });
    accumulate(pa, [&](std::vector<double>& ga) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (px->value[i] <= 0.0) acc += g[i] * px->value[i];
      ga[0] += acc;
    });
  });
}

Tensor prelu_tangent(const Tensor& dx, const Tensor& x, const Tensor& slope) {
  require_defined(dx, "prelu_tangent");
  require_same_shape(dx, x, "prelu_tangent");
  if (slope.numel() != 1) throw ShapeError("prelu_tangent: slope must have a single element");
  const double a = slope.data()[0];
  const auto d = dx.data();
  const auto p = x.data();
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = p[i] > 0.0 ? d[i] : a * d[i];
  NodePtr pd = dx.node(), pp = x.node(), pa = slope.node();
  return make_result(
      "prelu_tangent", dx.shape(), std::move(out), {pd, pa}, [=](detail::Node& self) {
        const auto& g = self.adjoint;
        const double slope_value = pa->value[0];
        accumulate(pd, [&](std::vector<double>& gd) {
          for (std::size_t i = 0; i < gd.size(); ++i)
            gd[i] += g[i] * (pp->value[i] > 0.0 ? 1.0 : slope_value);
        });
        accumulate(pa, [&](std::vector<double>& ga) {
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i)
            if (pp->value[i] <= 0.0) acc += g[i] * pd->value[i];
          ga[0] += acc;
        });
      });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  NodePtr pa = a.node(), pb = b.node();
  return make_result("add", a.shape(), std::move(out), {pa, pb}, [=](detail::Node& self) {
    accumulate(pa, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.adjoint[i];
    });
    accumulate(pb, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.adjoint[i];
    });
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  NodePtr pa = a.node(), pb = b.node();
  return make_result("sub", a.shape(), std::move(out), {pa, pb}, [=](detail::Node& self) {
    accumulate(pa, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.adjoint[i];
    });
    accumulate(pb, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.adjoint[i];
    });
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  NodePtr pa = a.node(), pb = b.node();
  return make_result("mul", a.shape(), std::move(out), {pa, pb}, [=](detail::Node& self) {
    accumulate(pa, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.adjoint[i] * pb->value[i];
    });
    accumulate(pb, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.adjoint[i] * pa->value[i];
    });
  });
}

Tensor scalar_mul(const Tensor& x, double c) {
  return unary(
      "scalar_mul", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary(
      "add_scalar", x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  require_defined(x, "log");
  for (double v : x.data()) {
    if (!(v > 0.0)) throw std::domain_error("log of non-positive value");
  }
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double in, double) { return 1.0 / in; });
}

Tensor clamped_log(const Tensor& x, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("clamped_log: floor must be positive");
  return unary(
      "clamped_log", x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double in, double) { return in > floor ? 1.0 / in : 0.0; });
}

Tensor abs(const Tensor& x) {
  return unary(
      "abs", x, [](double v) { return std::fabs(v); },
      [](double in, double) { return in > 0.0 ? 1.0 : (in < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary(
      "square", x, [](double v) { return v * v; }, [](double in, double) { return 2.0 * in; });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  const auto in = x.data();
  const double total = std::accumulate(in.begin(), in.end(), 0.0);
  NodePtr px = x.node();
  return make_result("sum", Shape{1}, {total}, {px}, [=](detail::Node& self) {
    accumulate(px, [&](std::vector<double>& g) {
      for (double& v : g) v += self.adjoint[0];
    });
  });
}

Tensor mean(const Tensor& x) {
  require_defined(x, "mean");
  if (x.numel() == 0) throw ShapeError("mean of empty tensor");
  return scalar_mul(sum(x), 1.0 / static_cast<double>(x.numel()));
}

// ---------------------------------------------------------------------------
// Indexing

Tensor slice_time(const Tensor& x, std::size_t start, std::size_t length) {
  require_defined(x, "slice_time");
  if (x.rank() == 0) throw ShapeError("slice_time on rank-0 tensor");
  const std::size_t T = x.shape().back();
  if (start + length > T) {
    throw ShapeError("slice_time: [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") exceeds length " + std::to_string(T));
  }
  const std::size_t rows = x.numel() / T;
  std::vector<double> out(rows * length);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(in.data() + r * T + start, length, out.data() + r * length);
  Shape out_shape = x.shape();
  out_shape.back() = length;
  NodePtr px = x.node();
  return make_result("slice_time", std::move(out_shape), std::move(out), {px},
                     [=](detail::Node& self) {
                       accumulate(px, [&](std::vector<double>& g) {
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t t = 0; t < length; ++t)
                             g[r * T + start + t] += self.adjoint[r * length + t];
                       });
                     });
}

Tensor channel(const Tensor& x, std::size_t index) {
  require_defined(x, "channel");
  if (x.rank() != 2 && x.rank() != 3) throw ShapeError("channel: expects [C x T] or [B x C x T]");
  const bool batched = x.rank() == 3;
  const std::size_t B = batched ? x.extent(0) : 1;
  const std::size_t C = x.extent(batched ? 1 : 0);
  const std::size_t T = x.extent(batched ? 2 : 1);
  if (index >= C) throw ShapeError("channel: index out of range");
  std::vector<double> out(B * T);
  const auto in = x.data();
  for (std::size_t b = 0; b < B; ++b)
    std::copy_n(in.data() + (b * C + index) * T, T, out.data() + b * T);
  Shape out_shape = batched ? Shape{B, 1, T} : Shape{1, T};
  NodePtr px = x.node();
  return make_result("channel", std::move(out_shape), std::move(out), {px},
                     [=](detail::Node& self) {
                       accumulate(px, [&](std::vector<double>& g) {
                         for (std::size_t b = 0; b < B; ++b)
                           for (std::size_t t = 0; t < T; ++t)
                             g[(b * C + index) * T + t] += self.adjoint[b * T + t];
                       });
                     });
}

// ---------------------------------------------------------------------------
// Reverse sweep

namespace {

// Reachable nodes that participate in differentiation, in reverse tape order.
std::vector<detail::Node*> reverse_tape(const NodePtr& root) {
  std::vector<detail::Node*> order;
  std::unordered_set<const detail::Node*> seen;
  std::vector<detail::Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const detail::Node* a, const detail::Node* b) { return a->position > b->position; });
  return order;
}

std::vector<detail::Node*> sweep(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_string(loss.shape()));
  }
  check_finite(loss.data(), "backward loss");
  auto order = reverse_tape(loss.node());
  loss.node()->ensure_adjoint()[0] = 1.0;
  for (detail::Node* n : order) {
    if (n->adjoint.empty()) continue;
    check_finite(n->adjoint, "backward adjoint");
    if (n->backward) n->backward(*n);
  }
  return order;
}

}  // namespace

void backward(const Tensor& loss) {
  if (!loss.requires_grad()) return;
  auto order = sweep(loss);
  for (detail::Node* n : order) {
    if (n->is_leaf() && n->requires_grad && !n->adjoint.empty()) {
      if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
      for (std::size_t i = 0; i < n->grad.size(); ++i) n->grad[i] += n->adjoint[i];
    }
    n->adjoint.clear();
  }
}

std::vector<std::vector<double>> gradients(const Tensor& loss, std::span<const Tensor> inputs) {
  std::vector<std::vector<double>> result;
  result.reserve(inputs.size());
  if (!loss.requires_grad()) {
    for (const auto& in : inputs) result.emplace_back(in.numel(), 0.0);
    return result;
  }
  auto order = sweep(loss);
  for (const auto& in : inputs) {
    const auto& adj = in.node()->adjoint;
    result.push_back(adj.empty() ? std::vector<double>(in.numel(), 0.0) : adj);
  }
  for (detail::Node* n : order) n->adjoint.clear();
  return result;
}

}  // namespace quantgan::ad
