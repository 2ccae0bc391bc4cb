#pragma once

// Minimal define-by-run reverse-mode differentiation over dense float64 tensors.
//
// Every tensor produced by an op while gradient recording is enabled keeps a
// reference to its inputs and an adjoint rule. Nodes are stamped with a
// monotonically increasing tape position at creation, so replaying adjoints in
// descending position order is a valid reverse topological order.
//
// A tensor graph is confined to one thread for a forward/backward cycle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace quantgan::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised whenever a NaN or infinity is produced in a forward value or adjoint.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Node {
  std::uint64_t position = 0;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;     // accumulated leaf gradient, empty until populated
  std::vector<double> adjoint;  // scratch during a backward pass
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads self.adjoint and accumulates into parents' adjoints.
  std::function<void(Node& self)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<double>& ensure_adjoint();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct access for leaves (parameter updates, initialization).
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  /// A new leaf holding a copy of the values, disconnected from any graph.
  Tensor detach() const;
  /// A new leaf with a copy of values and the same requires_grad flag.
  Tensor clone() const;

  // Internal construction hook for ops.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Re-enables recording inside a no-grad region, for computations that need
/// an input gradient as a value.
class EnableGradGuard {
 public:
  EnableGradGuard();
  ~EnableGradGuard();
  EnableGradGuard(const EnableGradGuard&) = delete;
  EnableGradGuard& operator=(const EnableGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---------------------------------------------------------------------------
// Ops

/// Dilated causal convolution. X is [N_I x T] or batched [B x N_I x T];
/// W is [K x N_I x N_O]; bias is [N_O] or an undefined tensor for no bias.
/// Output time length is T - D(K-1); output step o reads input steps o + D*i for
/// kernel taps i = 0..K-1 (tap K-1 is the current step, tap 0 the oldest).
Tensor dilated_causal_conv(const Tensor& X, const Tensor& W, const Tensor& bias,
                           std::size_t dilation);

/// W x + b. x is [N_in] or batched [B x N_in]; W is [N_out x N_in]; b is [N_out].
Tensor affine(const Tensor& x, const Tensor& W, const Tensor& b);

/// x where x >= 0, slope * x elsewhere. slope has one element.
/// The adjoint at exactly 0 uses the slope (left limit).
Tensor prelu(const Tensor& x, const Tensor& slope);

/// Tangent map of prelu at primal point x applied to direction dx.
/// Differentiable with respect to dx and slope; the primal only selects the branch.
Tensor prelu_tangent(const Tensor& dx, const Tensor& x, const Tensor& slope);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
/// log(max(x, floor)); the adjoint is zero where the clamp is active.
Tensor clamped_log(const Tensor& x, double floor);
/// Adjoint at 0 is 0.
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Keeps `length` steps of the last axis starting at `start`.
Tensor slice_time(const Tensor& x, std::size_t start, std::size_t length);
/// Keeps a single channel (axis rank-2) of a [C x T] or [B x C x T] tensor.
Tensor channel(const Tensor& x, std::size_t index);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return scalar_mul(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return scalar_mul(a, c); }

// ---------------------------------------------------------------------------
// Differentiation

/// Accumulates d(loss)/d(leaf) into the grad of every reachable leaf with
/// requires_grad set.
void backward(const Tensor& loss);

/// Returns d(loss)/d(input) for each input without touching any stored grads.
/// Inputs that do not influence the loss get a zero gradient.
std::vector<std::vector<double>> gradients(const Tensor& loss, std::span<const Tensor> inputs);

}  // namespace quantgan::ad
