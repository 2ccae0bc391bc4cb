#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "quantgan/autodiff.hpp"

namespace quantgan {

struct NelderMeadOptions {
  /// Stop once the best value improves by less than tolerance * max(1, |f|)
  /// across one full simplex cycle (n + 1 iterations) and the spread of values
  /// over the simplex is below the same threshold.
  double tolerance = 1e-9;
  std::size_t max_iterations = 2000;
  /// Restarts from the best vertex after a convergence signal.
  std::size_t restarts = 1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Derivative-free minimization. Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, std::span<const double> initial_steps,
                             const NelderMeadOptions& options = {});

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

/// Adaptive moment estimation over a fixed list of leaf tensors.
class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, AdamOptions options);

  /// Applies one descent step using each parameter's accumulated grad.
  /// Parameters without a grad are treated as having zero gradient.
  void step();
  void zero_grad();
  std::size_t steps() const { return step_count_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<ad::Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::size_t step_count_ = 0;
};

}  // namespace quantgan
