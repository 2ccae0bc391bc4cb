#include "quantgan/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace quantgan {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double safe_eval(const std::function<double(std::span<const double>)>& f,
                 std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, std::span<const double> initial_steps,
                             const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");
  if (initial_steps.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");

  NelderMeadResult result;
  result.x = std::move(start);
  result.value = safe_eval(objective, result.x);
  std::size_t restarts_left = options.restarts;

  while (true) {
    std::vector<std::vector<double>> simplex(n + 1, result.x);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += initial_steps[i];
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(objective, simplex[i]);

    std::vector<std::size_t> order(n + 1);
    double cycle_start_best = std::numeric_limits<double>::infinity();
    std::size_t cycle_counter = 0;
    bool signalled = false;

    while (result.iterations < options.max_iterations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

      if (cycle_counter == 0) cycle_start_best = values[best];
      if (++cycle_counter > n + 1) {
        const double scale = std::max(1.0, std::fabs(values[best]));
        const double spread = values[worst] - values[best];
        if (std::isfinite(values[best]) && spread < options.tolerance * scale &&
            cycle_start_best - values[best] < options.tolerance * scale) {
          signalled = true;
          break;
        }
        cycle_counter = 0;
      }
      ++result.iterations;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == worst) continue;
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
      }
      auto along = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k)
          p[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
        return p;
      };

      auto reflected = along(-kReflect);
      const double fr = safe_eval(objective, reflected);
      if (fr < values[best]) {
        auto expanded = along(-kExpand);
        const double fe = safe_eval(objective, expanded);
        if (fe < fr) {
          simplex[worst] = std::move(expanded);
          values[worst] = fe;
        } else {
          simplex[worst] = std::move(reflected);
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
        continue;
      }
      const bool outside = fr < values[worst];
      auto contracted = along(outside ? -kContract : kContract);
      const double fc = safe_eval(objective, contracted);
      if (fc < (outside ? fr : values[worst])) {
        simplex[worst] = std::move(contracted);
        values[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t k = 0; k < n; ++k)
          simplex[i][k] = simplex[best][k] + kShrink * (simplex[i][k] - simplex[best][k]);
        values[i] = safe_eval(objective, simplex[i]);
      }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const double improvement = result.value - *best_it;
    if (*best_it <= result.value) {
      result.value = *best_it;
      result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
    }
    if (!signalled) {
      result.converged = false;
      return result;
    }
    const double scale = std::max(1.0, std::fabs(result.value));
    if (restarts_left == 0 || improvement < options.tolerance * scale) {
      result.converged = true;
      return result;
    }
    --restarts_left;
  }
}

Adam::Adam(std::vector<ad::Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    first_moment_.emplace_back(p.numel(), 0.0);
    second_moment_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    const bool has_grad = p.has_grad();
    const auto g = p.grad();
    auto values = p.mutable_data();
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * gi;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * gi * gi;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      values[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace quantgan
