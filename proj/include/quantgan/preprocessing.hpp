#pragma once

// Return preprocessing: log returns, normalization, the inverse Lambert W
// transform that Gaussianizes heavy tails, and rolling windows. Every step
// stores the parameters needed to invert it so generated output can be mapped
// back to the scale of the original prices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "quantgan/random.hpp"

namespace quantgan {

/// r_t = log(s_t / s_{t-1}). Throws std::invalid_argument on a non-positive price.
std::vector<double> log_returns(std::span<const double> prices);

/// s_0 * exp(cumsum(r)), including s_0 itself (length r.size() + 1).
std::vector<double> prices_from_returns(std::span<const double> returns, double s0);

struct NormalizerParams {
  double mean = 0.0;
  double std = 1.0;
};

struct Normalized {
  std::vector<double> values;
  NormalizerParams params;
};

/// Zero mean, unit sample standard deviation (n - 1 denominator).
Normalized normalize(std::span<const double> x);
std::vector<double> apply_normalizer(std::span<const double> x, const NormalizerParams& p);
std::vector<double> denormalize(std::span<const double> x, const NormalizerParams& p);

/// Principal branch of the Lambert W function, x >= -1/e.
double lambert_w0(double x);

struct LambertParams {
  double mu = 0.0;
  double sigma = 1.0;
  double delta = 0.0;

  void validate() const;
};

/// y = u exp(delta u^2 / 2) sigma + mu with u = (x - mu) / sigma.
double lambert_forward(double x, const LambertParams& p);
std::vector<double> lambert_forward(std::span<const double> x, const LambertParams& p);
/// Inverse of lambert_forward; strictly increasing for delta > 0.
double lambert_inverse(double y, const LambertParams& p);
std::vector<double> lambert_inverse(std::span<const double> y, const LambertParams& p);

/// Log-likelihood of y under the Lambert W x Gaussian model.
double lambert_log_likelihood(std::span<const double> y, const LambertParams& p);

struct LambertFit {
  LambertParams params;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Maximum likelihood over (mu, sigma > 0, delta >= 0). delta starts from the
/// kurtosis-matching value; a non-converged fit still reports the best point.
LambertFit fit_lambert(std::span<const double> y);

/// delta whose Lambert W x Gaussian kurtosis equals the given (non-excess)
/// kurtosis; 0 when kurtosis <= 3.
double lambert_delta_from_kurtosis(double kurtosis);

/// Windows [j, j + width - 1] for j = 0 .. T - width.
std::vector<std::vector<double>> rolling_window(std::span<const double> x, std::size_t width);

/// Draws window indices so that each original return is equally likely to be
/// the one a draw is attributed to. A draw picks a return i uniformly, then a
/// window containing i uniformly; window j therefore has probability
/// (1/T) sum_{i in j} 1/coverage(i).
class WeightedWindowSampler {
 public:
  WeightedWindowSampler(std::size_t num_windows, std::size_t width);

  std::size_t sample(Rng& rng) const;
  std::size_t num_windows() const { return weights_.size(); }
  std::size_t width() const { return width_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Number of windows that contain return i.
  std::size_t coverage(std::size_t i) const;

 private:
  std::size_t coverage_of(std::size_t i, std::size_t num_windows) const;

  std::size_t width_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Normalize, inverse Lambert W, normalize again. apply and invert are exact
/// inverses up to floating-point rounding.
struct PipelineState {
  NormalizerParams first;
  LambertParams lambert;
  NormalizerParams second;

  std::vector<double> apply(std::span<const double> log_returns) const;
  std::vector<double> invert(std::span<const double> values) const;
};

nlohmann::json to_json(const PipelineState& s);
PipelineState pipeline_from_json(const nlohmann::json& j);

struct Preprocessed {
  std::vector<double> log_returns;
  /// Final Gaussianized, standardized returns.
  std::vector<double> values;
  PipelineState state;
  LambertFit lambert_fit;
};

/// Fits every pipeline step on the price series.
Preprocessed preprocess_prices(std::span<const double> prices);
Preprocessed preprocess_returns(std::span<const double> log_returns);

}  // namespace quantgan
