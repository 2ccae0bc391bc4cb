#include "quantgan/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "quantgan/optimize.hpp"
#include "quantgan/stats.hpp"

namespace quantgan {

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw std::invalid_argument("log_returns: need at least two prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
      throw std::invalid_argument("log_returns: non-positive price at index " + std::to_string(i));
  }
  std::vector<double> r(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) r[t - 1] = std::log(prices[t] / prices[t - 1]);
  return r;
}

std::vector<double> prices_from_returns(std::span<const double> returns, double s0) {
  if (!(s0 > 0.0)) throw std::invalid_argument("prices_from_returns: s0 must be positive");
  std::vector<double> s(returns.size() + 1);
  s[0] = s0;
  double cum = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    cum += returns[t];
    s[t + 1] = s0 * std::exp(cum);
  }
  return s;
}

Normalized normalize(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("normalize: need at least two values");
  NormalizerParams p{stats::mean(x), stats::stddev(x)};
  if (!(p.std > 0.0)) throw std::invalid_argument("normalize: constant series");
  return {apply_normalizer(x, p), p};
}

std::vector<double> apply_normalizer(std::span<const double> x, const NormalizerParams& p) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - p.mean) / p.std;
  return out;
}

std::vector<double> denormalize(std::span<const double> x, const NormalizerParams& p) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * p.std + p.mean;
  return out;
}

double lambert_w0(double x) {
  constexpr double inv_e = 1.0 / std::numbers::e;
  if (std::isnan(x) || x < -inv_e) throw std::domain_error("lambert_w0: argument below -1/e");
  if (x == 0.0) return 0.0;
  if (x == -inv_e) return -1.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.3) {
    // branch-point series in p = sqrt(2 (e x + 1))
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w = std::log1p(std::max(x, -0.3));
    if (x > 3.0) w -= std::log(w);
  }
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::fabs(f) <= 1e-13 * std::max(1.0, std::fabs(x))) break;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double next = w - f / denom;
    if (next == w) break;
    w = next;
  }
  return w;
}

void LambertParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("lambert: sigma must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("lambert: delta must be >= 0");
  if (!std::isfinite(mu)) throw std::invalid_argument("lambert: mu must be finite");
}

double lambert_forward(double x, const LambertParams& p) {
  const double u = (x - p.mu) / p.sigma;
  return u * std::exp(0.5 * p.delta * u * u) * p.sigma + p.mu;
}

std::vector<double> lambert_forward(std::span<const double> x, const LambertParams& p) {
  p.validate();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lambert_forward(x[i], p);
  return out;
}

double lambert_inverse(double y, const LambertParams& p) {
  const double z = (y - p.mu) / p.sigma;
  if (p.delta == 0.0) return y;
  // sign(z) sqrt(W(delta z^2) / delta), written as z exp(-W/2) to stay exact near 0
  const double u = z * std::exp(-0.5 * lambert_w0(p.delta * z * z));
  return u * p.sigma + p.mu;
}

std::vector<double> lambert_inverse(std::span<const double> y, const LambertParams& p) {
  p.validate();
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = lambert_inverse(y[i], p);
  return out;
}

double lambert_log_likelihood(std::span<const double> y, const LambertParams& p) {
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
  const double log_sigma = std::log(p.sigma);
  double ll = 0.0;
  for (double v : y) {
    const double z = (v - p.mu) / p.sigma;
    double u = z, w = 0.0;
    if (p.delta > 0.0) {
      w = lambert_w0(p.delta * z * z);
      u = z * std::exp(-0.5 * w);  // z = u exp(W / 2)
    }
    ll += -0.5 * u * u - log_norm - 0.5 * w - std::log1p(w) - log_sigma;
  }
  return ll;
}

double lambert_delta_from_kurtosis(double kurtosis) {
  if (!(kurtosis > 3.0)) return 0.0;
  // kurt(delta) = 3 (1 - 2 delta)^3 / (1 - 4 delta)^{5/2}, increasing on [0, 1/4)
  auto kurt = [](double d) { return 3.0 * std::pow(1.0 - 2.0 * d, 3.0) / std::pow(1.0 - 4.0 * d, 2.5); };
  double lo = 0.0, hi = 0.25 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kurt(mid) < kurtosis ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

LambertFit fit_lambert(std::span<const double> y) {
  if (y.size() < 3) throw std::invalid_argument("fit_lambert: need at least three observations");
  const double m = stats::mean(y);
  const double s = stats::stddev(y);
  if (!(s > 0.0)) throw std::invalid_argument("fit_lambert: constant series");
  const double delta0 = lambert_delta_from_kurtosis(stats::excess_kurtosis(y) + 3.0);
  // sd of the Lambert output exceeds the latent scale by (1 - 2 delta)^{-3/4}
  const double sigma0 = s * std::pow(1.0 - 2.0 * delta0, 0.75);
  const double n = static_cast<double>(y.size());

  auto unpack = [](std::span<const double> v) {
    return LambertParams{v[0], std::exp(v[1]), v[2] * v[2]};
  };
  auto objective = [&](std::span<const double> v) {
    return -lambert_log_likelihood(y, unpack(v)) / n;
  };
  const std::vector<double> start{m, std::log(sigma0), std::sqrt(delta0)};
  const std::vector<double> steps{0.1 * s, 0.1, 0.1};
  NelderMeadOptions opts;
  opts.tolerance = 1e-9;
  opts.max_iterations = 2000;
  const auto res = nelder_mead(objective, start, steps, opts);

  LambertFit fit;
  fit.params = unpack(res.x);
  fit.log_likelihood = -res.value * n;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

std::vector<std::vector<double>> rolling_window(std::span<const double> x, std::size_t width) {
  if (width == 0) throw std::invalid_argument("rolling_window: width must be positive");
  if (x.size() < width)
    throw std::invalid_argument("rolling_window: series of length " + std::to_string(x.size()) +
                                " shorter than width " + std::to_string(width));
  std::vector<std::vector<double>> out;
  out.reserve(x.size() - width + 1);
  for (std::size_t j = 0; j + width <= x.size(); ++j)
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(j),
                     x.begin() + static_cast<std::ptrdiff_t>(j + width));
  return out;
}

WeightedWindowSampler::WeightedWindowSampler(std::size_t num_windows, std::size_t width)
    : width_(width) {
  if (num_windows == 0 || width == 0)
    throw std::invalid_argument("WeightedWindowSampler: need at least one window of positive width");
  const std::size_t T = num_windows + width - 1;
  std::vector<double> inv_cov(T);
  for (std::size_t i = 0; i < T; ++i) inv_cov[i] = 1.0 / static_cast<double>(coverage_of(i, num_windows));
  weights_.resize(num_windows);
  double run = 0.0;
  for (std::size_t i = 0; i < width; ++i) run += inv_cov[i];
  for (std::size_t j = 0; j < num_windows; ++j) {
    if (j > 0) run += inv_cov[j + width - 1] - inv_cov[j - 1];
    weights_[j] = run / static_cast<double>(T);
  }
  cumulative_.resize(num_windows);
  double acc = 0.0;
  for (std::size_t j = 0; j < num_windows; ++j) cumulative_[j] = acc += weights_[j];
}

std::size_t WeightedWindowSampler::coverage_of(std::size_t i, std::size_t num_windows) const {
  // windows j with j <= i <= j + width - 1 and 0 <= j < num_windows
  const std::size_t lo = i + 1 >= width_ ? i + 1 - width_ : 0;
  const std::size_t hi = std::min(i, num_windows - 1);
  return hi - lo + 1;
}

std::size_t WeightedWindowSampler::coverage(std::size_t i) const {
  if (i >= num_windows() + width_ - 1) throw std::out_of_range("coverage: return index out of range");
  return coverage_of(i, num_windows());
}

std::size_t WeightedWindowSampler::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

std::vector<double> PipelineState::apply(std::span<const double> r) const {
  auto x = apply_normalizer(r, first);
  auto u = lambert_inverse(x, lambert);
  return apply_normalizer(u, second);
}

std::vector<double> PipelineState::invert(std::span<const double> values) const {
  auto u = denormalize(values, second);
  auto x = lambert_forward(u, lambert);
  return denormalize(x, first);
}

nlohmann::json to_json(const PipelineState& s) {
  return {
      {"normalizer1", {{"mean", s.first.mean}, {"std", s.first.std}}},
      {"lambert", {{"mu", s.lambert.mu}, {"sigma", s.lambert.sigma}, {"delta", s.lambert.delta}}},
      {"normalizer2", {{"mean", s.second.mean}, {"std", s.second.std}}},
      {"std_estimator", "unbiased"},
  };
}

PipelineState pipeline_from_json(const nlohmann::json& j) {
  PipelineState s;
  s.first = {j.at("normalizer1").at("mean").get<double>(), j.at("normalizer1").at("std").get<double>()};
  s.lambert = {j.at("lambert").at("mu").get<double>(), j.at("lambert").at("sigma").get<double>(),
               j.at("lambert").at("delta").get<double>()};
  s.second = {j.at("normalizer2").at("mean").get<double>(), j.at("normalizer2").at("std").get<double>()};
  s.lambert.validate();
  if (!(s.first.std > 0.0) || !(s.second.std > 0.0))
    throw std::invalid_argument("pipeline state: normalizer std must be positive");
  return s;
}

Preprocessed preprocess_returns(std::span<const double> r) {
  Preprocessed out;
  out.log_returns.assign(r.begin(), r.end());
  auto n1 = normalize(r);
  out.state.first = n1.params;
  out.lambert_fit = fit_lambert(n1.values);
  out.state.lambert = out.lambert_fit.params;
  auto u = lambert_inverse(n1.values, out.state.lambert);
  auto n2 = normalize(u);
  out.state.second = n2.params;
  out.values = std::move(n2.values);
  return out;
}

Preprocessed preprocess_prices(std::span<const double> prices) {
  const auto r = log_returns(prices);
  return preprocess_returns(r);
}

}  // namespace quantgan
