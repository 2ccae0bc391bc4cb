#include "quantgan/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "quantgan/optimize.hpp"
#include "quantgan/random.hpp"
#include "quantgan/stats.hpp"

namespace quantgan {

void GarchParams::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("garch: omega must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("garch: alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("garch: beta must lie in [0, 1]");
  if (!(alpha + beta < 1.0)) throw std::invalid_argument("garch: alpha + beta must be below 1");
  if (!std::isfinite(mu)) throw std::invalid_argument("garch: mu must be finite");
}

double garch_loglik(const GarchParams& p, std::span<const double> r, GarchInit init) {
  p.validate();
  if (r.size() < 2) throw std::invalid_argument("garch_loglik: need at least two returns");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double s2 = init == GarchInit::Unconditional ? p.unconditional_variance() : stats::variance(r);
  double ll = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double xi = r[t] - p.mu;
    ll += -0.5 * (log2pi + std::log(s2) + xi * xi / s2);
    s2 = p.omega + p.alpha * xi * xi + p.beta * s2;
  }
  return ll;
}

namespace {

// (a, b, c, mu) -> omega = e^a, (alpha, beta) = (e^b, e^c) / (1 + e^b + e^c)
GarchParams unpack(std::span<const double> v) {
  const double m = std::max({0.0, v[1], v[2]});
  const double e0 = std::exp(-m), e1 = std::exp(v[1] - m), e2 = std::exp(v[2] - m);
  const double z = e0 + e1 + e2;
  return {std::exp(v[0]), e1 / z, e2 / z, v[3]};
}

std::vector<double> pack(const GarchParams& p) {
  const double rest = 1.0 - p.alpha - p.beta;
  return {std::log(p.omega), std::log(p.alpha / rest), std::log(p.beta / rest), p.mu};
}

}  // namespace

GarchFit garch_fit(std::span<const double> r) {
  if (r.size() < 3) throw std::invalid_argument("garch_fit: need at least three returns");
  const double var = stats::variance(r);
  if (!(var > 0.0)) throw std::invalid_argument("garch_fit: constant series");
  const GarchParams init{0.1 * var, 0.1, 0.8, stats::mean(r)};
  const double n = static_cast<double>(r.size());

  auto objective = [&](std::span<const double> v) {
    const auto p = unpack(v);
    if (!(p.alpha + p.beta < 1.0) || !(p.omega > 0.0)) return std::numeric_limits<double>::infinity();
    return -garch_loglik(p, r) / n;
  };
  const double sd = std::sqrt(var);
  const std::vector<double> steps{0.5, 0.5, 0.5, 0.1 * sd};
  NelderMeadOptions opts;
  opts.tolerance = 1e-10;
  opts.max_iterations = 5000;
  const auto res = nelder_mead(objective, pack(init), steps, opts);

  GarchFit fit;
  fit.params = unpack(res.x);
  fit.log_likelihood = -res.value * n;
  // With alpha at zero beta is not identified: every (omega, beta) with the same
  // unconditional variance gives the same likelihood. Prefer the constant-variance form.
  const GarchParams flat{fit.params.unconditional_variance(), 0.0, 0.0, fit.params.mu};
  const double flat_ll = garch_loglik(flat, r);
  if (flat_ll >= fit.log_likelihood - 1e-6) {
    fit.params = flat;
    fit.log_likelihood = flat_ll;
  }
  fit.initial_log_likelihood = garch_loglik(init, r);
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

std::vector<double> garch_simulate(const GarchParams& p, std::size_t length, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  std::vector<double> r(length);
  double s2 = p.unconditional_variance();
  for (std::size_t t = 0; t < length; ++t) {
    const double xi = std::sqrt(s2) * rng.normal();
    r[t] = p.mu + xi;
    s2 = p.omega + p.alpha * xi * xi + p.beta * s2;
  }
  return r;
}

nlohmann::json to_json(const GarchParams& p) {
  return {{"omega", p.omega}, {"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}};
}

GarchParams garch_params_from_json(const nlohmann::json& j) {
  GarchParams p{j.at("omega").get<double>(), j.at("alpha").get<double>(), j.at("beta").get<double>(),
                j.at("mu").get<double>()};
  p.validate();
  return p;
}

}  // namespace quantgan
