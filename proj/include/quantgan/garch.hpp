#pragma once

// GARCH(1,1) with constant drift:
//   r_t = mu + xi_t,  xi_t = sigma_t eps_t,
//   sigma_t^2 = omega + alpha xi_{t-1}^2 + beta sigma_{t-1}^2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace quantgan {

struct GarchParams {
  double omega = 1e-5;
  double alpha = 0.1;
  double beta = 0.85;
  double mu = 0.0;

  /// Throws std::invalid_argument unless omega > 0, alpha, beta in [0, 1], alpha + beta < 1.
  void validate() const;
  double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

enum class GarchInit {
  Unconditional,  ///< sigma_1^2 = omega / (1 - alpha - beta)
  SampleVariance,
};

double garch_loglik(const GarchParams& p, std::span<const double> r,
                    GarchInit init = GarchInit::Unconditional);

struct GarchFit {
  GarchParams params;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Constrained maximum likelihood through omega = exp(a) and a softmax map of
/// (alpha, beta) onto {alpha, beta >= 0, alpha + beta < 1}.
GarchFit garch_fit(std::span<const double> r);

std::vector<double> garch_simulate(const GarchParams& p, std::size_t length, std::uint64_t seed);

nlohmann::json to_json(const GarchParams& p);
GarchParams garch_params_from_json(const nlohmann::json& j);

}  // namespace quantgan
