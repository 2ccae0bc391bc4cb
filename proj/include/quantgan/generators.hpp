#pragma once

// Generators mapping i.i.d. Gaussian noise to log-return paths: the pure TCN
// generator and the constrained stochastic volatility network, plus
// risk-neutral correction and spot-price construction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quantgan/autodiff.hpp"
#include "quantgan/networks.hpp"
#include "quantgan/random.hpp"

namespace quantgan {

struct NoisePrior {
  std::size_t dim = 3;
  std::uint64_t seed = 0;
};

/// [dim x length] standard normal draws, row-major, from a fresh Rng(seed).
ad::Tensor sample_noise(const NoisePrior& prior, std::size_t length);
/// [dim x length] draws continuing the given stream.
ad::Tensor sample_noise(std::size_t dim, std::size_t length, Rng& rng);

enum class GeneratorKind { PureTcn, ConstrainedSvnn };

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view name);

struct Generator {
  GeneratorKind kind = GeneratorKind::PureTcn;
  TcnSkipSpec tcn;
  ParamStore params;

  /// Pure TCN: one output channel. Constrained SVNN: two (sigma and mu heads).
  static Generator create(GeneratorKind kind, TcnSkipSpec tcn, Rng& rng);
  /// Reported configurations: hidden width 80 (pure TCN) or 50 (SVNN), 3-dim noise.
  static Generator reference(GeneratorKind kind, Rng& rng);

  std::size_t noise_dim() const { return tcn.input_channels(); }
  std::size_t receptive_field() const { return receptive_field_size(tcn); }
  /// Noise columns needed for `length` returns: length + RFS - 1 for the pure
  /// TCN, length + RFS for the SVNN whose volatility window is lagged by one.
  std::size_t noise_length(std::size_t length) const;
  /// Log returns [1 x T] (or [B x 1 x T]) for noise [N_Z x L] (or [B x N_Z x L]).
  ad::Tensor returns(const ad::Tensor& Z) const;
};

struct SvnnOutput {
  ad::Tensor sigma;
  ad::Tensor mu;
  ad::Tensor epsilon;
  ad::Tensor returns;
};

/// sigma_t = |h_{t,1}|, mu_t = h_{t,2} with h_t the TCN on Z[:, t .. t+RFS-1],
/// epsilon_t = Z[0, t + RFS], R_t = sigma_t epsilon_t + mu_t.
SvnnOutput svnn_forward(const Generator& g, const ad::Tensor& Z);

struct GeneratedPath {
  std::vector<double> returns;
  /// Filled for the constrained SVNN only.
  std::vector<double> sigma;
  std::vector<double> mu;
  std::vector<double> epsilon;
};

/// One path of `length` returns with noise drawn from Rng(seed).
GeneratedPath generate_path(const Generator& g, std::size_t length, std::uint64_t seed);

/// Path i uses seed + i, so the result does not depend on `threads`.
std::vector<GeneratedPath> generate_paths(const Generator& g, std::size_t num_paths,
                                          std::size_t length, std::uint64_t seed,
                                          std::size_t threads = 1);

enum class RiskNeutralMode { ClosedForm, MonteCarlo };

struct MonteCarloLogH {
  double log_h = 0.0;
  double stderr_log_h = 0.0;
};

/// log E[exp(sigma eps + mu)] from antithetic draws of eps; `samples` counts
/// every evaluated draw (pairs contribute two).
MonteCarloLogH monte_carlo_log_h(double sigma, double mu, std::size_t samples, Rng& rng);

/// R^M_t = R_t - log h(sigma_t, mu_t) + r. Closed form uses
/// log h = mu + sigma^2 / 2; Monte Carlo shares one draw set across steps.
std::vector<double> risk_neutral_correct(std::span<const double> R, std::span<const double> sigma,
                                         std::span<const double> mu, double rate,
                                         RiskNeutralMode mode, std::size_t mc_samples = 0,
                                         std::uint64_t seed = 0);

struct SpotPathConfig {
  double s0 = 1.0;
  double rate = 0.0;
};

/// [S_0, S_1, ..., S_T]; discounted divides S_t by exp(r t).
std::vector<double> spot_path(std::span<const double> R, const SpotPathConfig& cfg, bool discounted);

/// Columns path_id,t,log_return (plus sigma,mu,epsilon when requested); t starts at 1.
void write_paths_csv(std::ostream& out, const std::vector<GeneratedPath>& paths, bool diagnostics);

nlohmann::json to_json(const Generator& g);
/// Architecture only; parameters are freshly initialized from rng.
Generator generator_from_json(const nlohmann::json& j, Rng& rng);

}  // namespace quantgan
