#include "quantgan/generators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "quantgan/stats.hpp"

namespace quantgan {

using ad::Tensor;

Tensor sample_noise(const NoisePrior& prior, std::size_t length) {
  Rng rng(prior.seed);
  return sample_noise(prior.dim, length, rng);
}

Tensor sample_noise(std::size_t dim, std::size_t length, Rng& rng) {
  if (dim == 0 || length == 0) throw std::invalid_argument("sample_noise: empty noise shape");
  return Tensor::from({dim, length}, rng.normals(dim * length));
}

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::PureTcn ? "pure_tcn" : "c_svnn";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
  if (name == "pure_tcn") return GeneratorKind::PureTcn;
  if (name == "c_svnn") return GeneratorKind::ConstrainedSvnn;
  throw std::invalid_argument("unknown generator kind '" + std::string(name) + "'");
}

Generator Generator::create(GeneratorKind kind, TcnSkipSpec tcn, Rng& rng) {
  tcn.validate();
  const std::size_t want = kind == GeneratorKind::PureTcn ? 1 : 2;
  if (tcn.output_channels != want)
    throw std::invalid_argument(to_string(kind) + " generator needs " + std::to_string(want) +
                                " output channels");
  Generator g;
  g.kind = kind;
  g.params = init_tcn(tcn, rng);
  g.tcn = std::move(tcn);
  return g;
}

Generator Generator::reference(GeneratorKind kind, Rng& rng) {
  if (kind == GeneratorKind::PureTcn) return create(kind, TcnSkipSpec::reference(3, 80, 1), rng);
  return create(kind, TcnSkipSpec::reference(3, 50, 2), rng);
}

std::size_t Generator::noise_length(std::size_t length) const {
  return kind == GeneratorKind::PureTcn ? length + receptive_field() - 1
                                        : length + receptive_field();
}

Tensor Generator::returns(const Tensor& Z) const {
  if (kind == GeneratorKind::PureTcn) return tcn_skip_forward(tcn, params, Z);
  return svnn_forward(*this, Z).returns;
}

SvnnOutput svnn_forward(const Generator& g, const Tensor& Z) {
  if (g.kind != GeneratorKind::ConstrainedSvnn)
    throw std::invalid_argument("svnn_forward: generator is not a constrained SVNN");
  if (Z.rank() != 2 && Z.rank() != 3) throw ad::ShapeError("svnn_forward: noise must be rank 2 or 3");
  const std::size_t L = Z.extent(Z.rank() - 1);
  const std::size_t rfs = g.receptive_field();
  if (L < rfs + 1)
    throw ad::ShapeError("svnn_forward: noise length " + std::to_string(L) + " shorter than RFS + 1 = " +
                         std::to_string(rfs + 1));
  const std::size_t T = L - rfs;
  auto h = tcn_skip_forward(g.tcn, g.params, ad::slice_time(Z, 0, L - 1));
  SvnnOutput out;
  out.sigma = ad::abs(ad::channel(h, 0));
  out.mu = ad::channel(h, 1);
  out.epsilon = ad::slice_time(ad::channel(Z, 0), rfs, T);
  out.returns = out.sigma * out.epsilon + out.mu;
  return out;
}

GeneratedPath generate_path(const Generator& g, std::size_t length, std::uint64_t seed) {
  GeneratedPath path;
  if (length == 0) return path;
  ad::NoGradGuard no_grad;
  Rng rng(seed);
  auto Z = sample_noise(g.noise_dim(), g.noise_length(length), rng);
  auto copy = [](const Tensor& t) { return std::vector<double>(t.data().begin(), t.data().end()); };
  if (g.kind == GeneratorKind::PureTcn) {
    path.returns = copy(g.returns(Z));
  } else {
    auto out = svnn_forward(g, Z);
    path.returns = copy(out.returns);
    path.sigma = copy(out.sigma);
    path.mu = copy(out.mu);
    path.epsilon = copy(out.epsilon);
  }
  return path;
}

std::vector<GeneratedPath> generate_paths(const Generator& g, std::size_t num_paths,
                                          std::size_t length, std::uint64_t seed,
                                          std::size_t threads) {
  std::vector<GeneratedPath> paths(num_paths);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(num_paths, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < num_paths; i = next++) paths[i] = generate_path(g, length, seed + i);
  };
  if (threads == 1) {
    worker();
    return paths;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return paths;
}

MonteCarloLogH monte_carlo_log_h(double sigma, double mu, std::size_t samples, Rng& rng) {
  if (samples == 0) throw std::invalid_argument("monte_carlo_log_h: sample budget is zero");
  const std::size_t pairs = std::max<std::size_t>(1, samples / 2);
  std::vector<double> values(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double e = rng.normal();
    values[i] = 0.5 * (std::exp(sigma * e) + std::exp(-sigma * e));
  }
  const double m = stats::mean(values);
  const double se = pairs > 1 ? stats::stddev(values) / std::sqrt(static_cast<double>(pairs)) : 0.0;
  return {mu + std::log(m), se / m};
}

std::vector<double> risk_neutral_correct(std::span<const double> R, std::span<const double> sigma,
                                         std::span<const double> mu, double rate,
                                         RiskNeutralMode mode, std::size_t mc_samples,
                                         std::uint64_t seed) {
  if (sigma.size() != R.size() || mu.size() != R.size())
    throw std::invalid_argument("risk_neutral_correct: series lengths differ");
  std::vector<double> out(R.size());
  if (mode == RiskNeutralMode::ClosedForm) {
    for (std::size_t t = 0; t < R.size(); ++t) out[t] = R[t] - (mu[t] + 0.5 * sigma[t] * sigma[t]) + rate;
    return out;
  }
  if (mc_samples == 0) throw std::invalid_argument("risk_neutral_correct: sample budget is zero");
  Rng rng(seed);
  const std::size_t pairs = std::max<std::size_t>(1, mc_samples / 2);
  const auto eps = rng.normals(pairs);
  for (std::size_t t = 0; t < R.size(); ++t) {
    double acc = 0.0;
    for (double e : eps) acc += 0.5 * (std::exp(sigma[t] * e) + std::exp(-sigma[t] * e));
    out[t] = R[t] - (mu[t] + std::log(acc / static_cast<double>(pairs))) + rate;
  }
  return out;
}

std::vector<double> spot_path(std::span<const double> R, const SpotPathConfig& cfg, bool discounted) {
  if (!(cfg.s0 > 0.0)) throw std::invalid_argument("spot_path: S0 must be positive");
  std::vector<double> s(R.size() + 1);
  s[0] = cfg.s0;
  double cum = 0.0;
  for (std::size_t t = 0; t < R.size(); ++t) {
    cum += R[t];
    if (discounted) cum -= cfg.rate;
    s[t + 1] = cfg.s0 * std::exp(cum);
  }
  return s;
}

void write_paths_csv(std::ostream& out, const std::vector<GeneratedPath>& paths, bool diagnostics) {
  out << "path_id,t,log_return";
  if (diagnostics) out << ",sigma,mu,epsilon";
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    const bool diag = diagnostics && path.sigma.size() == path.returns.size();
    for (std::size_t t = 0; t < path.returns.size(); ++t) {
      out << p << ',' << t + 1 << ',' << path.returns[t];
      if (diagnostics) {
        if (diag) out << ',' << path.sigma[t] << ',' << path.mu[t] << ',' << path.epsilon[t];
        else out << ",,,";
      }
      out << '\n';
    }
  }
  out.precision(old_precision);
}

nlohmann::json to_json(const Generator& g) {
  return {{"kind", to_string(g.kind)}, {"tcn", to_json(g.tcn)}};
}

Generator generator_from_json(const nlohmann::json& j, Rng& rng) {
  return Generator::create(generator_kind_from_string(j.at("kind").get<std::string>()),
                           tcn_spec_from_json(j.at("tcn")), rng);
}

}  // namespace quantgan
