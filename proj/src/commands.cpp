#include "quantgan/commands.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace quantgan {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

void echo_config(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  write_json(cfg.out / "config.json", to_json(cfg));
}

PriceDataset require_data(const RunConfig& cfg) {
  if (cfg.data.empty()) throw std::invalid_argument("config: 'data' (price CSV) is required for this command");
  return load_csv(cfg.data);
}

void write_report(const fs::path& dir, const MetricsReport& rep) {
  write_json(dir / "metrics.json", to_json(rep));
  auto csv = open_out(dir / "metrics.csv");
  write_report_csv(csv, {rep});
}

}  // namespace

std::uint64_t stream_seed(const RunConfig& cfg, SeedStream s) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
}

Preprocessed cmd_preprocess(const RunConfig& cfg) {
  const auto data = require_data(cfg);
  auto pre = preprocess_prices(data.closes);
  echo_config(cfg);
  write_json(cfg.out / "pipeline.json", to_json(pre.state));

  auto csv = open_out(cfg.out / "dataset.csv");
  csv << "t,log_return,value\n";
  csv.precision(17);
  for (std::size_t i = 0; i < pre.values.size(); ++i)
    csv << i + 1 << ',' << pre.log_returns[i] << ',' << pre.values[i] << '\n';

  const std::size_t width = receptive_field_size(cfg.discriminator);
  write_json(cfg.out / "preprocess.json",
             {{"observations", pre.values.size()},
              {"window", width},
              {"windows", pre.values.size() >= width ? pre.values.size() - width + 1 : 0},
              {"lambert_log_likelihood", pre.lambert_fit.log_likelihood},
              {"lambert_iterations", pre.lambert_fit.iterations},
              {"lambert_converged", pre.lambert_fit.converged}});
  return pre;
}

TrainingLog cmd_train(const RunConfig& cfg) {
  if (cfg.model == ModelKind::Garch) throw std::invalid_argument("train: the garch model is fitted with the garch command");
  const auto data = require_data(cfg);
  const auto pre = preprocess_prices(data.closes);
  echo_config(cfg);

  Rng init(stream_seed(cfg, SeedStream::Init));
  const auto kind = cfg.model == ModelKind::ConstrainedSvnn ? GeneratorKind::ConstrainedSvnn : GeneratorKind::PureTcn;
  auto gen = Generator::create(kind, cfg.generator, init);
  auto disc = Discriminator::create(cfg.discriminator, init);

  TrainHooks hooks;
  hooks.on_checkpoint = [&](const TrainingState& s) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%06zu.bin", s.step);
    save_checkpoint(cfg.out / "checkpoints" / name, s.generator, s.discriminator, cfg.gan, pre.state, s.step);
  };
  fs::create_directories(cfg.out / "checkpoints");
  auto log = train(gen, disc, pre.values, cfg.gan, hooks);
  save_checkpoint(cfg.out / "checkpoint.bin", gen, disc, cfg.gan, pre.state, log.steps.size());

  auto csv = open_out(cfg.out / "training_log.csv");
  log.write_csv(csv);
  auto timing = open_out(cfg.out / "timing.csv");
  log.write_timing_csv(timing);
  if (log.aborted) write_json(cfg.out / "aborted.json", {{"reason", log.abort_reason}, {"steps", log.steps.size()}});
  return log;
}

fs::path resolve_checkpoint(const RunConfig& cfg) { return cfg.checkpoint ? *cfg.checkpoint : cfg.out / "checkpoint.bin"; }

std::vector<std::vector<double>> sample_log_returns(const Checkpoint& ckpt, std::size_t num_paths, std::size_t length,
                                                    std::uint64_t seed, std::size_t threads) {
  auto paths = generate_paths(ckpt.generator, num_paths, length, seed, threads);
  std::vector<std::vector<double>> out;
  out.reserve(paths.size());
  for (auto& p : paths) out.push_back(ckpt.pipeline ? ckpt.pipeline->invert(p.returns) : std::move(p.returns));
  return out;
}

namespace {

Checkpoint load_for(const RunConfig& cfg) {
  if (cfg.model == ModelKind::Garch) throw std::invalid_argument("the garch model has no checkpoint");
  auto ckpt = load_checkpoint(resolve_checkpoint(cfg));
  require_architecture(ckpt, cfg.model == ModelKind::ConstrainedSvnn ? GeneratorKind::ConstrainedSvnn : GeneratorKind::PureTcn,
                       cfg.generator, cfg.discriminator);
  return ckpt;
}

}  // namespace

void cmd_generate(const RunConfig& cfg) {
  const auto ckpt = load_for(cfg);
  double s0 = 1.0;
  if (cfg.generate.s0)
    s0 = *cfg.generate.s0;
  else if (!cfg.data.empty())
    s0 = load_csv(cfg.data).closes.back();
  echo_config(cfg);

  const auto seed = stream_seed(cfg, SeedStream::Generate);
  auto raw = generate_paths(ckpt.generator, cfg.generate.num_paths, cfg.generate.length, seed, cfg.threads);
  std::vector<std::vector<double>> prices;
  for (auto& p : raw) {
    if (ckpt.pipeline) p.returns = ckpt.pipeline->invert(p.returns);
    prices.push_back(prices_from_returns(p.returns, s0));
  }
  auto r = open_out(cfg.out / "returns.csv");
  write_paths_csv(r, raw, cfg.generate.diagnostics && ckpt.generator.kind == GeneratorKind::ConstrainedSvnn);
  auto p = open_out(cfg.out / "prices.csv");
  write_price_paths_csv(p, prices);
}

void write_plot_data(const fs::path& dir, std::span<const double> hist, const std::vector<std::vector<double>>& paths,
                     const MetricConfig& metrics) {
  fs::create_directories(dir);
  if (paths.empty()) return;
  for (auto lag : metrics.lags) {
    auto out = open_out(dir / ("histogram_lag" + std::to_string(lag) + ".csv"));
    write_histogram_csv(out, hist, paths, lag, 80, metrics.overlapping);
  }
  for (auto f : {Transform::Identity, Transform::Abs, Transform::Square}) {
    auto out = open_out(dir / ("acf_" + to_string(f) + ".csv"));
    write_acf_csv(out, hist, paths, f, metrics.max_lag);
  }
  auto lev = open_out(dir / "leverage.csv");
  write_leverage_csv(lev, hist, paths, metrics.max_lag);
  auto lp = open_out(dir / "log_paths.csv");
  write_log_paths_csv(lp, hist, paths);
}

MetricsReport cmd_evaluate(const RunConfig& cfg) {
  const auto ckpt = load_for(cfg);
  const auto hist = log_returns(require_data(cfg).closes);
  echo_config(cfg);
  const auto seed = stream_seed(cfg, SeedStream::Evaluate);
  const auto paths = sample_log_returns(ckpt, cfg.metrics.num_paths, cfg.metrics.path_length, seed, cfg.threads);
  auto rep = evaluate_paths(hist, paths, cfg.metrics, to_string(cfg.model), cfg.seed);
  write_report(cfg.out, rep);
  write_plot_data(cfg.out / "plots", hist, paths, cfg.metrics);
  return rep;
}

MetricsReport evaluate_garch(std::span<const double> hist, const GarchParams& p, const MetricConfig& metrics,
                             std::uint64_t seed, const std::string& model) {
  std::vector<std::vector<double>> paths;
  paths.reserve(metrics.num_paths);
  for (std::size_t i = 0; i < metrics.num_paths; ++i) paths.push_back(garch_simulate(p, metrics.path_length, seed + i));
  return evaluate_paths(hist, paths, metrics, model, seed);
}

MetricsReport cmd_garch(const RunConfig& cfg) {
  const auto hist = log_returns(require_data(cfg).closes);
  echo_config(cfg);
  const auto fit = garch_fit(hist);
  const auto dir = cfg.out / "garch";
  auto params = to_json(fit.params);
  write_json(dir / "params.json", {{"params", params},
                                   {"log_likelihood", fit.log_likelihood},
                                   {"iterations", fit.iterations},
                                   {"converged", fit.converged}});
  const auto seed = stream_seed(cfg, SeedStream::GarchSimulate);
  std::vector<std::vector<double>> paths;
  for (std::size_t i = 0; i < cfg.metrics.num_paths; ++i)
    paths.push_back(garch_simulate(fit.params, cfg.metrics.path_length, seed + i));
  auto rep = evaluate_paths(hist, paths, cfg.metrics, "garch", cfg.seed);
  write_report(dir, rep);
  write_plot_data(dir / "plots", hist, paths, cfg.metrics);
  return rep;
}

}  // namespace quantgan
