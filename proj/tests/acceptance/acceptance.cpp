// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, e.g. `acceptance 4 5`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "quantgan/commands.hpp"
#include "quantgan/stats.hpp"

using namespace quantgan;
using ad::Tensor;
using quantgan::testing::check_gradients;
using quantgan::testing::uniform_tensor;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void randomize(ParamStore& params, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  for (const auto& e : params.entries()) {
    Tensor t = e.tensor;
    for (auto& x : t.mutable_data()) x = d(rng);
  }
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("quantgan_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Prices from a GARCH(1,1) return path, one row per calendar day.
void write_garch_prices(const fs::path& path, std::size_t n, std::uint64_t seed) {
  auto r = garch_simulate({1e-5, 0.1, 0.85, 0.0}, n, seed);
  auto p = prices_from_returns(r, 100.0);
  PriceDataset d;
  d.closes = p;
  auto day = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
  for (std::size_t i = 0; i < p.size(); ++i, day += std::chrono::days{1}) {
    std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    d.dates.emplace_back(buf);
  }
  std::ofstream out(path);
  write_price_csv(out, d);
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  Outcome o;
  std::mt19937_64 g(101);
  std::uniform_int_distribution<std::size_t> one_to(1, 3), zero_to(0, 2);
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  auto record = [&](const quantgan::testing::GradCheck& c) {
    ++checked;
    failed += !c.ok;
    worst = std::max(worst, c.worst_abs);
  };

  for (int i = 0; i < 20; ++i) {  // MLP
    MlpSpec spec{{one_to(g), one_to(g) + 1, one_to(g) + 1, one_to(g)},
                 static_cast<Activation>(std::uniform_int_distribution<int>(0, 2)(g))};
    Rng rng(g());
    auto params = init_mlp(spec, rng);
    randomize(params, g, 1.0);
    auto x = uniform_tensor({one_to(g), spec.dims.front()}, -2, 2, g);
    auto leaves = params.tensors();
    leaves.push_back(x);
    record(check_gradients([&] { return ad::sum(ad::square(mlp_forward(spec, params, x))); }, leaves));
  }
  for (int i = 0; i < 20; ++i) {  // temporal block
    TemporalBlockSpec spec{one_to(g), one_to(g), one_to(g), one_to(g), one_to(g)};
    Rng rng(g());
    ParamStore params;
    init_temporal_block(spec, rng, "b.", params);
    randomize(params, g, 1.0);
    auto x = uniform_tensor({one_to(g), spec.in_channels, spec.shrinkage() + one_to(g)}, -2, 2, g);
    auto leaves = params.tensors();
    leaves.push_back(x);
    record(check_gradients([&] { return ad::mean(ad::square(temporal_block_forward(spec, params, x, "b."))); },
                           leaves));
  }
  for (int i = 0; i < 20; ++i) {  // TCN with skip connections
    auto spec = TcnSkipSpec::dilated(one_to(g), one_to(g) + 1, one_to(g), zero_to(g));
    Rng rng(g());
    auto params = init_tcn(spec, rng);
    randomize(params, g, 1.0);
    auto x = uniform_tensor({one_to(g), spec.input_channels(), receptive_field_size(spec) + zero_to(g)}, -2, 2, g);
    auto leaves = params.tensors();
    leaves.push_back(x);
    record(check_gradients([&] { return ad::sum(ad::square(tcn_skip_forward(spec, params, x))); }, leaves));
  }
  auto make_disc = [&] {
    Rng rng(g());
    auto d = Discriminator::create(TcnSkipSpec::dilated(1, one_to(g) + 1, 1, zero_to(g)), rng);
    randomize(d.params, g, 0.8);
    return d;
  };
  for (int i = 0; i < 15; ++i) {  // discriminator head
    auto d = make_disc();
    auto x = uniform_tensor({one_to(g), 1, d.window()}, -2, 2, g);
    auto leaves = d.params.tensors();
    leaves.push_back(x);
    record(check_gradients([&] { return ad::sum(d.forward(x)); }, leaves));
  }
  for (int i = 0; i < 15; ++i) {  // both losses, through the generator for the generator loss
    auto d = make_disc();
    Rng rng(g());
    auto gen = Generator::create(i % 2 ? GeneratorKind::ConstrainedSvnn : GeneratorKind::PureTcn,
                                 TcnSkipSpec::dilated(2, 2, i % 2 ? 2 : 1, zero_to(g)), rng);
    randomize(gen.params, g, 0.8);
    const std::size_t M = one_to(g);
    auto real = uniform_tensor({M, 1, d.window()}, -2, 2, g);
    auto fake = uniform_tensor({M, 1, d.window()}, -2, 2, g);
    auto z = uniform_tensor({M, 2, gen.noise_length(d.window())}, -2, 2, g, false);
    auto leaves = d.params.tensors();
    leaves.push_back(real);
    leaves.push_back(fake);
    record(check_gradients([&] { return loss_discriminator(d, real, fake); }, leaves));
    auto gl = gen.params.tensors();
    record(check_gradients([&] { return loss_generator(d, gen.returns(z)); }, gl));
  }
  for (int i = 0; i < 10; ++i) {  // R1 penalty
    auto d = make_disc();
    auto real = uniform_tensor({one_to(g), 1, d.window()}, -2, 2, g, false);
    record(check_gradients([&] { return r1_penalty(d, real, 0.5 + i); }, d.params.tensors()));
  }
  o.require(failed == 0, std::to_string(failed) + " of " + std::to_string(checked) + " gradient checks failed");
  o.detail = std::to_string(checked) + " checks over 100 networks at rel tol 1e-5, worst abs err " + fmt("%.2e", worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome convolution_oracle() {
  Outcome o;
  std::mt19937_64 g(202);
  std::uniform_int_distribution<std::size_t> small(1, 4);
  std::size_t mismatched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t NI = small(g), NO = small(g), K = small(g), D = small(g);
    const std::size_t T = D * (K - 1) + 1 + std::uniform_int_distribution<std::size_t>(0, 20)(g);
    auto X = uniform_tensor({NI, T}, -3, 3, g, false);
    auto W = uniform_tensor({K, NI, NO}, -3, 3, g, false);
    auto b = uniform_tensor({NO}, -3, 3, g, false);
    auto Y = ad::dilated_causal_conv(X, W, b, D);
    auto ref = quantgan::testing::brute_force_conv({X.data().begin(), X.data().end()}, NI, T,
                                                   {W.data().begin(), W.data().end()}, K, NO,
                                                   {b.data().begin(), b.data().end()}, D);
    mismatched += !(std::vector<double>(Y.data().begin(), Y.data().end()) == ref);
  }
  o.require(mismatched == 0, std::to_string(mismatched) + " cases differ from the brute force");
  if (o.pass) o.detail = "200 random cases bit-identical";
  return o;
}

/// Perturbs each input step; outputs outside the receptive window must not move
/// and the oldest step inside the window must.
template <class Forward>
bool causal(Forward&& f, std::size_t channels, std::size_t rfs, std::mt19937_64& g) {
  const std::size_t T0 = rfs + 9;
  auto X = uniform_tensor({channels, T0}, -1, 1, g, false);
  const auto base = f(X);
  bool ok = true;
  for (std::size_t tp = 0; tp < T0; ++tp) {
    std::vector<double> xv(X.data().begin(), X.data().end());
    xv[tp] += 0.5;
    const auto Y = f(Tensor::from({channels, T0}, xv));
    for (std::size_t out = 0; out < Y.numel(); ++out) {
      const std::size_t t = out + rfs - 1;
      const bool inside = tp <= t && tp + rfs > t;
      if (!inside && Y.data()[out] != base.data()[out]) ok = false;
      if (tp + rfs == t + 1 && Y.data()[out] == base.data()[out]) ok = false;
    }
  }
  return ok;
}

Outcome receptive_fields() {
  Outcome o;
  std::mt19937_64 g(303);
  Rng rng(303);
  const auto ref = TcnSkipSpec::reference(3, 80, 1);
  const auto ref_rfs = receptive_field_size(ref);
  o.require(ref_rfs == 127, "reference RFS " + std::to_string(ref_rfs));
  const auto van = VanillaTcnSpec::with_dilation_factor(1, 4, 1, 4, 2, 2);
  const auto van_rfs = receptive_field_size(van);
  o.require(van_rfs == 16, "vanilla RFS " + std::to_string(van_rfs));

  auto ref_params = init_tcn(ref, rng);
  auto van_params = init_vanilla_tcn(van, rng);
  ad::NoGradGuard no_grad;
  o.require(causal([&](const Tensor& x) { return tcn_skip_forward(ref, ref_params, x); }, 3, ref_rfs, g),
            "reference TCN causality");
  o.require(causal([&](const Tensor& x) { return vanilla_tcn_forward(van, van_params, x); }, 1, van_rfs, g),
            "vanilla TCN causality");
  if (o.pass) o.detail = "RFS 127 and 16; outputs depend exactly on the last RFS inputs";
  return o;
}

Outcome lambert_w() {
  Outcome o;
  std::mt19937_64 g(404);
  double worst = 0.0;
  for (double delta : {0.0, 0.05, 0.2, 1.0}) {
    const LambertParams p{0.3, 1.7, delta};
    const auto x = quantgan::testing::uniform_values(10000, -6.0, 6.0, g);
    const auto y = lambert_forward(x, p);
    const auto back = lambert_inverse(y, p);
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::fabs(back[i] - x[i]));
  }
  o.require(worst < 1e-9, fmt("round-trip error %.2e", worst));

  Rng rng(405);
  auto u = rng.normals(100000);
  const auto y = lambert_forward(u, LambertParams{0.0, 1.0, 0.2});
  const auto fit = fit_lambert(y);
  o.require(fit.params.delta >= 0.17 && fit.params.delta <= 0.23, fmt("delta_hat %.4f", fit.params.delta));
  o.detail = fmt("max round-trip error %.2e, delta_hat %.4f", worst, fit.params.delta) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome garch_recovery() {
  Outcome o;
  const GarchParams truth{1e-5, 0.1, 0.85, 0.0};
  const auto r = garch_simulate(truth, 100000, 505);
  const auto fit = garch_fit(r);
  const double ea = std::fabs(fit.params.alpha / truth.alpha - 1.0);
  const double eb = std::fabs(fit.params.beta / truth.beta - 1.0);
  const double ev = std::fabs(fit.params.unconditional_variance() / truth.unconditional_variance() - 1.0);
  o.require(ea < 0.15, "alpha");
  o.require(eb < 0.15, "beta");
  o.require(ev < 0.05, "unconditional variance");
  o.detail = fmt("rel err alpha %.3f beta %.3f", ea, eb) + fmt(" variance %.3f", ev) + (o.pass ? "" : " (" + o.detail + ")");
  return o;
}

Outcome martingale() {
  Outcome o;
  const std::size_t paths = 100000, T = 50;
  const SpotPathConfig cfg{100.0, 0.0002};
  std::mt19937_64 g(606);
  std::string worst;
  double worst_z = 0.0;
  for (int k = 0; k < 5; ++k) {
    Rng rng(g());
    auto gen = Generator::create(GeneratorKind::ConstrainedSvnn, TcnSkipSpec::dilated(3, 4, 2, 2), rng);
    randomize(gen.params, g, 0.8);
    // daily-scale volatility and drift heads
    for (auto name : {"output.weight", "output.bias"})
      for (auto& v : gen.params.get(name).mutable_data()) v *= 0.02;
    std::vector<double> terminal;
    terminal.reserve(paths);
    for (const auto& p : generate_paths(gen, paths, T, 7000 + 1000000 * k)) {
      auto rn = risk_neutral_correct(p.returns, p.sigma, p.mu, cfg.rate, RiskNeutralMode::ClosedForm);
      terminal.push_back(spot_path(rn, cfg, true).back());
    }
    const double m = stats::mean(terminal) / cfg.s0;
    const double se = stats::stddev(terminal) / cfg.s0 / std::sqrt(static_cast<double>(paths));
    const double z = std::fabs(m - 1.0) / se;
    o.require(z < 3.0, fmt("parameterization %.0f: |mean/S0 - 1| = %.2e, stderr %.2e", k, std::fabs(m - 1.0), se));
    worst_z = std::max(worst_z, z);
  }
  o.detail = fmt("5 parameterizations x 1e5 paths, worst |mean/S0 - 1| / stderr = %.2f", worst_z) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome metric_sanity() {
  Outcome o;
  Rng rng(707);
  auto x = rng.normals(100000);
  o.require(emd_1d(x, x) == 0.0, "EMD(X,X) != 0");
  double worst_shift = 0.0;
  for (double shift : {0.25, 0.5, 1.0}) {
    auto y = rng.normals(100000);
    for (double& v : y) v += shift;
    worst_shift = std::max(worst_shift, std::fabs(emd_1d(x, y) - shift));
  }
  o.require(worst_shift < 0.02, fmt("EMD shift error %.4f", worst_shift));

  auto hist = rng.normals(4000);
  std::vector<std::vector<double>> copies(4, hist);
  for (auto f : {Transform::Identity, Transform::Abs, Transform::Square})
    o.require(acf_score(hist, copies, f, 250) == 0.0, "ACF score on identical ensemble");
  o.require(leverage_score(hist, copies, 250) == 0.0, "leverage score on identical ensemble");

  auto shifted_x = x;
  for (double& v : shifted_x) v += 0.5;
  const double self = dy_metric_lagged(x, x), apart = dy_metric_lagged(x, shifted_x);
  o.require(self < 0.01 * apart, fmt("DY self comparison %.2f vs %.2f shifted", self, apart));
  std::size_t ordered = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a(800 + s), b(900 + s), c(1000 + s);
    auto h = a.normals(20000), same = b.normals(20000), shifted = c.normals(20000);
    for (double& v : shifted) v += 1.0;
    ordered += dy_metric_lagged(h, same) < dy_metric_lagged(h, shifted);
  }
  o.require(ordered == 20, "DY ordering held for " + std::to_string(ordered) + " of 20 seeds");
  o.detail = fmt("EMD shift error %.4f, DY self %.2f vs %.0f shifted", worst_shift, self, apart) + fmt(", DY ordering %.0f/20", double(ordered)) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// ---------------------------------------------------------------------------

RunConfig small_run(const fs::path& dir, const fs::path& data, std::uint64_t seed) {
  return run_config_from_json({{"seed", seed},
                               {"data", data.string()},
                               {"out", dir.string()},
                               {"generator", {{"hidden", 6}, {"levels", 2}}},
                               {"discriminator", {{"hidden", 6}, {"levels", 2}}},
                               {"gan", {{"batch_size", 16}, {"generator_updates", 40}, {"checkpoint_interval", 20}}},
                               {"metrics", {{"lags", {1, 5}}, {"max_lag", 20}, {"num_paths", 8}, {"path_length", 300}}},
                               {"generate", {{"paths", 4}, {"length", 100}}}});
}

Outcome determinism() {
  Outcome o;
  const auto dir = scratch("determinism");
  write_garch_prices(dir / "prices.csv", 1200, 909);
  for (const char* run : {"a", "b"}) {
    for (auto model : {"pure_tcn", "c_svnn"}) {
      auto j = to_json(small_run(dir / run / model, dir / "prices.csv", 17));
      j["model"] = model;
      j["generator"] = {{"hidden", 6}, {"levels", 2}};
      auto cfg = run_config_from_json(j);
      cmd_preprocess(cfg);
      cmd_train(cfg);
      cmd_generate(cfg);
      cmd_evaluate(cfg);
      cmd_garch(cfg);
    }
  }
  std::size_t compared = 0;
  for (auto model : {"pure_tcn", "c_svnn"})
    for (const char* f : {"training_log.csv", "checkpoint.bin", "checkpoints/step_000020.bin", "returns.csv", "prices.csv",
                          "metrics.json", "metrics.csv", "pipeline.json", "dataset.csv", "garch/metrics.json",
                          "garch/params.json", "plots/acf_square.csv"}) {
      const auto a = dir / "a" / model / f, b = dir / "b" / model / f;
      if (!fs::exists(a)) {
        o.require(false, std::string("missing ") + model + "/" + f);
        continue;
      }
      o.require(file_bytes(a) == file_bytes(b), std::string(model) + "/" + f + " differs");
      ++compared;
    }
  // a different seed must change the trajectory
  auto other = small_run(dir / "c", dir / "prices.csv", 18);
  cmd_train(other);
  o.require(file_bytes(dir / "c" / "training_log.csv") != file_bytes(dir / "a" / "pure_tcn" / "training_log.csv"),
            "seed has no effect");
  if (o.pass) o.detail = std::to_string(compared) + " output files byte-identical across two runs";
  fs::remove_all(dir);
  return o;
}

Outcome pipeline_invertibility() {
  Outcome o;
  const auto dir = scratch("invert");
  write_garch_prices(dir / "prices.csv", 1500, 1010);
  auto cfg = small_run(dir / "run", dir / "prices.csv", 23);
  cmd_preprocess(cfg);
  cmd_train(cfg);
  cmd_generate(cfg);

  const auto ckpt = load_checkpoint(dir / "run" / "checkpoint.bin");
  o.require(ckpt.pipeline.has_value(), "checkpoint carries no pipeline");
  const auto normalized = generate_paths(ckpt.generator, cfg.generate.num_paths, cfg.generate.length,
                                         stream_seed(cfg, SeedStream::Generate));
  std::ifstream pin(dir / "run" / "prices.csv");
  const auto prices = read_paths_csv(pin, "price");
  o.require(prices.size() == normalized.size(), "path count");
  double worst = 0.0;
  bool valid = true;
  for (std::size_t k = 0; k < std::min(prices.size(), normalized.size()); ++k) {
    for (double p : prices[k]) valid &= std::isfinite(p) && p > 0.0;
    const auto again = ckpt.pipeline->apply(log_returns(prices[k]));
    if (again.size() != normalized[k].returns.size()) {
      valid = false;
      continue;
    }
    for (std::size_t t = 0; t < again.size(); ++t) worst = std::max(worst, std::fabs(again[t] - normalized[k].returns[t]));
  }
  o.require(valid, "invalid price path");
  o.require(worst < 1e-8, fmt("re-preprocessing error %.2e", worst));
  o.detail = fmt("%.0f price paths positive and finite, max re-preprocessing error %.2e", double(prices.size()), worst) +
             (o.pass ? "" : "; " + o.detail);
  fs::remove_all(dir);
  return o;
}

struct Scores {
  double emd1;
  double acf_square;
};

Scores score(std::span<const double> hist, const std::vector<std::vector<double>>& paths, std::size_t S) {
  MetricConfig mc;
  mc.lags = {1};
  mc.max_lag = S;
  mc.num_paths = paths.size();
  mc.path_length = paths.front().size();
  const auto rep = evaluate_paths(hist, paths, mc, "model");
  return {rep.emd[0], rep.acf_square};
}

std::vector<std::vector<double>> sample(const Generator& g, const PipelineState* state, std::size_t n, std::size_t len) {
  std::vector<std::vector<double>> out;
  for (auto& p : generate_paths(g, n, len, 99)) out.push_back(state ? state->invert(p.returns) : std::move(p.returns));
  return out;
}

GanConfig smoke_gan(std::uint64_t seed, std::size_t discriminator_steps) {
  GanConfig cfg;
  cfg.generator_updates = 2000;
  cfg.batch_size = 64;
  cfg.generator_lr = 1e-4;
  cfg.discriminator_lr = 1e-3;
  cfg.r1_weight = 0.1;
  cfg.discriminator_steps = discriminator_steps;
  cfg.seed = seed;
  return cfg;
}

Outcome end_to_end_training() {
  Outcome o;
  constexpr std::size_t kPaths = 100, kLength = 2000, kAcfLags = 100;
  std::string summary;

  // i.i.d. standard normal windows, pure TCN
  {
    Rng data(2), init(1);
    const auto series = data.normals(5000);
    auto gen = Generator::create(GeneratorKind::PureTcn, TcnSkipSpec::dilated(3, 8, 1, 3), init);
    auto disc = Discriminator::create(TcnSkipSpec::dilated(1, 8, 1, 3), init);
    const auto log = train(gen, disc, series, smoke_gan(4, 1));
    o.require(!log.aborted, "normal run aborted");
    const double emd = score(series, sample(gen, nullptr, kPaths, kLength), kAcfLags).emd1;
    o.require(emd < 0.05, "normal EMD(1) not below 0.05");
    summary = fmt("normal EMD(1) %.4f", emd);
  }

  // GARCH(1,1) data, constrained SVNN, against its untrained self and a misfit GARCH
  const auto hist = garch_simulate({1e-5, 0.1, 0.85, 0.0}, 5000, 3);
  const auto pre = preprocess_returns(hist);
  Rng init(3);
  auto gen = Generator::create(GeneratorKind::ConstrainedSvnn, TcnSkipSpec::dilated(3, 16, 2, 3), init);
  auto disc = Discriminator::create(TcnSkipSpec::dilated(1, 16, 1, 3), init);
  const auto untrained = score(hist, sample(gen, &pre.state, kPaths, kLength), kAcfLags);
  const auto log = train(gen, disc, pre.values, smoke_gan(6, 3));
  o.require(!log.aborted, "GARCH run aborted");
  const auto trained = score(hist, sample(gen, &pre.state, kPaths, kLength), kAcfLags);

  MetricConfig mc;
  mc.lags = {1};
  mc.max_lag = kAcfLags;
  mc.num_paths = kPaths;
  mc.path_length = kLength;
  const auto misfit_rep = evaluate_garch(hist, {1e-4, 0.02, 0.5, 0.001}, mc, 7, "misfit");
  const Scores misfit{misfit_rep.emd[0], misfit_rep.acf_square};

  o.require(trained.emd1 < untrained.emd1, "EMD(1) not below untrained");
  o.require(trained.acf_square < untrained.acf_square, "ACF(r^2) not below untrained");
  o.require(trained.emd1 < misfit.emd1, "EMD(1) not below misfit GARCH");
  o.require(trained.acf_square < misfit.acf_square, "ACF(r^2) not below misfit GARCH");
  summary += fmt("; EMD(1) trained %.5f untrained %.5f misfit %.5f", trained.emd1, untrained.emd1, misfit.emd1) +
              fmt("; ACF(r^2) trained %.4f untrained %.4f misfit %.4f", trained.acf_square, untrained.acf_square,
                  misfit.acf_square);
  o.detail = summary + (o.pass ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "gradient correctness", gradient_correctness},
      {2, "convolution oracle", convolution_oracle},
      {3, "receptive field and causality", receptive_fields},
      {4, "Lambert W round trip and recovery", lambert_w},
      {5, "GARCH recovery", garch_recovery},
      {6, "risk-neutral martingale", martingale},
      {7, "metric sanity", metric_sanity},
      {8, "end-to-end training", end_to_end_training},
      {9, "determinism", determinism},
      {10, "pipeline invertibility", pipeline_invertibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%s) [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
