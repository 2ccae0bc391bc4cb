#include "quantgan/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "quantgan/optimize.hpp"
#include "quantgan/preprocessing.hpp"

namespace quantgan {

using ad::Tensor;

Discriminator Discriminator::create(TcnSkipSpec tcn, Rng& rng) {
  tcn.validate();
  if (tcn.input_channels() != 1 || tcn.output_channels != 1)
    throw std::invalid_argument("discriminator needs one input and one output channel");
  Discriminator d;
  d.params = init_tcn(tcn, rng);
  d.tcn = std::move(tcn);
  return d;
}

Discriminator Discriminator::reference(Rng& rng) { return create(TcnSkipSpec::reference(1, 80, 1), rng); }

Tensor Discriminator::logits(const Tensor& x) const {
  if (x.rank() < 2 || x.shape().back() != window())
    throw ad::ShapeError("discriminator: window length must be " + std::to_string(window()) + ", got " +
                         ad::shape_string(x.shape()));
  return tcn_skip_forward(tcn, params, x);
}

Tensor Discriminator::forward(const Tensor& x) const { return ad::sigmoid(logits(x)); }

void GanConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("gan config: batch_size must be >= 1");
  if (discriminator_steps == 0) throw std::invalid_argument("gan config: discriminator_steps must be >= 1");
  if (!(generator_lr > 0.0) || !(discriminator_lr > 0.0))
    throw std::invalid_argument("gan config: learning rates must be positive");
  if (!(r1_weight >= 0.0)) throw std::invalid_argument("gan config: r1_weight must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("gan config: Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("gan config: epsilon must be positive");
  if (!(log_clamp > 0.0 && log_clamp < 1.0)) throw std::invalid_argument("gan config: log_clamp must lie in (0, 1)");
}

nlohmann::json to_json(const GanConfig& c) {
  return {{"batch_size", c.batch_size},
          {"discriminator_steps", c.discriminator_steps},
          {"generator_lr", c.generator_lr},
          {"discriminator_lr", c.discriminator_lr},
          {"generator_updates", c.generator_updates},
          {"seed", c.seed},
          {"r1_weight", c.r1_weight},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"log_clamp", c.log_clamp},
          {"literal_generator_loss", c.literal_generator_loss},
          {"checkpoint_interval", c.checkpoint_interval}};
}

GanConfig gan_config_from_json(const nlohmann::json& j) {
  GanConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.discriminator_steps = j.value("discriminator_steps", c.discriminator_steps);
  c.generator_lr = j.value("generator_lr", c.generator_lr);
  c.discriminator_lr = j.value("discriminator_lr", c.discriminator_lr);
  c.generator_updates = j.value("generator_updates", c.generator_updates);
  c.seed = j.value("seed", c.seed);
  c.r1_weight = j.value("r1_weight", c.r1_weight);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.log_clamp = j.value("log_clamp", c.log_clamp);
  c.literal_generator_loss = j.value("literal_generator_loss", c.literal_generator_loss);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.validate();
  return c;
}

Tensor loss_discriminator(const Discriminator& d, const Tensor& real, const Tensor& fake, double log_clamp) {
  if (real.extent(0) != fake.extent(0)) throw ad::ShapeError("loss_discriminator: batch sizes differ");
  // log(1 - sigmoid(z)) = log sigmoid(-z)
  auto on_real = ad::mean(ad::clamped_log(ad::sigmoid(d.logits(real)), log_clamp));
  auto on_fake = ad::mean(ad::clamped_log(ad::sigmoid(ad::scalar_mul(d.logits(fake), -1.0)), log_clamp));
  return on_real + on_fake;
}

Tensor loss_generator(const Discriminator& d, const Tensor& fake, double log_clamp, bool literal) {
  auto m = ad::mean(ad::clamped_log(d.forward(fake), log_clamp));
  return literal ? m : ad::scalar_mul(m, -1.0);
}

Tensor r1_penalty(const Discriminator& d, const Tensor& real, double gamma) {
  if (gamma == 0.0) return Tensor::scalar(0.0);
  const std::size_t M = real.rank() == 3 ? real.extent(0) : 1;
  Tensor x = real.detach();
  x.set_requires_grad(true);
  std::vector<double> g;
  {
    ad::EnableGradGuard record;
    const Tensor inputs[] = {x};
    g = ad::gradients(ad::sum(d.logits(x)), inputs)[0];
  }
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double penalty = 0.5 * gamma * sq / static_cast<double>(M);

  // <grad_x d~(x), v> at v = g (held fixed) has parameter gradient (d g / d eta)^T g
  auto tangent = tcn_skip_tangent(d.tcn, d.params, x.detach(), Tensor::from(x.shape(), std::move(g)));
  auto surrogate = ad::scalar_mul(ad::sum(tangent), gamma / static_cast<double>(M));
  return ad::add_scalar(surrogate, penalty - surrogate.item());
}

void TrainingLog::write_csv(std::ostream& out) const {
  out << "step,discriminator_loss,generator_loss,r1,discriminator_grad_norm,generator_grad_norm\n";
  const auto old = out.precision(17);
  for (const auto& s : steps)
    out << s.step << ',' << s.discriminator_loss << ',' << s.generator_loss << ',' << s.r1 << ','
        << s.discriminator_grad_norm << ',' << s.generator_grad_norm << '\n';
  out.precision(old);
}

void TrainingLog::write_timing_csv(std::ostream& out) const {
  out << "step,seconds\n";
  for (std::size_t i = 0; i < wall_clock.size() && i < steps.size(); ++i)
    out << steps[i].step << ',' << wall_clock[i] << '\n';
}

Tensor gather_windows(std::span<const double> series, std::span<const std::size_t> starts, std::size_t width) {
  std::vector<double> data;
  data.reserve(starts.size() * width);
  for (auto s : starts) {
    if (s + width > series.size()) throw std::out_of_range("gather_windows: window exceeds series");
    data.insert(data.end(), series.begin() + static_cast<std::ptrdiff_t>(s),
                series.begin() + static_cast<std::ptrdiff_t>(s + width));
  }
  return Tensor::from({starts.size(), 1, width}, std::move(data));
}

namespace {

double grad_norm(const ParamStore& params) {
  double s = 0.0;
  for (const auto& e : params.entries())
    if (e.tensor.has_grad())
      for (double g : e.tensor.grad()) s += g * g;
  return std::sqrt(s);
}

}  // namespace

TrainingLog train(Generator& gen, Discriminator& disc, std::span<const double> series, const GanConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  const std::size_t width = disc.window();
  if (series.size() < width)
    throw std::invalid_argument("train: series of length " + std::to_string(series.size()) +
                                " is shorter than the discriminator window " + std::to_string(width));
  const std::size_t num_windows = series.size() - width + 1;
  if (num_windows < cfg.batch_size)
    throw std::invalid_argument("train: dataset has " + std::to_string(num_windows) +
                                " windows, fewer than the batch size " + std::to_string(cfg.batch_size));

  const WeightedWindowSampler sampler(num_windows, width);
  Rng data_rng(derive_seed(cfg.seed, 1));
  Rng noise_rng(derive_seed(cfg.seed, 2));
  const std::size_t M = cfg.batch_size;
  const std::size_t noise_len = gen.noise_length(width);

  Adam gen_opt(gen.params.tensors(), {cfg.generator_lr, cfg.beta1, cfg.beta2, cfg.epsilon});
  Adam disc_opt(disc.params.tensors(), {cfg.discriminator_lr, cfg.beta1, cfg.beta2, cfg.epsilon});

  auto real_batch = [&] {
    std::vector<std::size_t> starts(M);
    for (auto& s : starts) s = sampler.sample(data_rng);
    return gather_windows(series, starts, width);
  };
  auto noise_batch = [&] { return Tensor::from({M, gen.noise_dim(), noise_len}, noise_rng.normals(M * gen.noise_dim() * noise_len)); };

  TrainingLog log;
  ParamStore gen_good = gen.params.clone(), disc_good = disc.params.clone();
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t step = 1; step <= cfg.generator_updates; ++step) {
    StepRecord rec;
    rec.step = step;
    try {
      for (std::size_t k = 0; k < cfg.discriminator_steps; ++k) {
        Tensor real = real_batch();
        Tensor fake;
        {
          ad::NoGradGuard no_grad;
          fake = gen.returns(noise_batch());
        }
        disc.params.zero_grad();
        auto objective = loss_discriminator(disc, real, fake, cfg.log_clamp);
        auto loss = ad::scalar_mul(objective, -1.0);
        if (cfg.r1_weight > 0.0) {
          auto r1 = r1_penalty(disc, real, cfg.r1_weight);
          rec.r1 = r1.item();
          loss = loss + r1;
        }
        ad::backward(loss);
        rec.discriminator_loss = objective.item();
        rec.discriminator_grad_norm = grad_norm(disc.params);
        disc_opt.step();
      }

      gen.params.zero_grad();
      auto gloss = loss_generator(disc, gen.returns(noise_batch()), cfg.log_clamp, cfg.literal_generator_loss);
      ad::backward(gloss);
      rec.generator_loss = gloss.item();
      rec.generator_grad_norm = grad_norm(gen.params);
      gen_opt.step();
      disc.params.zero_grad();
      gen.params.zero_grad();

      for (const auto& e : gen.params.entries())
        for (double v : e.tensor.data())
          if (!std::isfinite(v)) throw ad::NumericError("generator parameter " + e.name + " is not finite");
      for (const auto& e : disc.params.entries())
        for (double v : e.tensor.data())
          if (!std::isfinite(v)) throw ad::NumericError("discriminator parameter " + e.name + " is not finite");
    } catch (const ad::NumericError& err) {
      gen.params.assign_values(gen_good);
      disc.params.assign_values(disc_good);
      gen.params.zero_grad();
      disc.params.zero_grad();
      log.aborted = true;
      log.abort_reason = "step " + std::to_string(step) + ": " + err.what();
      break;
    }

    log.steps.push_back(rec);
    log.wall_clock.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    gen_good.assign_values(gen.params);
    disc_good.assign_values(disc.params);

    if (hooks.on_checkpoint && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0 &&
        step != cfg.generator_updates)
      hooks.on_checkpoint({step, gen, disc, log});
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint({log.steps.size(), gen, disc, log});
  return log;
}

}  // namespace quantgan
