#pragma once

// Adversarial training of a generator against a TCN discriminator with
// alternating Adam updates and an R1 gradient penalty on real windows.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quantgan/autodiff.hpp"
#include "quantgan/generators.hpp"
#include "quantgan/networks.hpp"
#include "quantgan/random.hpp"

namespace quantgan {

struct Discriminator {
  TcnSkipSpec tcn;
  ParamStore params;

  /// Needs one input and one output channel.
  static Discriminator create(TcnSkipSpec tcn, Rng& rng);
  /// Hidden width 80, receptive field 127.
  static Discriminator reference(Rng& rng);

  /// Window length T^(d), equal to the receptive field.
  std::size_t window() const { return receptive_field_size(tcn); }
  /// Pre-sigmoid score d~(x). x is [1 x T^(d)] or [B x 1 x T^(d)]; output [1 x 1] or [B x 1 x 1].
  ad::Tensor logits(const ad::Tensor& x) const;
  /// sigmoid(d~(x)), strictly inside (0, 1).
  ad::Tensor forward(const ad::Tensor& x) const;
};

struct GanConfig {
  std::size_t batch_size = 64;
  std::size_t discriminator_steps = 1;
  double generator_lr = 2e-4;
  double discriminator_lr = 2e-4;
  std::size_t generator_updates = 1000;
  std::uint64_t seed = 0;
  double r1_weight = 1.0;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  double log_clamp = 1e-12;
  /// Minimize +mean log d(fake) as literally written instead of the non-saturating -mean log d(fake).
  bool literal_generator_loss = false;
  /// Generator updates between checkpoint callbacks; 0 disables periodic callbacks.
  std::size_t checkpoint_interval = 0;

  void validate() const;
};

nlohmann::json to_json(const GanConfig& c);
GanConfig gan_config_from_json(const nlohmann::json& j);

/// (1/M) sum [log d(x_i) + log(1 - d(x~_i))], to be maximized. Log arguments are clamped below.
ad::Tensor loss_discriminator(const Discriminator& d, const ad::Tensor& real, const ad::Tensor& fake,
                              double log_clamp = 1e-12);
/// -(1/M) sum log d(x~_i), to be minimized (or +(1/M) sum log d(x~_i) when literal).
ad::Tensor loss_generator(const Discriminator& d, const ad::Tensor& fake, double log_clamp = 1e-12,
                          bool literal = false);
/// (gamma/2)(1/M) sum ||grad_x d~(x_i)||^2. The returned scalar has that value
/// and its gradient with respect to the discriminator parameters is the
/// gradient of the penalty; it carries no gradient to `real`.
ad::Tensor r1_penalty(const Discriminator& d, const ad::Tensor& real, double gamma);

struct StepRecord {
  std::size_t step = 0;
  double discriminator_loss = 0.0;  ///< objective value (to maximize) of the last discriminator step
  double generator_loss = 0.0;
  double r1 = 0.0;
  double discriminator_grad_norm = 0.0;
  double generator_grad_norm = 0.0;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  /// Seconds since training started, one entry per step. Kept out of write_csv.
  std::vector<double> wall_clock;
  std::vector<nlohmann::json> snapshots;
  bool aborted = false;
  std::string abort_reason;

  void write_csv(std::ostream& out) const;
  void write_timing_csv(std::ostream& out) const;
};

struct TrainingState {
  std::size_t step = 0;
  const Generator& generator;
  const Discriminator& discriminator;
  TrainingLog& log;
};

struct TrainHooks {
  /// Called every checkpoint_interval generator updates and once at the end.
  std::function<void(const TrainingState&)> on_checkpoint;
};

/// Stacks windows of `series` starting at the given indices into [B x 1 x width].
ad::Tensor gather_windows(std::span<const double> series, std::span<const std::size_t> starts, std::size_t width);

/// Runs the alternating updates on rolling windows of `series` whose length is
/// the discriminator window. On a non-finite value the parameters are restored
/// to the last completed step and the log is marked aborted.
TrainingLog train(Generator& gen, Discriminator& disc, std::span<const double> series, const GanConfig& cfg,
                  const TrainHooks& hooks = {});

}  // namespace quantgan
