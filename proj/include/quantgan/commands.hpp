#pragma once

// The pipeline commands behind the CLI. Each one writes into RunConfig::out
// and echoes the full configuration there as config.json.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "quantgan/checkpoint.hpp"
#include "quantgan/evaluation.hpp"
#include "quantgan/garch.hpp"
#include "quantgan/generators.hpp"
#include "quantgan/io.hpp"
#include "quantgan/preprocessing.hpp"
#include "quantgan/training.hpp"

namespace quantgan {

/// Child seeds for the independent random streams of a run.
enum class SeedStream : std::uint64_t { Init = 0, Generate = 3, Evaluate = 4, GarchSimulate = 5 };
std::uint64_t stream_seed(const RunConfig& cfg, SeedStream s);

/// Writes pipeline.json, dataset.csv (t,log_return,value) and preprocess.json.
Preprocessed cmd_preprocess(const RunConfig& cfg);

/// Writes checkpoint.bin, checkpoints/step_*.bin every gan.checkpoint_interval
/// updates, training_log.csv and timing.csv.
TrainingLog cmd_train(const RunConfig& cfg);

/// `checkpoint` if given, else RunConfig::checkpoint, else out/checkpoint.bin.
std::filesystem::path resolve_checkpoint(const RunConfig& cfg);

/// Normalized model output mapped back to log returns through the stored pipeline.
std::vector<std::vector<double>> sample_log_returns(const Checkpoint& ckpt, std::size_t num_paths, std::size_t length,
                                                    std::uint64_t seed, std::size_t threads = 1);

/// Writes returns.csv (path_id,t,log_return) and prices.csv (path_id,t,price).
void cmd_generate(const RunConfig& cfg);

/// Writes metrics.json, metrics.csv and plot data under plots/.
MetricsReport cmd_evaluate(const RunConfig& cfg);

/// Simulates num_paths GARCH paths (path i from seed + i) and scores them.
MetricsReport evaluate_garch(std::span<const double> hist, const GarchParams& p, const MetricConfig& metrics,
                             std::uint64_t seed, const std::string& model = "garch");

/// Fits on the historical log returns; writes garch/params.json, garch/metrics.json,
/// garch/metrics.csv and garch/plots/.
MetricsReport cmd_garch(const RunConfig& cfg);

/// Plot data for a generated ensemble: histograms per lag, ACF curves, leverage and sample log paths.
void write_plot_data(const std::filesystem::path& dir, std::span<const double> hist,
                     const std::vector<std::vector<double>>& paths, const MetricConfig& metrics);

}  // namespace quantgan
