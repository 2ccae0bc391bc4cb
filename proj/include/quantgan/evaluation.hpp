#pragma once

// Distributional and dependence metrics comparing generated return paths to
// a historical series: EMD and DY at several aggregation lags, ACF scores for
// three transforms and the leverage-effect score.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace quantgan {

/// Sums of t consecutive returns. Overlapping (stride 1) gives T - t + 1 values;
/// non-overlapping gives floor(T / t).
std::vector<double> lagged_returns(std::span<const double> r, std::size_t t, bool overlapping = true);

/// Wasserstein-1 distance between two empirical distributions, integrated exactly.
double emd_1d(std::span<const double> a, std::span<const double> b);

/// Partition of the real line into consecutive bins that each hold `bin_size`
/// sorted historical values; the last bin takes the remainder. Edges are
/// midpoints between neighbouring values and the outer bins are unbounded.
struct DyPartition {
  std::vector<double> edges;
  std::size_t bin_of(double x) const;
  std::size_t num_bins() const { return edges.size() + 1; }
};

DyPartition dy_partition(std::span<const double> hist, std::size_t bin_size = 5);

/// Sum over bins of |log P^h - log P^g| on already lagged samples. Generated
/// counts are add-one smoothed unless `smoothing` is false.
double dy_metric_lagged(std::span<const double> hist, std::span<const double> gen,
                        std::size_t bin_size = 5, bool smoothing = true);
double dy_metric(std::span<const double> hist, std::span<const double> gen, std::size_t t,
                 std::size_t bin_size = 5, bool smoothing = true);

/// Entry tau - 1 is Corr(r_{1..T-tau}, r_{1+tau..T}) for tau = 1..S.
std::vector<double> acf(std::span<const double> r, std::size_t S);

enum class Transform { Identity, Abs, Square };

std::string to_string(Transform f);
std::vector<double> apply_transform(std::span<const double> r, Transform f);

/// || C(f(hist)) - (1/M) sum_i C(f(gen_i)) ||_2 over lags 1..S.
double acf_score(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths,
                 Transform f, std::size_t S);

/// Entry tau - 1 is Corr(r^2_{t+tau}, r_t) for tau = 1..S.
std::vector<double> leverage_effect(std::span<const double> r, std::size_t S);
double leverage_score(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths,
                      std::size_t S);

struct MetricConfig {
  std::vector<std::size_t> lags{1, 5, 20, 100};
  std::size_t max_lag = 250;
  std::size_t num_paths = 500;
  std::size_t path_length = 4000;
  std::size_t dy_bin_size = 5;
  bool overlapping = true;

  void validate() const;
};

nlohmann::json to_json(const MetricConfig& c);
MetricConfig metric_config_from_json(const nlohmann::json& j);

struct MetricsReport {
  std::string model;
  std::uint64_t seed = 0;
  std::vector<std::size_t> lags;
  std::vector<double> emd;
  std::vector<double> dy;
  double acf_id = 0.0;
  double acf_abs = 0.0;
  double acf_square = 0.0;
  double leverage = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& r);
MetricsReport metrics_report_from_json(const nlohmann::json& j);
/// Header and one row in the order EMD(lags), DY(lags), ACF(id), ACF(abs), ACF(sq), leverage.
void write_report_csv(std::ostream& out, const std::vector<MetricsReport>& reports);

/// Returns `num_paths` paths of `length` returns.
using PathSampler = std::function<std::vector<std::vector<double>>(std::size_t num_paths, std::size_t length)>;

/// EMD and DY pool the lagged returns of every generated path.
MetricsReport evaluate_paths(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths,
                             const MetricConfig& cfg, std::string model = "", std::uint64_t seed = 0);
MetricsReport evaluate_model(std::span<const double> hist, const PathSampler& sampler,
                             const MetricConfig& cfg, std::string model = "", std::uint64_t seed = 0);

/// Plot data for external rendering; each writer emits a CSV with a header row.
/// Histogram of historical and pooled generated lagged returns on shared bins.
void write_histogram_csv(std::ostream& out, std::span<const double> hist,
                         const std::vector<std::vector<double>>& gen_paths, std::size_t lag,
                         std::size_t bins = 80, bool overlapping = true);
/// Columns lag,historical,generated_mean,generated_q05,generated_q95.
void write_acf_csv(std::ostream& out, std::span<const double> hist,
                   const std::vector<std::vector<double>>& gen_paths, Transform f, std::size_t S);
void write_leverage_csv(std::ostream& out, std::span<const double> hist,
                        const std::vector<std::vector<double>>& gen_paths, std::size_t S);
/// Cumulative log paths: columns t,historical,path_0..path_{k-1}.
void write_log_paths_csv(std::ostream& out, std::span<const double> hist,
                         const std::vector<std::vector<double>>& gen_paths, std::size_t max_paths = 50);

}  // namespace quantgan
