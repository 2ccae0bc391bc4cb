#include "quantgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "quantgan/stats.hpp"

namespace quantgan {

std::vector<double> lagged_returns(std::span<const double> r, std::size_t t, bool overlapping) {
  if (t == 0) throw std::invalid_argument("lagged_returns: lag must be positive");
  if (t > r.size())
    throw std::invalid_argument("lagged_returns: lag " + std::to_string(t) + " exceeds series length " +
                                std::to_string(r.size()));
  std::vector<double> out;
  if (overlapping) {
    out.reserve(r.size() - t + 1);
    for (std::size_t k = 0; k + t <= r.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = k; i < k + t; ++i) s += r[i];
      out.push_back(s);
    }
  } else {
    for (std::size_t k = 0; k + t <= r.size(); k += t) {
      double s = 0.0;
      for (std::size_t i = k; i < k + t; ++i) s += r[i];
      out.push_back(s);
    }
  }
  return out;
}

double emd_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("emd_1d: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
    total += std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

std::size_t DyPartition::bin_of(double x) const {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
}

DyPartition dy_partition(std::span<const double> hist, std::size_t bin_size) {
  if (bin_size == 0) throw std::invalid_argument("dy_partition: bin size must be positive");
  if (hist.size() < bin_size)
    throw std::invalid_argument("dy: need at least " + std::to_string(bin_size) + " historical observations");
  std::vector<double> h(hist.begin(), hist.end());
  std::sort(h.begin(), h.end());
  DyPartition p;
  const std::size_t bins = h.size() / bin_size;
  for (std::size_t k = 1; k < bins; ++k) {
    const std::size_t i = k * bin_size;
    p.edges.push_back(0.5 * (h[i - 1] + h[i]));
  }
  // ties can collapse neighbouring edges; an empty bin would have zero mass
  p.edges.erase(std::unique(p.edges.begin(), p.edges.end()), p.edges.end());
  return p;
}

double dy_metric_lagged(std::span<const double> hist, std::span<const double> gen, std::size_t bin_size,
                        bool smoothing) {
  const auto part = dy_partition(hist, bin_size);
  if (gen.empty()) throw std::invalid_argument("dy: empty generated sample");
  const std::size_t nb = part.num_bins();
  std::vector<double> ch(nb, 0.0), cg(nb, 0.0);
  for (double v : hist) ch[part.bin_of(v)] += 1.0;
  for (double v : gen) cg[part.bin_of(v)] += 1.0;
  const double nh = static_cast<double>(hist.size());
  const double ng = static_cast<double>(gen.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const double ph = ch[k] / nh;
    const double pg = smoothing ? (cg[k] + 1.0) / (ng + static_cast<double>(nb)) : cg[k] / ng;
    total += std::fabs(std::log(ph) - std::log(pg));
  }
  return total;
}

double dy_metric(std::span<const double> hist, std::span<const double> gen, std::size_t t,
                 std::size_t bin_size, bool smoothing) {
  return dy_metric_lagged(lagged_returns(hist, t), lagged_returns(gen, t), bin_size, smoothing);
}

std::vector<double> acf(std::span<const double> r, std::size_t S) {
  if (r.size() <= S) throw std::invalid_argument("acf: series must be longer than the maximum lag");
  std::vector<double> out(S);
  for (std::size_t tau = 1; tau <= S; ++tau)
    out[tau - 1] = stats::correlation(r.first(r.size() - tau), r.subspan(tau));
  return out;
}

std::string to_string(Transform f) {
  switch (f) {
    case Transform::Identity: return "id";
    case Transform::Abs: return "abs";
    case Transform::Square: return "square";
  }
  return "id";
}

std::vector<double> apply_transform(std::span<const double> r, Transform f) {
  std::vector<double> out(r.begin(), r.end());
  if (f == Transform::Abs) for (double& v : out) v = std::fabs(v);
  if (f == Transform::Square) for (double& v : out) v = v * v;
  return out;
}

namespace {

// Averages target - c_i rather than subtracting the mean curve so identical
// curves give exactly zero.
double l2_distance_to_mean(const std::vector<double>& target, const std::vector<std::vector<double>>& curves) {
  std::vector<double> diff(target.size(), 0.0);
  for (const auto& c : curves)
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] += target[k] - c[k];
  double s = 0.0;
  for (double d : diff) {
    d /= static_cast<double>(curves.size());
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::vector<double>> per_path(const std::vector<std::vector<double>>& paths,
                                          const std::function<std::vector<double>(std::span<const double>)>& fn) {
  if (paths.empty()) throw std::invalid_argument("score: empty generated ensemble");
  std::vector<std::vector<double>> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(fn(p));
  return out;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void write_curve_csv(std::ostream& out, const std::vector<double>& hist,
                     const std::vector<std::vector<double>>& curves) {
  out << "lag,historical,generated_mean,generated_q05,generated_q95\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < hist.size(); ++k) {
    std::vector<double> col;
    col.reserve(curves.size());
    for (const auto& c : curves) col.push_back(c[k]);
    out << k + 1 << ',' << hist[k] << ',' << stats::mean(col) << ',' << quantile(col, 0.05) << ','
        << quantile(col, 0.95) << '\n';
  }
  out.precision(old);
}

}  // namespace

double acf_score(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths, Transform f,
                 std::size_t S) {
  auto curve = [&](std::span<const double> r) { return acf(apply_transform(r, f), S); };
  return l2_distance_to_mean(curve(hist), per_path(gen_paths, curve));
}

std::vector<double> leverage_effect(std::span<const double> r, std::size_t S) {
  if (r.size() <= S) throw std::invalid_argument("leverage_effect: series must be longer than the maximum lag");
  const auto sq = apply_transform(r, Transform::Square);
  std::vector<double> out(S);
  for (std::size_t tau = 1; tau <= S; ++tau)
    out[tau - 1] = stats::correlation(std::span<const double>(sq).subspan(tau), r.first(r.size() - tau));
  return out;
}

double leverage_score(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths,
                      std::size_t S) {
  auto curve = [&](std::span<const double> r) { return leverage_effect(r, S); };
  return l2_distance_to_mean(curve(hist), per_path(gen_paths, curve));
}

void MetricConfig::validate() const {
  if (lags.empty()) throw std::invalid_argument("metric config: no lags");
  for (auto l : lags)
    if (l == 0) throw std::invalid_argument("metric config: lags must be positive");
  if (max_lag == 0 || num_paths == 0 || path_length == 0 || dy_bin_size == 0)
    throw std::invalid_argument("metric config: sizes must be positive");
  if (max_lag >= path_length) throw std::invalid_argument("metric config: max_lag must be below path_length");
}

nlohmann::json to_json(const MetricConfig& c) {
  return {{"lags", c.lags},
          {"max_lag", c.max_lag},
          {"num_paths", c.num_paths},
          {"path_length", c.path_length},
          {"dy_bin_size", c.dy_bin_size},
          {"overlapping", c.overlapping}};
}

MetricConfig metric_config_from_json(const nlohmann::json& j) {
  MetricConfig c;
  c.lags = j.value("lags", c.lags);
  c.max_lag = j.value("max_lag", c.max_lag);
  c.num_paths = j.value("num_paths", c.num_paths);
  c.path_length = j.value("path_length", c.path_length);
  c.dy_bin_size = j.value("dy_bin_size", c.dy_bin_size);
  c.overlapping = j.value("overlapping", c.overlapping);
  c.validate();
  return c;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json emd = nlohmann::json::object(), dy = nlohmann::json::object();
  for (std::size_t k = 0; k < r.lags.size(); ++k) {
    emd[std::to_string(r.lags[k])] = r.emd[k];
    dy[std::to_string(r.lags[k])] = r.dy[k];
  }
  return {{"model", r.model},
          {"seed", r.seed},
          {"lags", r.lags},
          {"emd", emd},
          {"dy", dy},
          {"acf_score", {{"id", r.acf_id}, {"abs", r.acf_abs}, {"square", r.acf_square}}},
          {"leverage_score", r.leverage}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.model = j.at("model").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.lags = j.at("lags").get<std::vector<std::size_t>>();
  for (auto l : r.lags) {
    r.emd.push_back(j.at("emd").at(std::to_string(l)).get<double>());
    r.dy.push_back(j.at("dy").at(std::to_string(l)).get<double>());
  }
  r.acf_id = j.at("acf_score").at("id").get<double>();
  r.acf_abs = j.at("acf_score").at("abs").get<double>();
  r.acf_square = j.at("acf_score").at("square").get<double>();
  r.leverage = j.at("leverage_score").get<double>();
  return r;
}

void write_report_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  if (reports.empty()) return;
  const auto& lags = reports.front().lags;
  out << "model";
  for (auto l : lags) out << ",emd_" << l;
  for (auto l : lags) out << ",dy_" << l;
  out << ",acf_id,acf_abs,acf_square,leverage\n";
  const auto old = out.precision(17);
  for (const auto& r : reports) {
    if (r.lags != lags) throw std::invalid_argument("write_report_csv: reports use different lags");
    out << r.model;
    for (double v : r.emd) out << ',' << v;
    for (double v : r.dy) out << ',' << v;
    out << ',' << r.acf_id << ',' << r.acf_abs << ',' << r.acf_square << ',' << r.leverage << '\n';
  }
  out.precision(old);
}

MetricsReport evaluate_paths(std::span<const double> hist, const std::vector<std::vector<double>>& gen_paths,
                             const MetricConfig& cfg, std::string model, std::uint64_t seed) {
  cfg.validate();
  if (gen_paths.empty()) throw std::invalid_argument("evaluate: no generated paths");
  MetricsReport rep;
  rep.model = std::move(model);
  rep.seed = seed;
  rep.lags = cfg.lags;
  for (auto lag : cfg.lags) {
    const auto h = lagged_returns(hist, lag, cfg.overlapping);
    std::vector<double> pooled;
    for (const auto& p : gen_paths) {
      const auto g = lagged_returns(p, lag, cfg.overlapping);
      pooled.insert(pooled.end(), g.begin(), g.end());
    }
    rep.emd.push_back(emd_1d(h, pooled));
    rep.dy.push_back(dy_metric_lagged(h, pooled, cfg.dy_bin_size));
  }
  rep.acf_id = acf_score(hist, gen_paths, Transform::Identity, cfg.max_lag);
  rep.acf_abs = acf_score(hist, gen_paths, Transform::Abs, cfg.max_lag);
  rep.acf_square = acf_score(hist, gen_paths, Transform::Square, cfg.max_lag);
  rep.leverage = leverage_score(hist, gen_paths, cfg.max_lag);
  return rep;
}

MetricsReport evaluate_model(std::span<const double> hist, const PathSampler& sampler, const MetricConfig& cfg,
                             std::string model, std::uint64_t seed) {
  cfg.validate();
  return evaluate_paths(hist, sampler(cfg.num_paths, cfg.path_length), cfg, std::move(model), seed);
}

void write_histogram_csv(std::ostream& out, std::span<const double> hist,
                         const std::vector<std::vector<double>>& gen_paths, std::size_t lag, std::size_t bins,
                         bool overlapping) {
  if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
  const auto h = lagged_returns(hist, lag, overlapping);
  std::vector<double> g;
  for (const auto& p : gen_paths) {
    const auto l = lagged_returns(p, lag, overlapping);
    g.insert(g.end(), l.begin(), l.end());
  }
  double lo = *std::min_element(h.begin(), h.end()), hi = *std::max_element(h.begin(), h.end());
  if (!g.empty()) {
    lo = std::min(lo, *std::min_element(g.begin(), g.end()));
    hi = std::max(hi, *std::max_element(g.begin(), g.end()));
  }
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  auto count = [&](const std::vector<double>& v) {
    std::vector<double> c(bins, 0.0);
    for (double x : v) {
      auto k = static_cast<std::size_t>((x - lo) / width);
      c[std::min(k, bins - 1)] += 1.0;
    }
    for (double& x : c) x = v.empty() ? 0.0 : x / (static_cast<double>(v.size()) * width);
    return c;
  };
  const auto ch = count(h), cg = count(g);
  out << "bin_left,bin_right,historical_density,generated_density\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < bins; ++k)
    out << lo + width * static_cast<double>(k) << ',' << lo + width * static_cast<double>(k + 1) << ',' << ch[k]
        << ',' << cg[k] << '\n';
  out.precision(old);
}

void write_acf_csv(std::ostream& out, std::span<const double> hist,
                   const std::vector<std::vector<double>>& gen_paths, Transform f, std::size_t S) {
  auto curve = [&](std::span<const double> r) { return acf(apply_transform(r, f), S); };
  write_curve_csv(out, curve(hist), per_path(gen_paths, curve));
}

void write_leverage_csv(std::ostream& out, std::span<const double> hist,
                        const std::vector<std::vector<double>>& gen_paths, std::size_t S) {
  auto curve = [&](std::span<const double> r) { return leverage_effect(r, S); };
  write_curve_csv(out, curve(hist), per_path(gen_paths, curve));
}

void write_log_paths_csv(std::ostream& out, std::span<const double> hist,
                         const std::vector<std::vector<double>>& gen_paths, std::size_t max_paths) {
  const std::size_t k = std::min(max_paths, gen_paths.size());
  std::size_t T = hist.size();
  for (std::size_t p = 0; p < k; ++p) T = std::max(T, gen_paths[p].size());
  out << "t,historical";
  for (std::size_t p = 0; p < k; ++p) out << ",path_" << p;
  out << '\n';
  const auto old = out.precision(17);
  std::vector<double> cum(k + 1, 0.0);
  out << 0 << ",0";
  for (std::size_t p = 0; p < k; ++p) out << ",0";
  out << '\n';
  for (std::size_t t = 0; t < T; ++t) {
    out << t + 1 << ',';
    if (t < hist.size()) out << (cum[0] += hist[t]);
    for (std::size_t p = 0; p < k; ++p) {
      out << ',';
      if (t < gen_paths[p].size()) out << (cum[p + 1] += gen_paths[p][t]);
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace quantgan
