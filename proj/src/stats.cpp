#include "quantgan/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace quantgan::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least two observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("kurtosis needs at least four observations");
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) throw std::domain_error("kurtosis of constant series");
  return m4 / (m2 * m2) - 3.0;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("correlation needs two equal-length series of length >= 2");
  }
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw std::domain_error("correlation of a constant series");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace quantgan::stats
