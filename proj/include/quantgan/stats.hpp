#pragma once

#include <span>
#include <vector>

namespace quantgan::stats {

double mean(std::span<const double> x);
/// Sample variance with the n-1 denominator.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
/// Sample excess kurtosis (population moment ratio minus 3).
double excess_kurtosis(std::span<const double> x);
/// Pearson correlation; throws std::domain_error if either side is constant.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace quantgan::stats
