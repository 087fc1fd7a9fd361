#ifndef MSHOM_STATS_HPP
#define MSHOM_STATS_HPP

#include <cstddef>
#include <vector>

namespace mshom {

double normal_cdf(double x);

// Two-sided Kolmogorov-Smirnov statistic of a sample against N(0, 1).
double ks_statistic(std::vector<double> sample);

// Asymptotic 5% critical value 1.36 / sqrt(n).
double ks_critical_5pct(std::size_t n);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

// Pearson correlation of two equal-length series.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace mshom

#endif
