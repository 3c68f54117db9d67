#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dmac::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
double correlation(std::span<const double> a, std::span<const double> b);

// One-sample Kolmogorov-Smirnov distance against a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_uniform(std::vector<double> samples, double lo, double hi);
// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Plug-in histogram differential entropy in bits with Miller-Madow bias
// correction; bins span [lo, hi).
double histogram_entropy_bits(std::span<const double> samples, int bins, double lo, double hi);

}  // namespace dmac::stats
