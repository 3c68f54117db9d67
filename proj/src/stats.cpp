#include "dmac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmac::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("stats: empty sample");
    double acc = 0.0;
    for (double v : xs) acc += v;
    return acc / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("stats: need at least two samples");
    double m = mean(xs);
    double acc = 0.0;
    for (double v : xs) acc += (v - m) * (v - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("stats: size mismatch");
    double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(f - lo), std::fabs(hi - f)));
    }
    return d;
}

double ks_uniform(std::vector<double> samples, double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("ks: bad interval");
    return ks_statistic(std::move(samples), [lo, hi](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        return (x - lo) / (hi - lo);
    });
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double histogram_entropy_bits(std::span<const double> samples, int bins, double lo, double hi) {
    if (samples.empty()) throw std::invalid_argument("entropy: empty sample");
    if (bins < 2 || !(hi > lo)) throw std::invalid_argument("entropy: bad histogram");
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    const double w = (hi - lo) / bins;
    std::size_t kept = 0;
    for (double v : samples) {
        if (v < lo || v >= hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / w);
        if (b >= counts.size()) b = counts.size() - 1;
        ++counts[b];
        ++kept;
    }
    if (kept == 0) throw std::invalid_argument("entropy: all samples outside range");
    const double n = static_cast<double>(kept);
    double h = 0.0;
    std::size_t occupied = 0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        ++occupied;
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    // Miller-Madow correction, then shift to differential entropy.
    h += static_cast<double>(occupied - 1) / (2.0 * n * std::log(2.0));
    return h + std::log2(w);
}

}  // namespace dmac::stats
