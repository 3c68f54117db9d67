#include "dmac/density.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "dmac/stats.hpp"

namespace dmac {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? -1.0 : 1.0);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) v /= static_cast<double>(n);
    }
}

std::vector<double> convolve_mass(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t na = a.size(), nb = b.size();
    const std::size_t nout = na + nb - 1;
    if (na * nb <= (1u << 22)) {
        std::vector<double> out(nout, 0.0);
        for (std::size_t i = 0; i < na; ++i) {
            if (a[i] == 0.0) continue;
            for (std::size_t j = 0; j < nb; ++j) out[i + j] += a[i] * b[j];
        }
        return out;
    }
    const std::size_t m = next_pow2(nout);
    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t i = 0; i < na; ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < nb; ++i) fb[i] = b[i];
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    std::vector<double> out(nout);
    for (std::size_t i = 0; i < nout; ++i) out[i] = std::max(fa[i].real(), 0.0);
    return out;
}

}  // namespace

GridDensity GridDensity::uniform(double width, double bin_width) {
    if (!(width > 0.0) || !(bin_width > 0.0))
        throw std::invalid_argument("density: width and bin width must be positive");
    GridDensity d;
    d.h_ = bin_width;
    const double half = width / 2.0;
    const long long kmax = static_cast<long long>(std::floor((half + bin_width / 2.0) / bin_width)) + 1;
    d.first_ = -kmax;
    d.mass_.assign(static_cast<std::size_t>(2 * kmax + 1), 0.0);
    for (long long k = -kmax; k <= kmax; ++k) {
        double lo = static_cast<double>(k) * bin_width - bin_width / 2.0;
        double hi = lo + bin_width;
        double overlap = std::min(hi, half) - std::max(lo, -half);
        if (overlap > 0.0) d.mass_[static_cast<std::size_t>(k + kmax)] = overlap / width;
    }
    double s = d.total_mass();
    for (double& m : d.mass_) m /= s;
    return d;
}

GridDensity GridDensity::gaussian(double sigma, double bin_width, double truncation) {
    if (!(sigma > 0.0) || !(bin_width > 0.0) || !(truncation > 0.0))
        throw std::invalid_argument("density: sigma, bin width, truncation must be positive");
    GridDensity d;
    d.h_ = bin_width;
    const long long kmax = static_cast<long long>(std::ceil(truncation * sigma / bin_width)) + 1;
    d.first_ = -kmax;
    d.mass_.assign(static_cast<std::size_t>(2 * kmax + 1), 0.0);
    for (long long k = -kmax; k <= kmax; ++k) {
        double lo = (static_cast<double>(k) * bin_width - bin_width / 2.0) / sigma;
        double hi = lo + bin_width / sigma;
        d.mass_[static_cast<std::size_t>(k + kmax)] = normal_cdf(hi) - normal_cdf(lo);
    }
    double s = d.total_mass();
    for (double& m : d.mass_) m /= s;
    return d;
}

GridDensity GridDensity::point_mass(double bin_width) {
    GridDensity d;
    d.h_ = bin_width;
    d.first_ = 0;
    d.mass_ = {1.0};
    return d;
}

double GridDensity::total_mass() const {
    double s = 0.0;
    for (double m : mass_) s += m;
    return s;
}

double GridDensity::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * center(i);
    return s;
}

double GridDensity::variance() const {
    double mu = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        double c = center(i) - mu;
        s += mass_[i] * c * c;
    }
    return s;
}

double GridDensity::entropy_bits() const {
    if (std::fabs(total_mass() - 1.0) > 1e-6)
        throw std::invalid_argument("density: entropy of an unnormalized density");
    double h = 0.0;
    for (double m : mass_) {
        if (m > 0.0) h -= m * std::log2(m / h_);
    }
    return h;
}

double GridDensity::cdf(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        double lo = center(i) - h_ / 2.0;
        double hi = lo + h_;
        if (x >= hi) {
            acc += mass_[i];
        } else if (x > lo) {
            acc += mass_[i] * (x - lo) / h_;
            break;
        } else {
            break;
        }
    }
    return std::min(acc, 1.0);
}

GridDensity GridDensity::convolved_with(const GridDensity& other) const {
    if (std::fabs(h_ - other.h_) > 1e-12 * h_)
        throw std::invalid_argument("density: convolution needs matching bin widths");
    if (wrapped_ || other.wrapped_)
        throw std::invalid_argument("density: convolve before wrapping");
    GridDensity out;
    out.h_ = h_;
    out.first_ = first_ + other.first_;
    out.mass_ = convolve_mass(mass_, other.mass_);
    double s = out.total_mass();
    for (double& m : out.mass_) m /= s;
    return out;
}

GridDensity GridDensity::wrapped_to(double period) const {
    if (!(period > 0.0)) throw std::invalid_argument("density: period must be positive");
    const double ratio = period / h_;
    const long long m = std::llround(ratio);
    if (m < 2 || std::fabs(ratio - static_cast<double>(m)) > 1e-9)
        throw std::invalid_argument("density: period must be a multiple of the bin width");
    GridDensity out;
    out.h_ = h_;
    out.first_ = -m / 2;
    out.mass_.assign(static_cast<std::size_t>(m), 0.0);
    out.wrapped_ = true;
    out.period_ = period;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        long long k = first_ + static_cast<long long>(i);
        // congruent index in [-m/2, m/2), stored at offset +m/2
        long long folded = (((k + m / 2) % m) + m) % m;
        out.mass_[static_cast<std::size_t>(folded)] += mass_[i];
    }
    return out;
}

GridDensity GridDensity::rewrapped_to(double period, int bins_log2) const {
    if (!(period > 0.0)) throw std::invalid_argument("density: period must be positive");
    const long long m = 1LL << bins_log2;
    if (h_ >= period) throw std::invalid_argument("density: rewrap period finer than the source grid");
    GridDensity out;
    out.h_ = period / static_cast<double>(m);
    out.first_ = -m / 2;
    out.mass_.assign(static_cast<std::size_t>(m), 0.0);
    out.wrapped_ = true;
    out.period_ = period;
    // Each source bin is a box of width h_; fold the box onto the target
    // circle and split its mass by exact overlap so grid mismatch cannot
    // alias into spurious ripple.
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (mass_[i] == 0.0) continue;
        const double a = center(i) - h_ / 2.0;
        const double t0 = a - period * std::floor((a + period / 2.0) / period);  // [-period/2, period/2)
        const double f0 = (t0 + period / 2.0) / out.h_;                          // [0, m)
        const double f1 = f0 + h_ / out.h_;
        const double inv_len = 1.0 / (f1 - f0);
        for (long long j = static_cast<long long>(std::floor(f0)); j < static_cast<long long>(std::ceil(f1)); ++j) {
            double overlap = std::min(f1, static_cast<double>(j + 1)) - std::max(f0, static_cast<double>(j));
            if (overlap <= 0.0) continue;
            std::size_t idx = static_cast<std::size_t>(((j % m) + m) % m);
            out.mass_[idx] += mass_[i] * overlap * inv_len;
        }
    }
    return out;
}

GridDensity convolve(const GridDensity& a, const GridDensity& b) { return a.convolved_with(b); }
GridDensity wrap_density(const GridDensity& d, double period) { return d.wrapped_to(period); }
double diff_entropy_bits(const GridDensity& d) { return d.entropy_bits(); }

GridDensity noise_density(const EquivNoiseSpec& spec, double bin_width) {
    GridDensity acc = GridDensity::point_mass(bin_width);
    bool any = false;
    for (const auto& c : spec.components) {
        if (c.var() == 0.0) continue;
        GridDensity d = (c.kind == NoiseComponent::Kind::uniform)
                            ? GridDensity::uniform(std::fabs(c.weight) * c.delta, bin_width)
                            : GridDensity::gaussian(std::sqrt(c.variance), bin_width);
        acc = any ? acc.convolved_with(d) : d;
        any = true;
    }
    return acc;
}

RateResult rate_of_spec(const EquivNoiseSpec& spec, int bins_log2) {
    const double wd[1] = {spec.wrap_delta};
    return rate_of_spec(spec, std::span<const double>(wd, 1), bins_log2);
}

RateResult rate_of_spec(const EquivNoiseSpec& spec, std::span<const double> message_widths,
                        int bins_log2) {
    if (!(spec.wrap_delta > 0.0)) throw std::invalid_argument("rate: wrap spacing must be positive");
    const double h = spec.wrap_delta / static_cast<double>(1LL << bins_log2);

    RateResult r;
    GridDensity noise = noise_density(spec, h);
    if (noise.size() == 1) {
        // No resolvable noise: the rate is limited by the grid, not the model.
        r.degenerate = true;
        r.pre_clamp = static_cast<double>(bins_log2);
        r.rate = r.pre_clamp;
        return r;
    }
    double h_noise = noise.wrapped_to(spec.wrap_delta).entropy_bits();

    GridDensity signal = noise;
    for (double w : message_widths) {
        if (w <= 0.0) continue;
        signal = signal.convolved_with(GridDensity::uniform(w, h));
    }
    double h_out = signal.wrapped_to(spec.wrap_delta).entropy_bits();

    r.pre_clamp = h_out - h_noise;
    r.clamped = r.pre_clamp < 0.0;
    r.rate = r.clamped ? 0.0 : r.pre_clamp;
    return r;
}

double mc_entropy(std::span<const double> samples, int bins) {
    if (samples.size() < 100000) throw std::invalid_argument("mc entropy: need at least 1e5 samples");
    double lo = samples[0], hi = samples[0];
    for (double v : samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double pad = (hi - lo) * 1e-12 + 1e-300;
    return stats::histogram_entropy_bits(samples, bins, lo, hi + pad);
}

double mc_entropy(std::span<const double> samples, int bins, double lo, double hi) {
    if (samples.size() < 100000) throw std::invalid_argument("mc entropy: need at least 1e5 samples");
    return stats::histogram_entropy_bits(samples, bins, lo, hi);
}

}  // namespace dmac
