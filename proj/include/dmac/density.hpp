#pragma once

#include <span>
#include <vector>

#include "dmac/equiv_noise.hpp"

namespace dmac {

// Probability mass sampled on a uniform grid with bin centers at integer
// multiples of the bin width (so convolution keeps centers on-grid).
// Supports convolution, wrapping to a period, and differential entropy.
class GridDensity {
public:
    static GridDensity uniform(double width, double bin_width);
    static GridDensity gaussian(double sigma, double bin_width, double truncation = 8.0);
    static GridDensity point_mass(double bin_width);

    double bin_width() const { return h_; }
    std::size_t size() const { return mass_.size(); }
    double center(std::size_t i) const { return (static_cast<double>(first_) + static_cast<double>(i)) * h_; }
    double mass(std::size_t i) const { return mass_[i]; }
    bool is_wrapped() const { return wrapped_; }
    double period() const { return period_; }

    double total_mass() const;
    double mean() const;
    double variance() const;
    double entropy_bits() const;          // -Σ p·log2(p/h)
    double cdf(double x) const;           // piecewise-linear within bins

    GridDensity convolved_with(const GridDensity& other) const;
    GridDensity wrapped_to(double period) const;

    // Fold onto a fresh grid of 2^bins_log2 bins over an arbitrary period
    // (linear mass splitting between neighboring target bins). Used when a
    // second wrap lattice is incommensurate with the current grid.
    GridDensity rewrapped_to(double period, int bins_log2) const;

private:
    double h_ = 1.0;
    long long first_ = 0;                 // index of the first bin center
    std::vector<double> mass_;
    bool wrapped_ = false;
    double period_ = 0.0;
};

GridDensity convolve(const GridDensity& a, const GridDensity& b);
GridDensity wrap_density(const GridDensity& d, double period);
double diff_entropy_bits(const GridDensity& d);

struct RateResult {
    double rate = 0.0;        // [pre_clamp]+
    double pre_clamp = 0.0;
    bool clamped = false;
    bool degenerate = false;  // grid-limited (no noise mass to resolve)
};

// Default resolution: 2^14 bins per wrap period.
inline constexpr int kDefaultBinsLog2 = 14;

// Density of the unwrapped equivalent noise on the given grid.
GridDensity noise_density(const EquivNoiseSpec& spec, double bin_width);

// Mutual-information rate of the wrapped channel y = [m + z] mod Δ where the
// message m is the sum of independent uniform components of the given widths
// and z follows the noise description:  R = h(wrap(m ⊛ z)) − h(wrap(z)).
// With a full-width message (width = Δ) this reduces to log2 Δ − h(wrap(z)).
RateResult rate_of_spec(const EquivNoiseSpec& spec, int bins_log2 = kDefaultBinsLog2);
RateResult rate_of_spec(const EquivNoiseSpec& spec, std::span<const double> message_widths,
                        int bins_log2 = kDefaultBinsLog2);

// Histogram plug-in entropy (Miller-Madow corrected); needs >= 1e5 samples.
double mc_entropy(std::span<const double> samples, int bins);
double mc_entropy(std::span<const double> samples, int bins, double lo, double hi);

}  // namespace dmac
