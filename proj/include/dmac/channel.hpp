#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmac/rng.hpp"

namespace dmac {

enum class ChannelKind { doubly_dirty, single_dirty, common_interference, k_user };

const char* channel_kind_name(ChannelKind kind);
std::optional<ChannelKind> channel_kind_from_name(std::string_view name);

struct PowerConfig {
    double p1 = 1.0;
    double p2 = 1.0;
    double noise = 1.0;
    std::optional<int> k_users;     // symmetric K-user model, common power = p1

    void validate() const;          // throws on nonpositive entries or K < 2
    double min_power() const { return p1 < p2 ? p1 : p2; }
    double max_power() const { return p1 > p2 ? p1 : p2; }
    PowerConfig swapped() const { return {p2, p1, noise, k_users}; }
};

// Interference generation: i.i.d. Gaussian, a verbatim sequence, or one of a
// fixed menu of deterministic high-amplitude patterns so robustness runs are
// reproducible.
struct InterferenceSpec {
    enum class Kind { gaussian, fixed_sequence, adversarial };
    enum class Pattern { sawtooth, constant_ramp, sign_alternating };

    Kind kind = Kind::gaussian;
    double variance = 0.0;              // gaussian
    std::vector<double> values;         // fixed_sequence
    Pattern pattern = Pattern::sawtooth;
    double amplitude = 0.0;             // adversarial

    static InterferenceSpec gaussian(double q);
    static InterferenceSpec fixed(std::vector<double> v);
    static InterferenceSpec adversarial(Pattern p, double amplitude);
};

std::vector<double> draw_state(const InterferenceSpec& spec, std::size_t n, Rng& rng);
double draw_state_sample(const InterferenceSpec& spec, std::size_t index, std::size_t n, Rng& rng);

// Exact received vector for the selected model; checks arity and lengths.
//   doubly_dirty:        y = x1 + x2 + s1 + s2 + z
//   single_dirty:        y = x1 + x2 + s1 + z
//   common_interference: y = x1 + x2 + sc + z
//   k_user:              y = Σ xi + Σ si + z
std::vector<double> channel_output(ChannelKind kind,
                                   std::span<const std::vector<double>> inputs,
                                   std::span<const std::vector<double>> states,
                                   std::span<const double> noise);

struct CorrelatedDecomposition {
    double var_s1 = 0.0;   // private part variances after splitting off the common term
    double var_s2 = 0.0;
    double var_s0 = 0.0;   // common component variance
    double beta1 = 0.0;
    double beta2 = 0.0;
};

// Splits jointly Gaussian interferences (σ̃1, σ̃2, ρ) into independent private
// parts plus a shared component: S̃i = Si + βi·S0.
CorrelatedDecomposition decompose_correlated(double sigma1, double sigma2, double rho);

struct StatePair {
    std::vector<double> s1;
    std::vector<double> s2;
};

// Jointly Gaussian interference pair sampled through the decomposition.
StatePair draw_correlated_states(double sigma1, double sigma2, double rho, std::size_t n, Rng& rng);

}  // namespace dmac
