#include "dmac/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dmac {
namespace {

// Irrational stride keeps the sawtooth period incommensurate with any lattice.
constexpr double kGoldenFrac = 0.6180339887498949;

double frac(double x) { return x - std::floor(x); }

}  // namespace

const char* channel_kind_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::doubly_dirty: return "doubly_dirty";
        case ChannelKind::single_dirty: return "single_dirty";
        case ChannelKind::common_interference: return "common";
        case ChannelKind::k_user: return "k_user";
    }
    return "?";
}

std::optional<ChannelKind> channel_kind_from_name(std::string_view name) {
    if (name == "doubly_dirty") return ChannelKind::doubly_dirty;
    if (name == "single_dirty") return ChannelKind::single_dirty;
    if (name == "common") return ChannelKind::common_interference;
    if (name == "k_user") return ChannelKind::k_user;
    return std::nullopt;
}

void PowerConfig::validate() const {
    if (!(p1 > 0.0) || !(p2 > 0.0) || !(noise > 0.0))
        throw std::invalid_argument("power config: P1, P2, N must be strictly positive");
    if (k_users && *k_users < 2)
        throw std::invalid_argument("power config: K must be at least 2");
}

InterferenceSpec InterferenceSpec::gaussian(double q) {
    if (q < 0.0) throw std::invalid_argument("interference: variance must be nonnegative");
    InterferenceSpec s;
    s.kind = Kind::gaussian;
    s.variance = q;
    return s;
}

InterferenceSpec InterferenceSpec::fixed(std::vector<double> v) {
    InterferenceSpec s;
    s.kind = Kind::fixed_sequence;
    s.values = std::move(v);
    return s;
}

InterferenceSpec InterferenceSpec::adversarial(Pattern p, double amplitude) {
    InterferenceSpec s;
    s.kind = Kind::adversarial;
    s.pattern = p;
    s.amplitude = amplitude;
    return s;
}

double draw_state_sample(const InterferenceSpec& spec, std::size_t index, std::size_t n, Rng& rng) {
    switch (spec.kind) {
        case InterferenceSpec::Kind::gaussian:
            return spec.variance == 0.0 ? 0.0 : rng.normal(0.0, std::sqrt(spec.variance));
        case InterferenceSpec::Kind::fixed_sequence:
            if (index >= spec.values.size())
                throw std::invalid_argument("interference: fixed sequence length mismatch");
            return spec.values[index];
        case InterferenceSpec::Kind::adversarial:
            switch (spec.pattern) {
                case InterferenceSpec::Pattern::sawtooth:
                    return spec.amplitude * (2.0 * frac((static_cast<double>(index) + 0.37) * kGoldenFrac) - 1.0);
                case InterferenceSpec::Pattern::constant_ramp: {
                    if (n <= 1) return 0.0;
                    double t = static_cast<double>(index) / static_cast<double>(n - 1);
                    return spec.amplitude * (2.0 * t - 1.0);
                }
                case InterferenceSpec::Pattern::sign_alternating:
                    return (index % 2 == 0) ? spec.amplitude : -spec.amplitude;
            }
    }
    return 0.0;
}

std::vector<double> draw_state(const InterferenceSpec& spec, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("interference: length must be positive");
    if (spec.kind == InterferenceSpec::Kind::fixed_sequence && spec.values.size() != n)
        throw std::invalid_argument("interference: fixed sequence length mismatch");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = draw_state_sample(spec, i, n, rng);
    return out;
}

std::vector<double> channel_output(ChannelKind kind,
                                   std::span<const std::vector<double>> inputs,
                                   std::span<const std::vector<double>> states,
                                   std::span<const double> noise) {
    std::size_t want_inputs = 2, want_states = 2;
    switch (kind) {
        case ChannelKind::doubly_dirty: want_inputs = 2; want_states = 2; break;
        case ChannelKind::single_dirty: want_inputs = 2; want_states = 1; break;
        case ChannelKind::common_interference: want_inputs = 2; want_states = 1; break;
        case ChannelKind::k_user:
            want_inputs = inputs.size();
            want_states = inputs.size();
            if (inputs.size() < 2) throw std::invalid_argument("channel: K-user model needs K >= 2 inputs");
            break;
    }
    if (inputs.size() != want_inputs || states.size() != want_states)
        throw std::invalid_argument("channel: input/state arity mismatch for this model");
    const std::size_t n = noise.size();
    for (const auto& v : inputs)
        if (v.size() != n) throw std::invalid_argument("channel: length mismatch");
    for (const auto& v : states)
        if (v.size() != n) throw std::invalid_argument("channel: length mismatch");

    std::vector<double> y(noise.begin(), noise.end());
    for (const auto& v : inputs)
        for (std::size_t i = 0; i < n; ++i) y[i] += v[i];
    for (const auto& v : states)
        for (std::size_t i = 0; i < n; ++i) y[i] += v[i];
    return y;
}

StatePair draw_correlated_states(double sigma1, double sigma2, double rho, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("interference: length must be positive");
    CorrelatedDecomposition d = decompose_correlated(sigma1, sigma2, rho);
    StatePair out;
    out.s1.resize(n);
    out.s2.resize(n);
    const double sd0 = std::sqrt(d.var_s0);
    const double sd1 = std::sqrt(d.var_s1);
    const double sd2 = std::sqrt(d.var_s2);
    for (std::size_t i = 0; i < n; ++i) {
        double s0 = rng.normal(0.0, sd0);
        out.s1[i] = rng.normal(0.0, sd1) + d.beta1 * s0;
        out.s2[i] = rng.normal(0.0, sd2) + d.beta2 * s0;
    }
    return out;
}

CorrelatedDecomposition decompose_correlated(double sigma1, double sigma2, double rho) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("decompose: sigma values must be positive");
    if (!(std::fabs(rho) < 1.0))
        throw std::invalid_argument("decompose: |rho| must be below one");
    CorrelatedDecomposition d;
    const double a = std::fabs(rho);
    d.var_s1 = sigma1 * sigma1 * (1.0 - a);
    d.var_s2 = sigma2 * sigma2 * (1.0 - a);
    d.var_s0 = sigma1 * sigma1;
    d.beta1 = (rho >= 0.0 ? 1.0 : -1.0) * std::sqrt(a);
    d.beta2 = (sigma2 / sigma1) * std::sqrt(a);
    return d;
}

}  // namespace dmac
