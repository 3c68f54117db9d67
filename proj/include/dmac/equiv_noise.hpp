#pragma once

#include <vector>

namespace dmac {

// Symbolic description of the additive noise seen inside a wrapped channel:
// a sum of independent scaled uniform-over-cell terms and Gaussian terms,
// reduced modulo a 1-D lattice of spacing wrap_delta.
struct NoiseComponent {
    enum class Kind { uniform, gaussian };

    Kind kind = Kind::gaussian;
    double delta = 0.0;      // uniform: spacing of the source lattice
    double weight = 1.0;     // uniform: scalar applied to the uniform variable
    double variance = 0.0;   // gaussian

    static NoiseComponent uniform(double delta, double weight) {
        return {Kind::uniform, delta, weight, 0.0};
    }
    static NoiseComponent gaussian(double variance) {
        return {Kind::gaussian, 0.0, 0.0, variance};
    }
    double var() const {
        return kind == Kind::uniform ? weight * weight * delta * delta / 12.0 : variance;
    }
};

struct EquivNoiseSpec {
    double wrap_delta = 0.0;
    std::vector<NoiseComponent> components;

    double unwrapped_variance() const {
        double acc = 0.0;
        for (const auto& c : components) acc += c.var();
        return acc;
    }
};

}  // namespace dmac
