#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dmac/rng.hpp"

namespace dmac {

// Real lattice Λ = {G·i : i ∈ Z^n} with nearest-neighbor quantization, modulo
// reduction into the fundamental Voronoi cell, dither sampling, and second
// moment statistics. The 1-D family ΔZ takes exact closed-form paths; matrix
// lattices are limited to n ≤ 8 and quantized by exhaustive search over the
// 3^n integer offsets around the rounded Babai point.
//
// Quantizer ties are broken toward the lexicographically smallest integer
// coordinate vector, which makes every operation deterministic.
class Lattice {
public:
    Lattice() = default;  // unit integer lattice Z

    static Lattice scaled_integers(double delta);                       // ΔZ
    static Lattice from_generator(int n, std::vector<double> g_rowmajor);

    int dimension() const { return n_; }
    bool one_dimensional() const { return n_ == 1; }
    double spacing() const;                 // Δ, 1-D only
    double cell_volume() const { return volume_; }

    // Per-dimension second moment σ²_Λ of a uniform dither over the cell.
    // Exact Δ²/12 in 1-D, Monte Carlo (fixed internal stream) otherwise.
    double second_moment() const { return second_moment_; }
    double normalized_second_moment() const;  // G(Λ) = σ²_Λ / V^{2/n}

    double nearest_point(double x) const;
    std::vector<double> nearest_point(std::span<const double> x) const;
    std::vector<long long> nearest_coords(std::span<const double> x) const;

    double reduce(double x) const;                          // x mod Λ
    std::vector<double> reduce(std::span<const double> x) const;

    // Uniform sample over the fundamental Voronoi cell. 1-D: uniform on
    // [-Δ/2, Δ/2). n-D: rejection sampling from a covering box of the cell;
    // throws if the acceptance rate collapses (degenerate generator).
    double sample_dither_1d(Rng& rng) const;
    std::vector<double> sample_dither(Rng& rng) const;

    Lattice scaled_by(double c) const;                      // cΛ

    const std::vector<double>& generator() const { return gen_; }
    const std::vector<double>& generator_inverse() const { return gen_inv_; }

private:
    static Lattice make_1d(double delta);
    void finalize_nd();

    int n_ = 1;
    double delta_ = 1.0;            // 1-D spacing
    std::vector<double> gen_{1.0};  // row-major n×n
    std::vector<double> gen_inv_{1.0};
    double volume_ = 1.0;
    double second_moment_ = 1.0 / 12.0;
    double covering_radius_bound_ = 0.5;
};

struct SecondMomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = false;
};

// σ²_Λ estimate: exact for ΔZ, Monte Carlo over dither samples otherwise.
SecondMomentEstimate estimate_second_moment(const Lattice& lat, std::size_t n_samples, Rng& rng);

struct NestingWitness {
    bool nested = false;
    std::optional<double> scale;             // c when Λ_coarse = c·Λ_fine
    std::vector<double> integer_matrix;      // M with G_c = G_f·M, row-major
};

// Λ_coarse ⊆ Λ_fine  iff  G_f⁻¹·G_c is an integer matrix (tolerance on entries).
NestingWitness is_nested(const Lattice& coarse, const Lattice& fine, double tol = 1e-9);

struct NestedPair {
    Lattice coarse;
    Lattice fine;
    NestingWitness witness;

    static NestedPair make(Lattice coarse, Lattice fine);   // throws when not nested
    // Draw random coarse points and confirm each lies on the fine lattice.
    bool check_random_points(std::size_t count, Rng& rng, double tol = 1e-9) const;
};

}  // namespace dmac
