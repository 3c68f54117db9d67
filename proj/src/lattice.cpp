#include "dmac/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmac {
namespace {

constexpr int kMaxDim = 8;

void check_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("lattice: non-finite input");
    }
}

// Gauss-Jordan with partial pivoting; returns inverse, throws on singularity.
std::vector<double> invert(const std::vector<double>& a_in, int n) {
    std::vector<double> a = a_in;
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (best == 0.0) throw std::invalid_argument("lattice: singular generator matrix");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[static_cast<std::size_t>(pivot) * n + c], a[static_cast<std::size_t>(col) * n + c]);
                std::swap(inv[static_cast<std::size_t>(pivot) * n + c], inv[static_cast<std::size_t>(col) * n + c]);
            }
        }
        double d = a[static_cast<std::size_t>(col) * n + col];
        for (int c = 0; c < n; ++c) {
            a[static_cast<std::size_t>(col) * n + c] /= d;
            inv[static_cast<std::size_t>(col) * n + c] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[static_cast<std::size_t>(r) * n + col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
                inv[static_cast<std::size_t>(r) * n + c] -= f * inv[static_cast<std::size_t>(col) * n + c];
            }
        }
    }
    return inv;
}

double determinant(std::vector<double> a, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (best == 0.0) return 0.0;
        if (pivot != col) {
            det = -det;
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(pivot) * n + c], a[static_cast<std::size_t>(col) * n + c]);
        }
        det *= a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r) * n + col] / a[static_cast<std::size_t>(col) * n + col];
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
        }
    }
    return det;
}

// Integer nearest to q; an exact tie q = k + 1/2 resolves to the smaller k.
long long round_tie_low(double q) {
    return static_cast<long long>(std::ceil(q - 0.5));
}

void matvec(const std::vector<double>& m, int n, std::span<const double> x, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += m[static_cast<std::size_t>(r) * n + c] * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc;
    }
}

}  // namespace

Lattice Lattice::make_1d(double delta) {
    Lattice lat;
    lat.n_ = 1;
    lat.delta_ = delta;
    lat.gen_ = {delta};
    lat.gen_inv_ = {1.0 / delta};
    lat.volume_ = delta;
    lat.second_moment_ = delta * delta / 12.0;
    lat.covering_radius_bound_ = delta / 2.0;
    return lat;
}

Lattice Lattice::scaled_integers(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("lattice: spacing must be positive and finite");
    return make_1d(delta);
}

Lattice Lattice::from_generator(int n, std::vector<double> g_rowmajor) {
    if (n < 1 || n > kMaxDim)
        throw std::invalid_argument("lattice: dimension must be in [1, 8]");
    if (g_rowmajor.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("lattice: generator size mismatch");
    check_finite(g_rowmajor);
    if (n == 1) {
        double d = g_rowmajor[0];
        if (d < 0.0) d = -d;
        return scaled_integers(d);
    }
    Lattice lat;
    lat.n_ = n;
    lat.gen_ = std::move(g_rowmajor);
    lat.gen_inv_ = invert(lat.gen_, n);
    lat.volume_ = std::fabs(determinant(lat.gen_, n));
    if (!(lat.volume_ > 0.0)) throw std::invalid_argument("lattice: singular generator matrix");
    lat.finalize_nd();
    return lat;
}

void Lattice::finalize_nd() {
    // Covering bound: every Voronoi point is within (1/2)·max_ε‖Σ ε_i g_i‖ of
    // the origin; exact max over sign patterns (n ≤ 8 keeps this cheap).
    double best = 0.0;
    const int patterns = 1 << (n_ - 1);  // ±symmetry halves the enumeration
    for (int p = 0; p < patterns; ++p) {
        double norm2 = 0.0;
        for (int r = 0; r < n_; ++r) {
            double acc = 0.0;
            for (int c = 0; c < n_; ++c) {
                double s = (c == 0 || ((p >> (c - 1)) & 1) == 0) ? 1.0 : -1.0;
                acc += s * gen_[static_cast<std::size_t>(r) * n_ + c];
            }
            norm2 += acc * acc;
        }
        best = std::max(best, norm2);
    }
    covering_radius_bound_ = 0.5 * std::sqrt(best);

    // Second moment via the fundamental-parallelepiped fold: reducing a
    // uniform sample over any fundamental cell lands uniform on the Voronoi
    // cell, so no rejection is needed here. Fixed stream keeps the cached
    // value deterministic.
    Rng rng(0x1a77c3u, static_cast<std::uint64_t>(n_));
    const std::size_t samples = 60000;
    std::vector<double> u(static_cast<std::size_t>(n_));
    std::vector<double> x;
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (int c = 0; c < n_; ++c) u[static_cast<std::size_t>(c)] = rng.uniform() - 0.5;
        matvec(gen_, n_, u, x);
        std::vector<double> y = reduce(std::span<const double>(x));
        double norm2 = 0.0;
        for (double v : y) norm2 += v * v;
        acc += norm2;
    }
    second_moment_ = acc / (static_cast<double>(samples) * n_);
}

double Lattice::spacing() const {
    if (n_ != 1) throw std::logic_error("lattice: spacing() is 1-D only");
    return delta_;
}

double Lattice::normalized_second_moment() const {
    if (n_ == 1) return 1.0 / 12.0;  // exact identity for ΔZ
    return second_moment_ / std::pow(volume_, 2.0 / n_);
}

double Lattice::nearest_point(double x) const {
    if (n_ != 1) throw std::invalid_argument("lattice: dimension mismatch");
    if (!std::isfinite(x)) throw std::invalid_argument("lattice: non-finite input");
    return delta_ * static_cast<double>(round_tie_low(x / delta_));
}

std::vector<long long> Lattice::nearest_coords(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("lattice: dimension mismatch");
    check_finite(x);
    if (n_ == 1) return {round_tie_low(x[0] / delta_)};

    std::vector<double> u;
    matvec(gen_inv_, n_, x, u);
    std::vector<long long> base(static_cast<std::size_t>(n_));
    for (int c = 0; c < n_; ++c) base[static_cast<std::size_t>(c)] = round_tie_low(u[static_cast<std::size_t>(c)]);

    std::vector<long long> best_k;
    double best_d = 0.0;
    std::vector<long long> k(static_cast<std::size_t>(n_));
    const long long total = 1;
    long long count = total;
    for (int c = 0; c < n_; ++c) count *= 3;
    std::vector<double> p(static_cast<std::size_t>(n_));
    for (long long idx = 0; idx < count; ++idx) {
        long long rem = idx;
        for (int c = 0; c < n_; ++c) {
            k[static_cast<std::size_t>(c)] = base[static_cast<std::size_t>(c)] + (rem % 3) - 1;
            rem /= 3;
        }
        double d = 0.0;
        for (int r = 0; r < n_; ++r) {
            double acc = 0.0;
            for (int c = 0; c < n_; ++c)
                acc += gen_[static_cast<std::size_t>(r) * n_ + c] * static_cast<double>(k[static_cast<std::size_t>(c)]);
            p[static_cast<std::size_t>(r)] = acc;
            double diff = x[static_cast<std::size_t>(r)] - acc;
            d += diff * diff;
        }
        if (best_k.empty() || d < best_d ||
            (d == best_d && std::lexicographical_compare(k.begin(), k.end(), best_k.begin(), best_k.end()))) {
            best_d = d;
            best_k = k;
        }
    }
    return best_k;
}

std::vector<double> Lattice::nearest_point(std::span<const double> x) const {
    std::vector<long long> k = nearest_coords(x);
    std::vector<double> p(static_cast<std::size_t>(n_), 0.0);
    if (n_ == 1) {
        p[0] = delta_ * static_cast<double>(k[0]);
        return p;
    }
    for (int r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n_; ++c)
            acc += gen_[static_cast<std::size_t>(r) * n_ + c] * static_cast<double>(k[static_cast<std::size_t>(c)]);
        p[static_cast<std::size_t>(r)] = acc;
    }
    return p;
}

double Lattice::reduce(double x) const { return x - nearest_point(x); }

std::vector<double> Lattice::reduce(std::span<const double> x) const {
    std::vector<double> p = nearest_point(x);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = x[i] - p[i];
    return p;
}

double Lattice::sample_dither_1d(Rng& rng) const {
    if (n_ != 1) throw std::logic_error("lattice: sample_dither_1d is 1-D only");
    return delta_ * (rng.uniform() - 0.5);
}

std::vector<double> Lattice::sample_dither(Rng& rng) const {
    if (n_ == 1) return {sample_dither_1d(rng)};
    const std::size_t cap = 1000000;
    const double r = covering_radius_bound_;
    std::vector<double> y(static_cast<std::size_t>(n_));
    for (std::size_t attempt = 0; attempt < cap; ++attempt) {
        for (int c = 0; c < n_; ++c) y[static_cast<std::size_t>(c)] = rng.uniform(-r, r);
        std::vector<long long> k = nearest_coords(y);
        bool origin = true;
        for (long long v : k) origin = origin && (v == 0);
        if (origin) return y;
    }
    throw std::runtime_error("lattice: dither rejection cap exceeded (degenerate generator)");
}

Lattice Lattice::scaled_by(double c) const {
    if (!(c != 0.0) || !std::isfinite(c)) throw std::invalid_argument("lattice: bad scale");
    if (n_ == 1) return scaled_integers(std::fabs(c) * delta_);
    std::vector<double> g = gen_;
    for (double& v : g) v *= c;
    return from_generator(n_, std::move(g));
}

SecondMomentEstimate estimate_second_moment(const Lattice& lat, std::size_t n_samples, Rng& rng) {
    if (lat.one_dimensional()) {
        double d = lat.spacing();
        return {d * d / 12.0, 0.0, true};
    }
    if (n_samples < 10000) throw std::invalid_argument("second moment: need at least 1e4 samples");
    double acc = 0.0, acc2 = 0.0;
    const int n = lat.dimension();
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::vector<double> d = lat.sample_dither(rng);
        double norm2 = 0.0;
        for (double v : d) norm2 += v * v;
        norm2 /= n;
        acc += norm2;
        acc2 += norm2 * norm2;
    }
    double mean = acc / static_cast<double>(n_samples);
    double var = acc2 / static_cast<double>(n_samples) - mean * mean;
    double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_samples));
    return {mean, se, false};
}

NestingWitness is_nested(const Lattice& coarse, const Lattice& fine, double tol) {
    if (coarse.dimension() != fine.dimension())
        throw std::invalid_argument("is_nested: dimension mismatch");
    NestingWitness w;
    const int n = coarse.dimension();
    if (n == 1) {
        double ratio = coarse.spacing() / fine.spacing();
        double r = std::round(ratio);
        if (std::fabs(ratio - r) <= tol && std::fabs(r) >= 1.0) {
            w.nested = true;
            w.scale = r;
            w.integer_matrix = {r};
        }
        return w;
    }
    // M = G_f⁻¹ · G_c must be integral.
    const std::vector<double>& fi = fine.generator_inverse();
    const std::vector<double>& gc = coarse.generator();
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    bool integral = true;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += fi[static_cast<std::size_t>(r) * n + k] * gc[static_cast<std::size_t>(k) * n + c];
            double rounded = std::round(acc);
            if (std::fabs(acc - rounded) > tol) integral = false;
            m[static_cast<std::size_t>(r) * n + c] = rounded;
        }
    }
    if (!integral) return w;
    w.nested = true;
    w.integer_matrix = m;
    bool diagonal_uniform = true;
    double d0 = m[0];
    for (int r = 0; r < n && diagonal_uniform; ++r)
        for (int c = 0; c < n; ++c) {
            double expect = (r == c) ? d0 : 0.0;
            if (m[static_cast<std::size_t>(r) * n + c] != expect) { diagonal_uniform = false; break; }
        }
    if (diagonal_uniform) w.scale = d0;
    return w;
}

NestedPair NestedPair::make(Lattice coarse, Lattice fine) {
    NestingWitness w = is_nested(coarse, fine);
    if (!w.nested) throw std::invalid_argument("nested pair: coarse lattice is not a sublattice of fine");
    return NestedPair{std::move(coarse), std::move(fine), std::move(w)};
}

bool NestedPair::check_random_points(std::size_t count, Rng& rng, double tol) const {
    const int n = coarse.dimension();
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c)
            x[static_cast<std::size_t>(c)] = static_cast<double>(static_cast<long long>(rng.next_u64() % 41) - 20);
        // coarse point G_c·x, then its fine coordinates must be integral
        std::vector<double> p(static_cast<std::size_t>(n), 0.0);
        const std::vector<double>& gc = coarse.generator();
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (int c = 0; c < n; ++c) acc += gc[static_cast<std::size_t>(r) * n + c] * x[static_cast<std::size_t>(c)];
            p[static_cast<std::size_t>(r)] = acc;
        }
        const std::vector<double>& fi = fine.generator_inverse();
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (int c = 0; c < n; ++c) acc += fi[static_cast<std::size_t>(r) * n + c] * p[static_cast<std::size_t>(c)];
            if (std::fabs(acc - std::round(acc)) > tol) return false;
        }
    }
    return true;
}

}  // namespace dmac
