#include <doctest.h>

#include <cmath>
#include <vector>

#include "dmac/lattice.hpp"
#include "dmac/stats.hpp"

using dmac::Lattice;
using dmac::Rng;

namespace {

// Dyadic test data: values of the form k·2^-8 with |k| bounded keep every
// arithmetic step exact, so identities that hold over the reals must hold
// bit for bit.
double dyadic(Rng& rng, double scale = 256.0) {
    long long k = static_cast<long long>(rng.next_u64() % 2000001) - 1000000;
    return static_cast<double>(k) / 256.0 * (scale / 256.0);
}

}  // namespace

TEST_CASE("nearest point, 1-D") {
    Lattice lat = Lattice::scaled_integers(2.0);
    CHECK(lat.nearest_point(2.7) == 2.0);
    CHECK(lat.nearest_point(-5.05) == -6.0);
    // exact tie resolves toward the smaller integer coordinate
    CHECK(lat.nearest_point(1.0) == 0.0);
    CHECK(lat.nearest_point(3.0) == 2.0);
    CHECK(lat.nearest_point(-1.0) == -2.0);
    CHECK_THROWS(lat.nearest_point(std::nan("")));
}

TEST_CASE("nearest point, Z^2") {
    Lattice lat = Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0});
    std::vector<double> x{0.6, -1.4};
    auto p = lat.nearest_point(std::span<const double>(x));
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -1.0);
    std::vector<double> tie{0.5, 0.0};
    auto q = lat.nearest_coords(std::span<const double>(tie));
    CHECK(q[0] == 0);  // lexicographically smaller coordinate wins the tie
}

TEST_CASE("modulo reduction") {
    Lattice lat = Lattice::scaled_integers(2.0);
    CHECK(lat.reduce(2.7) == doctest::Approx(0.7));
    CHECK(lat.reduce(-5.05) == doctest::Approx(0.95));
    // idempotence and periodicity
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform(-50.0, 50.0);
        double m = lat.reduce(x);
        CHECK(lat.reduce(m) == m);
        CHECK(lat.reduce(x + 6.0) == doctest::Approx(m).epsilon(1e-12));
        CHECK(lat.nearest_point(m) == 0.0);
    }
}

TEST_CASE("distributive law is bit-exact on dyadic data") {
    Rng rng(11);
    std::vector<Lattice> lats;
    lats.push_back(Lattice::scaled_integers(0.5));
    lats.push_back(Lattice::scaled_integers(1.0));
    lats.push_back(Lattice::scaled_integers(2.0));
    lats.push_back(Lattice::scaled_integers(4.0));
    lats.push_back(Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0}));
    lats.push_back(Lattice::from_generator(2, {2.0, 1.0, 0.0, 2.0}));
    for (const Lattice& lat : lats) {
        const int n = lat.dimension();
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<double> x(n), y(n), xy(n);
            for (int c = 0; c < n; ++c) {
                x[c] = dyadic(rng);
                y[c] = dyadic(rng);
                xy[c] = x[c] + y[c];
            }
            std::vector<double> mx = lat.reduce(std::span<const double>(x));
            for (int c = 0; c < n; ++c) mx[c] += y[c];
            std::vector<double> lhs = lat.reduce(std::span<const double>(mx));
            std::vector<double> rhs = lat.reduce(std::span<const double>(xy));
            for (int c = 0; c < n; ++c) CHECK(lhs[c] == rhs[c]);
        }
    }
}

TEST_CASE("second moment") {
    Lattice z2 = Lattice::scaled_integers(2.0);
    CHECK(z2.second_moment() == 1.0 / 3.0);
    CHECK(z2.normalized_second_moment() == 1.0 / 12.0);
    CHECK(Lattice::scaled_integers(0.37).normalized_second_moment() == 1.0 / 12.0);

    Rng rng(3);
    Lattice sq = Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0});
    auto est = dmac::estimate_second_moment(sq, 40000, rng);
    CHECK(est.value == doctest::Approx(1.0 / 12.0).epsilon(0.012));
    CHECK(est.std_error < 1e-3);
    CHECK(sq.second_moment() == doctest::Approx(1.0 / 12.0).epsilon(0.01));
    CHECK(sq.normalized_second_moment() >= 1.0 / (2.0 * M_PI * std::exp(1.0)));

    // scaling law σ²(cΛ) = c²·σ²(Λ)
    Lattice scaled = sq.scaled_by(3.0);
    CHECK(scaled.second_moment() == doctest::Approx(9.0 * sq.second_moment()).epsilon(0.02));
}

TEST_CASE("dither sampling is uniform over the cell") {
    Lattice lat = Lattice::scaled_integers(2.0);
    Rng rng(5);
    const std::size_t n = 200000;
    std::vector<double> d(n);
    double mean = 0.0, msq = 0.0;
    for (auto& v : d) {
        v = lat.sample_dither_1d(rng);
        mean += v;
        msq += v * v;
    }
    mean /= n;
    msq /= n;
    CHECK(std::fabs(mean) < 3.0 * std::sqrt(1.0 / 3.0 / n));
    CHECK(msq == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(dmac::stats::ks_uniform(d, -1.0, 1.0) < 0.005);

    // crypto lemma: [v + D] mod Λ is uniform for any fixed shift
    for (double v0 : {0.31, -0.97, 1.73}) {
        std::vector<double> shifted(n);
        Rng r2(6);
        for (auto& v : shifted) v = lat.reduce(v0 + lat.sample_dither_1d(r2));
        CHECK(dmac::stats::ks_uniform(shifted, -1.0, 1.0) < 0.005);
    }
}

TEST_CASE("dither independence of the shifted input") {
    // correlation between v and [v - s + D] mod Λ stays at noise level
    Lattice lat = Lattice::scaled_integers(2.0);
    Rng rng(9);
    const std::size_t n = 100000;
    std::vector<double> vs(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        vs[i] = lat.sample_dither_1d(rng);
        out[i] = lat.reduce(vs[i] - 7.3 + lat.sample_dither_1d(rng));
    }
    CHECK(std::fabs(dmac::stats::correlation(vs, out)) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("2-D dither via rejection sampling") {
    Lattice sq = Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0});
    Rng rng(13);
    double msq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto d = sq.sample_dither(rng);
        CHECK(std::fabs(d[0]) <= 0.5 + 1e-12);
        CHECK(std::fabs(d[1]) <= 0.5 + 1e-12);
        msq += (d[0] * d[0] + d[1] * d[1]) / 2.0;
    }
    CHECK(msq / n == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("coding-goodness escape probability is measurable") {
    // Pr(X outside the cell) for Gaussian X with power matched to the cell:
    // a finite lattice only approaches the ideal, so the probability is
    // measured, not asserted against an analytic target.
    Lattice sq = Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0});
    Rng rng(37);
    const double sigma = std::sqrt(sq.second_moment());
    int escapes = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        std::vector<double> x{rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
        auto k = sq.nearest_coords(std::span<const double>(x));
        if (k[0] != 0 || k[1] != 0) ++escapes;
    }
    double p = static_cast<double>(escapes) / n;
    CHECK(p > 0.0);   // dimension 2 is far from the asymptotic limit
    CHECK(p < 0.25);  // but a matched-power Gaussian mostly stays inside
}

TEST_CASE("nesting witness") {
    auto w1 = dmac::is_nested(Lattice::scaled_integers(4.0), Lattice::scaled_integers(2.0));
    CHECK(w1.nested);
    CHECK(w1.scale.value() == doctest::Approx(2.0));
    auto w2 = dmac::is_nested(Lattice::scaled_integers(3.0), Lattice::scaled_integers(2.0));
    CHECK_FALSE(w2.nested);
    // scaled pair: coarse 2Z inside fine Z
    auto w3 = dmac::is_nested(Lattice::scaled_integers(2.0), Lattice::scaled_integers(1.0));
    CHECK(w3.nested);
    CHECK(w3.scale.value() == doctest::Approx(2.0));

    Lattice fine = Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0});
    Lattice coarse = Lattice::from_generator(2, {2.0, 1.0, 0.0, 2.0});
    auto w4 = dmac::is_nested(coarse, fine);
    CHECK(w4.nested);
    Rng rng(21);
    auto pair = dmac::NestedPair::make(coarse, fine);
    CHECK(pair.check_random_points(200, rng));
    CHECK_THROWS(dmac::NestedPair::make(Lattice::scaled_integers(3.0), Lattice::scaled_integers(2.0)));
}
