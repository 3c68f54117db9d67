#include <doctest.h>

#include <cmath>
#include <vector>

#include "dmac/channel.hpp"
#include "dmac/stats.hpp"

using namespace dmac;

TEST_CASE("state generation") {
    Rng rng(17);
    auto zeros = draw_state(InterferenceSpec::gaussian(0.0), 16, rng);
    for (double v : zeros) CHECK(v == 0.0);

    auto seq = draw_state(InterferenceSpec::fixed({1.0, 2.0, 3.0}), 3, rng);
    CHECK(seq == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS(draw_state(InterferenceSpec::fixed({1.0, 2.0}), 3, rng));

    // chi-square concentration at n = 1e5
    auto big = draw_state(InterferenceSpec::gaussian(1e4), 100000, rng);
    CHECK(stats::variance(big) == doctest::Approx(1e4).epsilon(0.03));
}

TEST_CASE("adversarial patterns are deterministic and bounded") {
    Rng a(1), b(2);
    for (auto pat : {InterferenceSpec::Pattern::sawtooth, InterferenceSpec::Pattern::constant_ramp,
                     InterferenceSpec::Pattern::sign_alternating}) {
        auto spec = InterferenceSpec::adversarial(pat, 5.0);
        auto s1 = draw_state(spec, 64, a);
        auto s2 = draw_state(spec, 64, b);
        CHECK(s1 == s2);  // no randomness consumed
        for (double v : s1) CHECK(std::fabs(v) <= 5.0 + 1e-12);
    }
}

TEST_CASE("channel output per model") {
    std::vector<double> x1{1.0}, x2{2.0}, s1{3.0}, s2{4.0}, z{0.5};
    std::vector<std::vector<double>> xs{x1, x2};
    {
        std::vector<std::vector<double>> ss{s1, s2};
        auto y = channel_output(ChannelKind::doubly_dirty, xs, ss, z);
        CHECK(y[0] == doctest::Approx(10.5));
    }
    {
        std::vector<std::vector<double>> ss{s1};
        auto y = channel_output(ChannelKind::single_dirty, xs, ss, z);
        CHECK(y[0] == doctest::Approx(6.5));
        auto yc = channel_output(ChannelKind::common_interference, xs, ss, z);
        CHECK(yc[0] == doctest::Approx(6.5));
    }
    {
        std::vector<std::vector<double>> xs3{{1.0}, {1.0}, {1.0}};
        std::vector<std::vector<double>> ss3{{1.0}, {1.0}, {1.0}};
        auto y = channel_output(ChannelKind::k_user, xs3, ss3, z);
        CHECK(y[0] == doctest::Approx(6.5));
    }
    // arity and length checks
    std::vector<std::vector<double>> ss_bad{s1};
    CHECK_THROWS(channel_output(ChannelKind::doubly_dirty, xs, ss_bad, z));
    std::vector<std::vector<double>> ss_len{{3.0, 3.0}, {4.0, 4.0}};
    CHECK_THROWS(channel_output(ChannelKind::doubly_dirty, xs, ss_len, z));
}

TEST_CASE("channel output is linear in each argument") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        double a = rng.uniform(-2.0, 2.0);
        std::vector<double> x1{rng.uniform(-1.0, 1.0)}, x2{rng.uniform(-1.0, 1.0)};
        std::vector<double> s1{rng.uniform(-1.0, 1.0)}, s2{rng.uniform(-1.0, 1.0)}, z{rng.uniform(-1.0, 1.0)};
        std::vector<std::vector<double>> xs{x1, x2}, ss{s1, s2};
        auto y = channel_output(ChannelKind::doubly_dirty, xs, ss, z);
        std::vector<std::vector<double>> xs_scaled{{a * x1[0]}, {x2[0]}};
        auto y2 = channel_output(ChannelKind::doubly_dirty, xs_scaled, ss, z);
        CHECK(y2[0] - y[0] == doctest::Approx((a - 1.0) * x1[0]).epsilon(1e-12));
    }
}

TEST_CASE("correlated interference decomposition") {
    {
        auto d = decompose_correlated(2.0, 3.0, 0.0);
        CHECK(d.var_s1 == doctest::Approx(4.0));
        CHECK(d.var_s2 == doctest::Approx(9.0));
        CHECK(d.beta1 == 0.0);
        CHECK(d.beta2 == 0.0);
    }
    {
        auto d = decompose_correlated(2.0, 2.0, 0.5);
        CHECK(d.var_s1 == doctest::Approx(2.0));
        CHECK(d.var_s2 == doctest::Approx(2.0));
    }
    CHECK_THROWS(decompose_correlated(1.0, 1.0, 1.0));

    // reconstruction: covariance of (S1 + b1 S0, S2 + b2 S0) matches the target
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        double sig1 = rng.uniform(0.2, 3.0);
        double sig2 = rng.uniform(0.2, 3.0);
        double rho = rng.uniform(-0.95, 0.95);
        auto d = decompose_correlated(sig1, sig2, rho);
        double v1 = d.var_s1 + d.beta1 * d.beta1 * d.var_s0;
        double v2 = d.var_s2 + d.beta2 * d.beta2 * d.var_s0;
        double cov = d.beta1 * d.beta2 * d.var_s0;
        CHECK(v1 == doctest::Approx(sig1 * sig1).epsilon(1e-9));
        CHECK(v2 == doctest::Approx(sig2 * sig2).epsilon(1e-9));
        CHECK(cov == doctest::Approx(rho * sig1 * sig2).epsilon(1e-9));
    }

    // sampled round trip
    Rng rng2(29);
    auto d = decompose_correlated(1.5, 0.8, -0.6);
    const std::size_t n = 200000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s0 = rng2.normal(0.0, std::sqrt(d.var_s0));
        a[i] = rng2.normal(0.0, std::sqrt(d.var_s1)) + d.beta1 * s0;
        b[i] = rng2.normal(0.0, std::sqrt(d.var_s2)) + d.beta2 * s0;
    }
    CHECK(stats::variance(a) == doctest::Approx(1.5 * 1.5).epsilon(0.03));
    CHECK(stats::variance(b) == doctest::Approx(0.8 * 0.8).epsilon(0.03));
    CHECK(stats::correlation(a, b) == doctest::Approx(-0.6).epsilon(0.03));
}

TEST_CASE("correlated state pair sampling") {
    Rng rng(31);
    auto pair = draw_correlated_states(2.0, 1.5, 0.4, 150000, rng);
    CHECK(stats::variance(pair.s1) == doctest::Approx(4.0).epsilon(0.03));
    CHECK(stats::variance(pair.s2) == doctest::Approx(2.25).epsilon(0.03));
    CHECK(stats::correlation(pair.s1, pair.s2) == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("power config validation") {
    PowerConfig bad{0.0, 1.0, 1.0, std::nullopt};
    CHECK_THROWS(bad.validate());
    PowerConfig badk{1.0, 1.0, 1.0, 1};
    CHECK_THROWS(badk.validate());
    PowerConfig good{2.0, 1.0, 0.5, 4};
    CHECK_NOTHROW(good.validate());
    CHECK(good.min_power() == 1.0);
    CHECK(good.swapped().p1 == 1.0);
}
