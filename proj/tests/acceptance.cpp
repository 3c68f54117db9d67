// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "dmac/rates.hpp"
#include "dmac/scheme.hpp"
#include "dmac/stats.hpp"

using namespace dmac;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s  (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

PowerConfig pcfg(double p1, double p2, double n) { return {p1, p2, n, std::nullopt}; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// --- criterion 1: sum-rate gap constant --------------------------------------

void criterion_zeta() {
    rates::GapSupremum s = rates::zeta_supremum();
    double closed = std::log2(s.root + 0.5) / (4.0 * s.root);
    bool pass = std::fabs(s.gap - 0.167) <= 1e-3 && std::fabs(s.snr_at_max - 1.155) <= 5e-3 &&
                std::fabs(s.gap - closed) <= 1e-4;
    report(1, "sum-rate gap supremum 0.167 bit at P/N = 1.155",
           pass, fmt("gap %.5f at %.4f, closed form %.5f", s.gap, s.snr_at_max, closed));
}

// --- criterion 2: roots -------------------------------------------------------

void criterion_roots() {
    rates::Roots r = rates::solve_roots();
    double slope = std::log2(r.u_star + r.u_star * r.u_star) / (4.0 * r.u_star);
    PowerConfig low = pcfg(0.005, 0.005, 1.0);
    rates::TimeShareResult t = rates::helper_low_snr_timeshare(low);
    bool pass = std::fabs(r.x_star - 1.655) <= 1e-3 && std::fabs(r.u_star - 1.832) <= 5e-3 &&
                std::fabs(slope - 0.324) <= 2e-3 && std::fabs(t.slope - 0.324) <= 2e-3 &&
                std::fabs(t.delta_snr_product - 1.832) <= 5e-3 &&
                r.residual_x < 1e-9 && r.residual_u < 1e-9 && r.residual_snr < 1e-9;
    report(2, "roots x*=1.655, u*=1.832, low-SNR slope 0.324",
           pass, fmt("x* %.5f, u* %.5f, slope %.5f", r.x_star, r.u_star, slope));
}

// --- criterion 3: helper gap constant + coarse grid bounds --------------------

void criterion_eta() {
    rates::GapSupremum s = rates::eta_supremum();
    bool pass = std::fabs(s.gap - 0.0850) <= 1e-3 && std::fabs(s.snr_at_max - 0.500) <= 5e-3;
    double closed = 0.5 * std::log2(9.0 / 8.0);
    pass = pass && std::fabs(s.gap - closed) <= 1e-9;

    // coarse bounds on a 100 x 100 x 10 grid
    double max_zeta = 0.0, max_eta = 0.0;
    for (int i = 1; i <= 100; ++i) {
        for (int j = 1; j <= 100; ++j) {
            for (int k = 1; k <= 10; ++k) {
                PowerConfig pc = pcfg(0.08 * i, 0.08 * j, 0.25 * k);
                max_zeta = std::max(max_zeta, rates::gap_zeta(pc));
                max_eta = std::max(max_eta, rates::gap_eta(pc));
            }
        }
    }
    pass = pass && max_zeta <= 0.5 * std::log2(1.5) + 1e-9 && max_eta <= std::log2(3.0) - 1.5 + 1e-9;
    report(3, "helper gap supremum 0.0850 bit at Pmin/N = 0.5; coarse bounds on grid",
           pass, fmt("sup %.5f at %.4f; grid max zeta %.4f, eta %.4f", s.gap, s.snr_at_max, max_zeta));
}

// --- criterion 4: exact-zero regimes and the boundary identity ----------------

void criterion_regimes() {
    bool pass = true;
    // straddle both regime boundaries on a grid
    for (int i = 1; i <= 40 && pass; ++i) {
        double p1 = 0.25 * i;
        for (double ratio : {0.2, 0.5, 0.9, 0.999, 1.001, 1.3, 2.5}) {
            // helper regime: N vs |P1 - P2|
            double n_eta = 0.8;
            double p2 = p1 + ratio * n_eta;
            double eta = rates::gap_eta(pcfg(p1, p2, n_eta));
            if (ratio >= 1.0) pass = pass && eta == 0.0;
            else pass = pass && eta >= 0.0;
            // doubly dirty regime: N vs sqrt(P1 P2) - min
            double edge = std::sqrt(p1 * (p1 + 1.0)) - std::min(p1, p1 + 1.0);
            if (edge > 0.0) {
                double zeta = rates::gap_zeta(pcfg(p1, p1 + 1.0, ratio * edge));
                if (ratio <= 1.0) pass = pass && zeta == 0.0;
                else pass = pass && zeta >= 0.0;
            }
        }
    }
    // algebraic identity at P2 = P1 + N: achievable expression meets the bound
    double worst = 0.0;
    for (double p1 : {0.3, 1.0, 2.7, 8.0, 40.0}) {
        for (double n : {0.2, 1.0, 3.0}) {
            double p2 = p1 + n;
            double inner = 0.5 * std::log2(1.0 + 4.0 * p1 * p2 /
                                           (std::pow(p2 - p1 + n, 2) + 4.0 * p1 * n));
            double outer = rates::capacity(std::min(p1, p2) / n);
            worst = std::max(worst, std::fabs(inner - outer));
        }
    }
    pass = pass && worst <= 1e-9;
    report(4, "gaps vanish exactly in the closed regimes; boundary identity to 1e-9",
           pass, fmt("boundary identity worst residual %.2e", worst));
}

// --- criterion 5: preset rates, density vs Monte Carlo ------------------------

struct PresetPlan {
    PresetId id;
    std::vector<double> snrs;
};

PowerConfig powers_for(PresetId id, double snr) {
    switch (id) {
        case PresetId::thm3_helper: {
            double p2 = snr;
            return pcfg((p2 + 1.0) * (p2 + 1.0) / p2, p2, 1.0);
        }
        case PresetId::helper_thm5:
            return pcfg(snr + 1.0, snr, 1.0);
        default:
            return pcfg(snr, snr, 1.0);
    }
}

void criterion_preset_rates() {
    const std::vector<PresetPlan> plans = {
        {PresetId::thm2, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::symmetric_mmse, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::thm3_helper, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::thm4, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::helper_thm5, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::helper_lemma4, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::lemma7, {0.5, 1.0, 2.0, 5.0, 10.0}},
        {PresetId::common, {0.5, 1.0, 2.0, 5.0, 10.0}},
    };
    const std::size_t samples = 1000000;
    bool pass = true;
    std::string worst_note = "all within bounds";
    double worst_mc_gap = 0.0;
    std::uint64_t cell = 0;
    for (const auto& plan : plans) {
        for (double snr : plan.snrs) {
            ++cell;
            PowerConfig pc = powers_for(plan.id, snr);
            Preset preset = build_preset(plan.id, pc);
            if (!preset.validity.ok()) {
                pass = false;
                worst_note = std::string(preset_name(plan.id)) + ": " + preset.validity.summary();
                continue;
            }
            Rng rng(424242, cell);
            auto sim = simulate_equivalent(preset, samples,
                                           InterferenceSpec::gaussian(1e4 * pc.max_power()),
                                           InterferenceSpec::gaussian(1e4 * pc.max_power()), rng);
            for (std::size_t si = 0; si < preset.stages.size(); ++si) {
                const StageModel& st = preset.stages[si];
                double numeric = stage_numeric_rate(st).rate;
                double mc = si == 0
                                ? stage_mc_rate(sim.y_prime, sim.z_eq, st.noise.wrap_delta)
                                : stage_mc_rate(sim.stage2_out, sim.stage2_noise, st.noise.wrap_delta);
                bool ok = numeric >= st.one_d_lower - 1e-9 && numeric <= st.outer_cap + 1e-6 &&
                          std::fabs(numeric - mc) <= 0.01;
                worst_mc_gap = std::max(worst_mc_gap, std::fabs(numeric - mc));
                if (!ok) {
                    pass = false;
                    worst_note = fmt("%s", 0.0);
                    worst_note = std::string(preset_name(plan.id)) + "/" + st.name +
                                 fmt(" snr %.2f: numeric %.4f", snr, numeric) +
                                 fmt(" mc %.4f lower %.4f", mc, st.one_d_lower) +
                                 fmt(" outer %.4f", st.outer_cap);
                }
            }
        }
    }
    report(5, "preset rates within [1-D floor, outer bound], Monte Carlo within 0.01 bit",
           pass, pass ? fmt("worst |mc - numeric| %.4f over 40 cells", worst_mc_gap) : worst_note);
}

// --- criterion 6: interference invariance -------------------------------------

void criterion_invariance() {
    bool pass = true;
    std::string note = "max rate delta / KS: ";
    double worst_rate = 0.0, worst_ks = 0.0;
    std::uint64_t cell = 0;
    for (PresetId id : all_presets()) {
        ++cell;
        PowerConfig pc = powers_for(id, 2.0);
        Preset preset = build_preset(id, pc);
        if (!preset.validity.ok()) {
            pass = false;
            continue;
        }
        const double pmax = pc.max_power();
        std::vector<InterferenceSpec> settings = {
            InterferenceSpec::gaussian(1e4 * pmax),
            InterferenceSpec::gaussian(1e5 * pmax),
            InterferenceSpec::adversarial(InterferenceSpec::Pattern::sawtooth,
                                          100.0 * std::sqrt(3.0 * pmax)),
        };
        std::vector<std::vector<double>> outs;
        std::vector<double> rates_mc;
        for (std::size_t s = 0; s < settings.size(); ++s) {
            Rng rng(515151, cell);  // identical message/dither/noise draws per setting
            Rng srng(515151, 1000 + cell * 8 + s);
            auto sim = simulate_equivalent(preset, 400000, settings[s], settings[s], rng, srng);
            rates_mc.push_back(stage_mc_rate(sim.y_prime, sim.z_eq, preset.stages[0].noise.wrap_delta));
            outs.push_back(std::move(sim.y_prime));
        }
        for (std::size_t s = 1; s < outs.size(); ++s) {
            worst_rate = std::max(worst_rate, std::fabs(rates_mc[s] - rates_mc[0]));
            worst_ks = std::max(worst_ks, stats::ks_two_sample(outs[0], outs[s]));
        }
    }
    pass = pass && worst_rate <= 1e-3 && worst_ks <= 0.005;
    report(6, "rates and front-end law invariant to the interference realization",
           pass, fmt("max rate delta %.2e, max KS %.4f", worst_rate, worst_ks));
}

// --- criterion 7: lattice identities ------------------------------------------

void criterion_lattice() {
    bool pass = true;
    // distributive law, bit-exact over dyadic data on dyadic lattices
    Rng rng(616161);
    std::vector<Lattice> lats = {Lattice::scaled_integers(0.5), Lattice::scaled_integers(2.0),
                                 Lattice::from_generator(2, {1.0, 0.0, 0.0, 1.0}),
                                 Lattice::from_generator(2, {2.0, 1.0, 0.0, 2.0})};
    std::size_t cases = 0;
    for (const Lattice& lat : lats) {
        const int n = lat.dimension();
        for (int trial = 0; trial < 2500; ++trial) {
            ++cases;
            std::vector<double> x(n), y(n), xy(n);
            for (int c = 0; c < n; ++c) {
                x[c] = static_cast<double>(static_cast<long long>(rng.next_u64() % 2000001) - 1000000) / 256.0;
                y[c] = static_cast<double>(static_cast<long long>(rng.next_u64() % 2000001) - 1000000) / 256.0;
                xy[c] = x[c] + y[c];
            }
            auto mx = lat.reduce(std::span<const double>(x));
            for (int c = 0; c < n; ++c) mx[c] += y[c];
            auto lhs = lat.reduce(std::span<const double>(mx));
            auto rhs = lat.reduce(std::span<const double>(xy));
            for (int c = 0; c < n; ++c) pass = pass && lhs[c] == rhs[c];
        }
    }

    // exact normalized second moment for the scaled integer family
    for (double d : {0.1, 0.5, 1.0, 2.0, 7.3}) {
        pass = pass && Lattice::scaled_integers(d).normalized_second_moment() == 1.0 / 12.0;
    }

    // crypto lemma at one million samples
    Lattice lat = Lattice::scaled_integers(2.0);
    Rng rng2(717171);
    const std::size_t n = 1000000;
    std::vector<double> shifted(n);
    for (auto& v : shifted) v = lat.reduce(0.77 + lat.sample_dither_1d(rng2));
    double ks = stats::ks_uniform(shifted, -1.0, 1.0);
    pass = pass && ks < 0.005;
    report(7, "distributive law bit-exact (1e4 cases); G(dZ) = 1/12 exact; dither KS < 0.005",
           pass, fmt("cases %.0f, dither KS %.5f", static_cast<double>(cases), ks));
}

// --- criterion 8: shared-interference scheme ----------------------------------

void criterion_common() {
    PowerConfig pc = pcfg(1.0, 1.0, 1.0);
    Preset preset = build_preset(PresetId::common, pc);
    Rng rng(818181);
    auto sim = simulate_equivalent(preset, 400000, InterferenceSpec::gaussian(1e4),
                                   InterferenceSpec::gaussian(1e4), rng);
    double ratio = sim.stage2_residual_power / preset.stage2_residual_power_prediction;
    bool pass = std::fabs(ratio - 1.0) <= 0.02;

    // corner predictions against the closed forms
    rates::Region region = rates::common_interference_region(pc);
    double c1 = rates::capacity(pc.p1 / (pc.p2 + pc.noise));
    double c2 = rates::capacity(pc.p2 / pc.noise);
    pass = pass && std::fabs(preset.stages[0].predicted_rate - c1) <= 1e-9;
    pass = pass && std::fabs(preset.stages[1].predicted_rate - c2) <= 1e-9;
    pass = pass && std::fabs(region.vertices[0].r1 - c1) <= 1e-9 &&
           std::fabs(region.vertices[0].r2 - c2) <= 1e-9;

    // region equals the clean pentagon
    pass = pass && region.constraints.size() == 3 &&
           std::fabs(region.constraints[0].c - rates::capacity(1.0)) <= 1e-12 &&
           std::fabs(region.constraints[2].c - rates::capacity(2.0)) <= 1e-12;
    report(8, "three-stage scheme: residual power within 2%, corners exact, clean pentagon",
           pass, fmt("residual ratio %.4f, overload %.4f%%", ratio,
                     100.0 * static_cast<double>(sim.stage2_overload) / 400000.0));
}

// --- criterion 9: binning collapse and K-user loss -----------------------------

void criterion_binning_kuser() {
    bool pass = true;
    const double pi_e = std::numbers::pi * std::numbers::e;
    for (double n : {0.5, 1.0, 2.0}) {
        double prev = 1e300;
        for (double q = 1e-5; q < 1e4; q *= 1.7) {
            double b = rates::binning_sum_bound(1.0, 1.0, q, q, n);
            pass = pass && b <= prev + 1e-12;
            prev = b;
            if (q >= 1.0 / (pi_e * n)) pass = pass && b == 0.0;
        }
    }
    double worst_gap = 0.0;
    for (int k = 2; k <= 64; ++k) {
        for (double snr = 0.05; snr <= 64.0; snr *= 1.3) {
            rates::KUserBounds b = rates::k_user_bounds(k, snr, 1.0);
            worst_gap = std::max(worst_gap, b.outer - b.inner);
            pass = pass && b.inner <= b.outer + 1e-9;
        }
    }
    pass = pass && worst_gap <= 0.5 + 1e-9;
    report(9, "binning bound nonincreasing, zero beyond 1/(pi e N); K-user loss <= 1/2 bit",
           pass, fmt("worst K-user gap %.4f bit", worst_gap));
}

// --- criterion 10: declared desk-scale substitutions ---------------------------

void criterion_declared() {
    // The asymptotically good lattice limits are represented by closed forms;
    // here we pin the substitution itself: the 1-D path must sit exactly one
    // shaping loss below the ideal expression, and the quoted 0.425 low-SNR
    // slope must disagree with the tangency-derived slope (reported, not used).
    rates::Roots r = rates::solve_roots();
    double derived_slope = 0.5 * std::log2(0.5 + r.snr_star) / r.snr_star;
    bool slope_mismatch_documented = std::fabs(derived_slope - 0.425) > 0.05;
    double sl = rates::shaping_loss_1d();
    PowerConfig pc = pcfg(4.0, 4.0, 1.0);
    double ideal = rates::inner_doubly(pc, rates::DoublyMode::symmetric).pre_envelope;
    double oned = rates::inner_doubly(pc, rates::DoublyMode::one_dim).pre_envelope;
    bool pass = slope_mismatch_documented && std::fabs((ideal - oned) - sl) <= 1e-12 &&
                std::fabs(sl - 0.2546) <= 1e-4;
    report(10, "declared substitutions: analytic good-lattice limits + 1-D shaping floor",
           pass, fmt("shaping loss %.4f bit, derived slope %.4f vs quoted 0.425", sl, derived_slope));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n----------------\n");
    criterion_zeta();
    criterion_roots();
    criterion_eta();
    criterion_regimes();
    criterion_preset_rates();
    criterion_invariance();
    criterion_lattice();
    criterion_common();
    criterion_binning_kuser();
    criterion_declared();
    std::printf("----------------\n%d criterion(s) failed\n", g_failures);
    return g_failures;
}
