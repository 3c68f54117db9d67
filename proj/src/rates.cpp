#include "dmac/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dmac::rates {
namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw std::logic_error("bisect: bracket does not straddle a root");
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 120) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

double thm4_pre_clamped(double p1, double p2, double n) {
    double s = std::sqrt(p1) - std::sqrt(p2);
    return clamp_rate(0.5 * std::log2((p1 + p2 + n) / (2.0 * n + s * s))).value;
}

double helper_inner_pre(double p1, double p2, double n) {
    double d = p2 - p1 + n;
    return 0.5 * std::log2(1.0 + 4.0 * p1 * p2 / (d * d + 4.0 * p1 * n));
}

}  // namespace

double capacity(double x) { return 0.5 * std::log2(1.0 + x); }

double shaping_loss_1d() { return 0.5 * std::log2(std::numbers::pi * std::numbers::e / 6.0); }

Clamped clamp_rate(double pre) {
    Clamped c;
    c.pre = pre;
    c.clamped = pre < 0.0;
    c.value = c.clamped ? 0.0 : pre;
    return c;
}

bool Region::contains(const RatePair& p, double tol) const {
    if (p.r1 < -tol || p.r2 < -tol) return false;
    for (const auto& h : constraints) {
        if (h.a * p.r1 + h.b * p.r2 > h.c + tol) return false;
    }
    return true;
}

Region outer_region(ChannelKind kind, const PowerConfig& pc) {
    pc.validate();
    Region r;
    switch (kind) {
        case ChannelKind::single_dirty: {
            r.label = "single_dirty_outer";
            r.constraints.push_back({0.0, 1.0, capacity(pc.min_power() / pc.noise)});
            r.constraints.push_back({1.0, 1.0, capacity(pc.p1 / pc.noise)});
            if (pc.p1 > pc.p2) {
                RatePair c = single_dirty_corner(pc);
                r.vertices.push_back(c);
                r.vertex_labels.push_back("corner");
            }
            r.vertices.push_back({capacity(pc.p1 / pc.noise), 0.0});
            r.vertex_labels.push_back("");
            break;
        }
        case ChannelKind::doubly_dirty: {
            r.label = "doubly_dirty_outer";
            r.constraints.push_back({1.0, 1.0, capacity(pc.min_power() / pc.noise)});
            break;
        }
        case ChannelKind::common_interference:
            return common_interference_region(pc);
        case ChannelKind::k_user: {
            r.label = "k_user_outer";
            // symmetric model: per-user power p1, constraint on the rate sum
            r.constraints.push_back({1.0, 1.0, capacity(pc.p1 / pc.noise)});
            break;
        }
    }
    return r;
}

RatePair single_dirty_corner(const PowerConfig& pc) {
    return {0.5 * std::log2((pc.p1 + pc.noise) / (pc.p2 + pc.noise)),
            capacity(pc.p2 / pc.noise)};
}

EnvelopeFn upper_envelope(std::span<const double> x, std::span<const double> f) {
    if (x.size() != f.size() || x.size() < 3)
        throw std::invalid_argument("envelope: need at least three grid points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw std::invalid_argument("envelope: grid must be strictly increasing");

    EnvelopeFn out;
    out.x.assign(x.begin(), x.end());
    out.raw.assign(f.begin(), f.end());

    // Upper hull by monotone chain: keep turns convex-down (concave majorant).
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2];
            std::size_t b = hull[hull.size() - 1];
            double cross = (x[b] - x[a]) * (f[i] - f[a]) - (x[i] - x[a]) * (f[b] - f[a]);
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    out.hull.assign(x.size(), 0.0);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (seg + 1 < hull.size() && x[hull[seg + 1]] < x[i]) ++seg;
        if (seg + 1 >= hull.size()) {
            out.hull[i] = f[hull.back()];
            continue;
        }
        std::size_t a = hull[seg], b = hull[seg + 1];
        double t = (x[i] - x[a]) / (x[b] - x[a]);
        out.hull[i] = f[a] + t * (f[b] - f[a]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) out.hull[i] = std::max(out.hull[i], f[i]);
    return out;
}

Tangency origin_tangent(double c, double offset) {
    if (!(c > 0.0)) throw std::invalid_argument("tangent: c must be positive");
    auto g = [c, offset](double x) { return 0.5 * std::log2(c + x) - offset; };
    auto gp = [c](double x) { return 0.5 / (std::log(2.0) * (c + x)); };
    // zero crossing of g
    double x_clamp = std::exp2(2.0 * offset) - c;
    double lo = std::max(x_clamp, 0.0) + 1e-12;
    auto mu = [&](double x) { return x * gp(x) - g(x); };  // >0 below tangency
    double hi = std::max(lo * 4.0, 8.0);
    while (mu(hi) > 0.0) hi *= 2.0;
    Tangency t;
    t.x = bisect(mu, lo, hi);
    t.slope = gp(t.x);
    return t;
}

double enveloped_log_value(double snr, double c, double offset) {
    if (snr < 0.0) throw std::invalid_argument("envelope: snr must be nonnegative");
    Tangency t = origin_tangent(c, offset);
    if (snr >= t.x) return clamp_rate(0.5 * std::log2(c + snr) - offset).value;
    return t.slope * snr;
}

double burst_envelope(const std::function<double(double, double)>& rate, double p1, double p2) {
    auto value = [&](double t) { return t * rate(p1 / t, p2 / t); };
    double best_t = 1.0;
    double best = value(1.0);
    const int steps = 160;
    for (int i = 0; i < steps; ++i) {
        double t = std::exp(std::log(1e-4) * (1.0 - static_cast<double>(i) / (steps - 1)));
        double v = value(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    double lo = std::max(best_t / 2.0, 1e-6);
    double hi = std::min(best_t * 2.0, 1.0);
    double t_ref = golden_max(value, lo, hi);
    return std::max(best, value(t_ref));
}

InnerBound inner_doubly(const PowerConfig& pc, DoublyMode mode) {
    pc.validate();
    InnerBound out;
    const double n = pc.noise;
    const double pmin = pc.min_power();
    const double snr = pmin / n;
    const double boundary = std::sqrt(pc.p1 * pc.p2) - pmin;
    switch (mode) {
        case DoublyMode::high_snr:
            out.value = out.pre_envelope = 0.5 * std::log2(snr);
            break;
        case DoublyMode::thm3: {
            if (n > boundary + 1e-12)
                throw std::domain_error("inner bound: matched-filter regime requires N <= sqrt(P1 P2) - min");
            out.value = out.pre_envelope = capacity(snr);
            break;
        }
        case DoublyMode::thm4: {
            if (n < boundary - 1e-12)
                throw std::domain_error("inner bound: MMSE regime requires N >= sqrt(P1 P2) - min");
            Clamped pre = clamp_rate(0.5 * std::log2((pc.p1 + pc.p2 + n) /
                                                     (2.0 * n + std::pow(std::sqrt(pc.p1) - std::sqrt(pc.p2), 2))));
            out.pre_envelope = pre.value;
            out.clamped = pre.clamped;
            out.value = burst_envelope([n](double a, double b) { return thm4_pre_clamped(a, b, n); },
                                       pc.p1, pc.p2);
            break;
        }
        case DoublyMode::symmetric: {
            if (std::fabs(pc.p1 - pc.p2) > 1e-9 * pc.max_power())
                throw std::domain_error("inner bound: symmetric mode requires P1 == P2");
            Clamped pre = clamp_rate(0.5 * std::log2(0.5 + snr));
            out.pre_envelope = pre.value;
            out.clamped = pre.clamped;
            out.value = enveloped_log_value(snr, 0.5, 0.0);
            break;
        }
        case DoublyMode::one_dim: {
            if (std::fabs(pc.p1 - pc.p2) > 1e-9 * pc.max_power())
                throw std::domain_error("inner bound: one-dimensional mode requires P1 == P2");
            Clamped pre = clamp_rate(0.5 * std::log2(0.5 + snr) - shaping_loss_1d());
            out.pre_envelope = pre.value;
            out.clamped = pre.clamped;
            out.value = enveloped_log_value(snr, 0.5, shaping_loss_1d());
            break;
        }
    }
    return out;
}

namespace {
// Regime comparisons carry a relative slack so configurations constructed to
// sit exactly on a boundary (e.g. P2 = P1 + N) classify consistently despite
// floating-point rounding of the power arithmetic.
bool leq_with_slack(double a, double b, double scale) { return a <= b + 1e-12 * scale; }
}  // namespace

double gap_zeta(const PowerConfig& pc) {
    pc.validate();
    const double boundary = std::sqrt(pc.p1 * pc.p2) - pc.min_power();
    if (leq_with_slack(pc.noise, boundary, pc.max_power() + pc.noise))
        return 0.0;  // inner bound meets the outer bound
    double outer = capacity(pc.min_power() / pc.noise);
    double inner = inner_doubly(pc, DoublyMode::thm4).value;
    return outer - inner;
}

double gap_eta(const PowerConfig& pc) {
    pc.validate();
    if (leq_with_slack(pc.noise, std::fabs(pc.p1 - pc.p2), pc.max_power() + pc.noise))
        return 0.0;  // capacity known
    HelperRates hr = helper_rates(pc);
    return hr.outer - hr.inner;
}

GapSupremum zeta_supremum() {
    // Tangency root of the symmetric self-noise curve.
    double x_star = bisect([](double x) { return x / (x + 0.5) - std::log(x + 0.5); }, 1.0, 3.0);
    auto gap_at = [](double snr) {
        PowerConfig pc{snr, snr, 1.0, std::nullopt};
        return gap_zeta(pc);
    };
    // Grid scan plus golden refinement around the best cell.
    double best_x = 1.0, best = 0.0;
    for (int i = 0; i <= 400; ++i) {
        double x = 0.02 + 3.0 * static_cast<double>(i) / 400.0;
        double v = gap_at(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    double x_ref = golden_max(gap_at, std::max(best_x - 0.05, 1e-3), best_x + 0.05, 80);
    GapSupremum s;
    s.root = x_star;
    s.snr_at_max = x_ref;
    s.gap = gap_at(x_ref);
    return s;
}

GapSupremum eta_supremum() {
    // Uniform bound on the helper gap: drop the envelope (it only shrinks the
    // gap) and maximize C(x) − ½log2(1 + 4x²/(1+4x)) over x = Pmin/N.
    auto gap_at = [](double x) {
        return capacity(x) - 0.5 * std::log2(1.0 + 4.0 * x * x / (1.0 + 4.0 * x));
    };
    double best_x = 0.1, best = 0.0;
    for (int i = 1; i <= 400; ++i) {
        double x = 4.0 * static_cast<double>(i) / 400.0;
        double v = gap_at(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    double x_ref = golden_max(gap_at, std::max(best_x - 0.05, 1e-4), best_x + 0.05, 80);
    GapSupremum s;
    s.root = x_ref;
    s.snr_at_max = x_ref;
    s.gap = gap_at(x_ref);
    return s;
}

HelperRates helper_rates(const PowerConfig& pc) {
    pc.validate();
    HelperRates hr;
    const double n = pc.noise;
    hr.outer = capacity(pc.min_power() / n);
    hr.sandwich_lower = capacity((pc.min_power() / n) * (pc.max_power() / (pc.p1 + n)));
    if (leq_with_slack(n, std::fabs(pc.p1 - pc.p2), pc.max_power() + n)) {
        hr.capacity_known = true;
        hr.capacity = hr.outer;
        hr.inner = hr.outer;
        hr.inner_pre_envelope = hr.outer;
        return hr;
    }
    hr.inner_pre_envelope = helper_inner_pre(pc.p1, pc.p2, n);
    hr.inner = burst_envelope([n](double a, double b) { return helper_inner_pre(a, b, n); },
                              pc.p1, pc.p2);
    return hr;
}

TimeShareResult helper_low_snr_timeshare(const PowerConfig& pc) {
    pc.validate();
    if (std::fabs(pc.p1 - pc.p2) > 1e-9 * pc.max_power())
        throw std::domain_error("timeshare: symmetric powers required");
    const double snr = pc.p1 / pc.noise;
    Roots roots = solve_roots();
    if (snr > roots.u_star)
        throw std::domain_error("timeshare: infeasible SNR (duty divider would fall below one)");
    auto rate_at = [snr](double delta) {
        double u = delta * snr;
        return std::log2(u * (1.0 + u)) / (4.0 * delta);
    };
    double hi = std::max(2.0, 4.0 * roots.u_star / snr);
    double delta = golden_max(rate_at, 1.0, hi, 160);
    TimeShareResult t;
    t.delta = delta;
    t.delta_snr_product = delta * snr;
    t.rate = rate_at(delta);
    t.slope = t.rate / snr;
    return t;
}

RatePair single_dirty_point(const PowerConfig& pc, double alpha1) {
    pc.validate();
    if (alpha1 < 0.0 || alpha1 > 1.0) throw std::invalid_argument("alpha grid must lie in [0,1]");
    const double n = pc.noise;
    const double v = (1.0 - alpha1) * (1.0 - alpha1) * pc.p1 + alpha1 * alpha1 * (pc.p2 + n);
    const double top = std::min(pc.p1, v);
    const double noise_term = (1.0 - alpha1) * (1.0 - alpha1) * pc.p1 + alpha1 * alpha1 * n;
    RatePair p;
    p.r1 = clamp_rate(0.5 * std::log2(pc.p1 / top)).value;
    p.r2 = clamp_rate(0.5 * std::log2(top / noise_term)).value;
    return p;
}

Region region_single_dirty(const PowerConfig& pc, std::span<const double> alpha_grid) {
    pc.validate();
    Region r;
    r.label = "single_dirty_inner";
    const double n = pc.noise;

    std::vector<RatePair> pts;
    std::vector<std::string> labels;
    pts.push_back({0.0, 0.0});
    labels.emplace_back("");
    pts.push_back({capacity(pc.p1 / n), 0.0});  // informed user alone, dirty-paper rate
    labels.emplace_back("informed_axis");
    for (double a : alpha_grid) {
        pts.push_back(single_dirty_point(pc, a));
        labels.emplace_back("");
        pts.push_back({0.0, pts[pts.size() - 1].r2});  // drop the informed message
        labels.emplace_back("");
    }
    // Boundary anchors.
    RatePair star = single_dirty_point(pc, pc.p1 / (pc.p1 + n));
    pts.push_back(star);
    labels.emplace_back("vertex_star");
    if (pc.p2 + n < pc.p1) {
        RatePair circ = single_dirty_point(pc, 1.0);
        pts.push_back(circ);
        labels.emplace_back("vertex_high_power");
    }

    // Upper-right hull of the point cloud.
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].r1 != pts[b].r1) return pts[a].r1 < pts[b].r1;
        return pts[a].r2 > pts[b].r2;
    });
    std::vector<std::size_t> hull;
    for (std::size_t idx : order) {
        if (!hull.empty() && pts[hull.back()].r1 == pts[idx].r1) continue;
        while (hull.size() >= 2) {
            const RatePair& a = pts[hull[hull.size() - 2]];
            const RatePair& b = pts[hull[hull.size() - 1]];
            const RatePair& c = pts[idx];
            double cross = (b.r1 - a.r1) * (c.r2 - a.r2) - (c.r1 - a.r1) * (b.r2 - a.r2);
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(idx);
    }
    // Keep only the decreasing (Pareto) part of the hull.
    for (std::size_t idx : hull) {
        r.vertices.push_back(pts[idx]);
        r.vertex_labels.push_back(labels[idx]);
    }
    double max_r1 = 0.0, max_r2 = 0.0;
    for (const auto& p : pts) {
        max_r1 = std::max(max_r1, p.r1);
        max_r2 = std::max(max_r2, p.r2);
    }
    r.constraints.push_back({1.0, 0.0, max_r1});
    r.constraints.push_back({0.0, 1.0, max_r2});
    if (pc.p1 <= pc.p2 - n) {
        // Time sharing between the two axis points closes the full simplex.
        r.constraints.push_back({1.0, 1.0, capacity(pc.p1 / n)});
        r.label = "single_dirty_capacity";
    }
    return r;
}

Region common_interference_region(const PowerConfig& pc) {
    pc.validate();
    Region r;
    r.label = "common_interference";
    const double n = pc.noise;
    r.constraints.push_back({1.0, 0.0, capacity(pc.p1 / n)});
    r.constraints.push_back({0.0, 1.0, capacity(pc.p2 / n)});
    r.constraints.push_back({1.0, 1.0, capacity((pc.p1 + pc.p2) / n)});
    r.vertices.push_back({capacity(pc.p1 / (pc.p2 + n)), capacity(pc.p2 / n)});
    r.vertex_labels.emplace_back("corner_user2_clean");
    r.vertices.push_back({capacity(pc.p1 / n), capacity(pc.p2 / (pc.p1 + n))});
    r.vertex_labels.emplace_back("corner_user1_clean");
    return r;
}

double binning_sum_bound(double p1, double p2, double q1, double q2, double n) {
    if (!(p1 > 0.0) || !(p2 > 0.0) || !(q1 > 0.0) || !(q2 > 0.0) || !(n > 0.0))
        throw std::invalid_argument("binning bound: variances must be positive");
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    return clamp_rate(0.5 * std::log2((q1 + q2) / (two_pi_e * q1 * q2 * n))).value;
}

KUserBounds k_user_bounds(int k, double p, double n) {
    if (k < 2) throw std::invalid_argument("k-user bounds: K must be at least 2");
    if (!(p > 0.0) || !(n > 0.0)) throw std::invalid_argument("k-user bounds: positive powers required");
    KUserBounds b;
    b.outer = capacity(p / n);
    b.inner_pre_envelope = clamp_rate(0.5 * std::log2(1.0 / k + p / n)).value;
    b.inner = enveloped_log_value(p / n, 1.0 / k, 0.0);
    return b;
}

Roots solve_roots() {
    Roots r;
    r.x_star = bisect([](double x) { return x / (x + 0.5) - std::log(x + 0.5); }, 1.0, 3.0);
    r.residual_x = std::fabs(r.x_star / (r.x_star + 0.5) - std::log(r.x_star + 0.5));
    // Tangency of ½log2(½+x) from the origin; algebraically the same equation.
    auto mu = [](double x) {
        double g = 0.5 * std::log2(0.5 + x);
        double gp = 0.5 / (std::log(2.0) * (0.5 + x));
        return x * gp - g;
    };
    r.snr_star = bisect(mu, 1.0, 3.0);
    r.residual_snr = std::fabs(mu(r.snr_star));
    r.u_star = bisect([](double u) { return std::log(u + u * u) - 1.0 - u / (1.0 + u); }, 1.0, 3.0);
    r.residual_u = std::fabs(std::log(r.u_star + r.u_star * r.u_star) - 1.0 - r.u_star / (1.0 + r.u_star));
    return r;
}

bool containment_check(const Region& inner, const Region& outer, double tol) {
    for (const auto& v : inner.vertices) {
        if (!outer.contains(v, tol)) return false;
    }
    return true;
}

}  // namespace dmac::rates
