#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dmac/channel.hpp"

namespace dmac::rates {

// Shared rate helper, bits per channel use.
double capacity(double x);                       // C(x) = ½·log2(1+x)
double shaping_loss_1d();                        // ½·log2(πe/6)

struct Clamped {
    double value = 0.0;        // [pre]+
    double pre = 0.0;
    bool clamped = false;
};
Clamped clamp_rate(double pre);

struct RatePair {
    double r1 = 0.0;
    double r2 = 0.0;
};

struct HalfPlane {
    double a = 0.0, b = 0.0, c = 0.0;   // a·R1 + b·R2 ≤ c
};

struct Region {
    std::vector<HalfPlane> constraints;
    std::vector<RatePair> vertices;          // achievable corner/boundary points
    std::vector<std::string> vertex_labels;  // parallel to vertices ("" = plain)
    std::string label;

    bool contains(const RatePair& p, double tol = 1e-9) const;
};

// ---- outer bounds -----------------------------------------------------------

Region outer_region(ChannelKind kind, const PowerConfig& pc);
RatePair single_dirty_corner(const PowerConfig& pc);   // boundary corner for P1 > P2

// ---- upper concave envelopes ------------------------------------------------

struct EnvelopeFn {
    std::vector<double> x;
    std::vector<double> raw;
    std::vector<double> hull;
};

// Upper concave majorant of grid samples, exact on the grid (monotone chain).
EnvelopeFn upper_envelope(std::span<const double> x, std::span<const double> f);

// Tangency point of the chord from the origin to f(x) = [½log2(c + x) − offset]+.
struct Tangency {
    double x = 0.0;
    double slope = 0.0;
};
Tangency origin_tangent(double c, double offset = 0.0);

// uce{[½log2(c + x) − offset]+} evaluated at snr: chord below the tangency
// point, the raw curve above it.
double enveloped_log_value(double snr, double c, double offset = 0.0);

// Envelope over the power pair realized as bursty time sharing with silence:
// sup over duty t in (0,1] of t·rate(p1/t, p2/t). rate must already be clamped.
double burst_envelope(const std::function<double(double, double)>& rate, double p1, double p2);

// ---- doubly dirty inner bounds ----------------------------------------------

enum class DoublyMode { high_snr, thm3, thm4, symmetric, one_dim };

struct InnerBound {
    double value = 0.0;         // post-envelope where applicable
    double pre_envelope = 0.0;  // raw operating-point value, clamped
    bool clamped = false;
};
InnerBound inner_doubly(const PowerConfig& pc, DoublyMode mode);

// ---- gap constants ----------------------------------------------------------

double gap_zeta(const PowerConfig& pc);   // exact 0 in the matched-filter regime
double gap_eta(const PowerConfig& pc);    // exact 0 when N <= |P1-P2|

struct GapSupremum {
    double gap = 0.0;
    double snr_at_max = 0.0;
    double root = 0.0;          // tangency root backing the closed form
};
GapSupremum zeta_supremum();
GapSupremum eta_supremum();

// ---- helper problem ---------------------------------------------------------

struct HelperRates {
    bool capacity_known = false;  // N <= |P1-P2|
    double capacity = 0.0;        // valid when capacity_known
    double outer = 0.0;
    double inner = 0.0;           // enveloped achievable rate
    double inner_pre_envelope = 0.0;
    double sandwich_lower = 0.0;  // diagnostic lower bound
};
HelperRates helper_rates(const PowerConfig& pc);

struct TimeShareResult {
    double delta = 0.0;            // duty divider (>= 1)
    double delta_snr_product = 0.0;
    double rate = 0.0;
    double slope = 0.0;            // rate per unit SNR
};
TimeShareResult helper_low_snr_timeshare(const PowerConfig& pc);  // symmetric, SNR-feasible

// ---- regions ----------------------------------------------------------------

Region region_single_dirty(const PowerConfig& pc, std::span<const double> alpha_grid);
RatePair single_dirty_point(const PowerConfig& pc, double alpha1);  // one operating point
Region common_interference_region(const PowerConfig& pc);

// ---- misc bounds ------------------------------------------------------------

double binning_sum_bound(double p1, double p2, double q1, double q2, double n);

struct KUserBounds {
    double outer = 0.0;
    double inner = 0.0;
    double inner_pre_envelope = 0.0;
};
KUserBounds k_user_bounds(int k, double p, double n);

// ---- roots ------------------------------------------------------------------

struct Roots {
    double x_star = 0.0;      // x/(x+½) = ln(x+½)
    double snr_star = 0.0;    // tangency of ½log2(½+x); same equation
    double u_star = 0.0;      // 1 + u/(1+u) = ln(u+u²)
    double residual_x = 0.0;
    double residual_snr = 0.0;
    double residual_u = 0.0;
};
Roots solve_roots();

bool containment_check(const Region& inner, const Region& outer, double tol = 1e-9);

}  // namespace dmac::rates
