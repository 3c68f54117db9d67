#include "dmac/scheme.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dmac/rates.hpp"
#include "dmac/stats.hpp"

namespace dmac {
namespace {

double sqr(double x) { return x * x; }

Lattice lat_for_power(double p) { return Lattice::scaled_integers(std::sqrt(12.0 * p)); }

double lower_with_allowance(double predicted_pre, double allowance) {
    return rates::clamp_rate(predicted_pre - allowance).value;
}

// Floor for a stage whose message does not fill the wrap cell: the wrapped
// output entropy is at least that of the wrapped message alone, while the
// conditional entropy is at most the Gaussian bound, giving
// R >= ½log2(min(msg_var, cell_var)/noise_var) − ½log2(πe/6).
double scaled_message_floor(double msg_var, double cell_var, double noise_var) {
    double v = std::min(msg_var, cell_var);
    return rates::clamp_rate(0.5 * std::log2(v / noise_var) - rates::shaping_loss_1d()).value;
}

}  // namespace

const char* preset_name(PresetId id) {
    switch (id) {
        case PresetId::thm2: return "thm2";
        case PresetId::symmetric_mmse: return "symmetric_mmse";
        case PresetId::thm3_helper: return "thm3_helper";
        case PresetId::thm4: return "thm4";
        case PresetId::helper_thm5: return "helper_thm5";
        case PresetId::helper_lemma4: return "helper_lemma4";
        case PresetId::lemma7: return "lemma7";
        case PresetId::common: return "common";
    }
    return "?";
}

std::optional<PresetId> preset_from_name(std::string_view name) {
    for (PresetId id : all_presets()) {
        if (name == preset_name(id)) return id;
    }
    return std::nullopt;
}

std::vector<PresetId> all_presets() {
    return {PresetId::thm2, PresetId::symmetric_mmse, PresetId::thm3_helper, PresetId::thm4,
            PresetId::helper_thm5, PresetId::helper_lemma4, PresetId::lemma7, PresetId::common};
}

bool ValidityReport::ok() const {
    for (const auto& c : checks)
        if (!c.satisfied) return false;
    return true;
}

std::string ValidityReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        if (!c.satisfied)
            os << "violated: " << c.condition << " (value " << c.value << ", bound " << c.bound << "); ";
    }
    std::string s = os.str();
    return s.empty() ? "ok" : s;
}

void ValidityReport::require(std::string condition, double value, double bound, bool satisfied) {
    checks.push_back({std::move(condition), value, bound, satisfied});
}

double modulo_encode(double v, double s, double dither, double alpha, const Lattice& lat) {
    if (lat.nearest_point(v) != 0.0)
        throw std::invalid_argument("encode: message point lies outside the fundamental cell");
    return lat.reduce(v - alpha * s + dither);
}

double front_end(double y, const SchemeConfig& cfg, double d1, double d2) {
    if (cfg.dither1 && !std::isfinite(d1))
        throw std::invalid_argument("front end: dither 1 required but missing");
    if (cfg.dither2 && !std::isfinite(d2))
        throw std::invalid_argument("front end: dither 2 required but missing");
    return cfg.lat_r.reduce(cfg.alpha_r * y - cfg.gamma * d1 - cfg.beta * d2);
}

EquivNoiseSpec equiv_noise_of(const SchemeConfig& cfg) {
    PresetOptions opts;
    opts.lemma7_alpha = cfg.lemma7_alpha;
    opts.thm2_dithers = cfg.dither1;
    return build_preset(cfg.preset, cfg.powers, opts).stages.front().noise;
}

namespace {

Preset build_thm2(const PowerConfig& pc, const PresetOptions& opts) {
    Preset p;
    const double pm = pc.min_power();
    const double n = pc.noise;
    Lattice lat = lat_for_power(pm);
    p.cfg.preset = PresetId::thm2;
    p.cfg.channel = ChannelKind::doubly_dirty;
    p.cfg.powers = pc;
    p.cfg.alpha1 = p.cfg.alpha2 = p.cfg.alpha_r = 1.0;
    p.cfg.dither1 = p.cfg.dither2 = opts.thm2_dithers;
    p.cfg.gamma = p.cfg.dither1 ? 1.0 : 0.0;
    p.cfg.beta = p.cfg.dither2 ? 1.0 : 0.0;
    p.cfg.lat1 = p.cfg.lat2 = p.cfg.lat_r = lat;

    StageModel st;
    st.name = "sum";
    st.noise.wrap_delta = lat.spacing();
    st.noise.components = {NoiseComponent::gaussian(n)};
    st.message_widths = {lat.spacing(), lat.spacing()};
    st.coef1 = st.coef2 = 1.0;
    double pred_pre = 0.5 * std::log2(pm / n);
    st.predicted_rate = pred_pre;
    st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
    st.outer_cap = rates::capacity(pm / n);
    st.counts_user1 = st.counts_user2 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_symmetric(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    p.validity.require("P1 == P2 (symmetric preset)", pc.p1 - pc.p2, 0.0,
                       std::fabs(pc.p1 - pc.p2) <= 1e-9 * pc.max_power());
    const double P = pc.p1;
    const double alpha = 2.0 * P / (2.0 * P + n);
    Lattice lat = lat_for_power(P);
    p.cfg.preset = PresetId::symmetric_mmse;
    p.cfg.channel = ChannelKind::doubly_dirty;
    p.cfg.powers = pc;
    p.cfg.alpha1 = p.cfg.alpha2 = p.cfg.alpha_r = alpha;
    p.cfg.beta = p.cfg.gamma = 1.0;
    p.cfg.lat1 = p.cfg.lat2 = p.cfg.lat_r = lat;

    StageModel st;
    st.name = "sum";
    st.noise.wrap_delta = lat.spacing();
    st.noise.components = {NoiseComponent::uniform(lat.spacing(), 1.0 - alpha),
                           NoiseComponent::uniform(lat.spacing(), 1.0 - alpha),
                           NoiseComponent::gaussian(alpha * alpha * n)};
    st.message_widths = {lat.spacing(), lat.spacing()};
    st.coef1 = st.coef2 = 1.0;
    double pred_pre = 0.5 * std::log2(0.5 + P / n);
    st.predicted_rate = rates::clamp_rate(pred_pre).value;
    st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
    st.outer_cap = rates::capacity(P / n);
    st.counts_user1 = st.counts_user2 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_thm3_helper(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    const double boundary = std::sqrt(pc.p1 * pc.p2) - pc.min_power();
    p.validity.require("N <= sqrt(P1 P2) - min(P1, P2)", n, boundary, n <= boundary + 1e-12);
    p.cfg.preset = PresetId::thm3_helper;
    p.cfg.channel = ChannelKind::doubly_dirty;
    p.cfg.powers = pc;
    p.cfg.user1_sends = false;

    StageModel st;
    st.name = "helper";
    st.coef2 = 1.0;
    if (pc.p1 >= pc.p2) {
        // Stronger helper: fine lattice for the helper, receiver works on the
        // message lattice; the helper quantization term lands on it exactly.
        const double p1_eff = sqr(pc.p2 + n) / pc.p2;
        const double alpha2 = pc.p2 / (pc.p2 + n);
        p.validity.require("helper power covers (P2+N)^2/P2", pc.p1, p1_eff, pc.p1 >= p1_eff - 1e-9 * p1_eff);
        p.cfg.lat1 = lat_for_power(p1_eff);
        p.cfg.lat2 = p.cfg.lat1.scaled_by(alpha2);
        p.cfg.lat_r = p.cfg.lat2;
        p.cfg.alpha1 = 1.0;
        p.cfg.alpha2 = alpha2;
        p.cfg.alpha_r = alpha2;
        p.cfg.gamma = alpha2;
        p.cfg.beta = 1.0;
        st.noise.wrap_delta = p.cfg.lat2.spacing();
        st.noise.components = {NoiseComponent::uniform(p.cfg.lat2.spacing(), 1.0 - alpha2),
                               NoiseComponent::gaussian(alpha2 * alpha2 * n)};
        st.message_widths = {p.cfg.lat2.spacing()};
        st.coef2 = 1.0;
        double pred_pre = rates::capacity(pc.p2 / n);
        st.predicted_rate = pred_pre;
        st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
        st.outer_cap = rates::capacity(pc.min_power() / n);
    } else {
        // Stronger message user: the message rides scaled through the helper
        // front end and exactly fills its cell.
        const double p2_eff = sqr(pc.p1 + n) / pc.p1;
        const double alpha1 = pc.p1 / (pc.p1 + n);
        p.validity.require("message power covers (P1+N)^2/P1", pc.p2, p2_eff, pc.p2 >= p2_eff - 1e-9 * p2_eff);
        p.cfg.lat2 = lat_for_power(p2_eff);
        p.cfg.lat1 = p.cfg.lat2.scaled_by(alpha1);
        p.cfg.lat_r = p.cfg.lat1;
        p.cfg.alpha1 = alpha1;
        p.cfg.alpha2 = 1.0;
        p.cfg.alpha_r = alpha1;
        p.cfg.gamma = 1.0;
        p.cfg.beta = 0.0;
        p.cfg.dither2 = false;
        st.noise.wrap_delta = p.cfg.lat1.spacing();
        st.noise.components = {NoiseComponent::uniform(p.cfg.lat1.spacing(), 1.0 - alpha1),
                               NoiseComponent::gaussian(alpha1 * alpha1 * n)};
        st.message_widths = {p.cfg.lat1.spacing()};
        st.coef2 = alpha1;
        double pred_pre = rates::capacity(pc.p1 / n);
        st.predicted_rate = pred_pre;
        st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
        st.outer_cap = rates::capacity(pc.min_power() / n);
    }
    st.counts_user2 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_thm4(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    const double boundary = std::sqrt(pc.p1 * pc.p2) - pc.min_power();
    p.validity.require("N >= sqrt(P1 P2) - min(P1, P2)", n, boundary, n >= boundary - 1e-12);
    p.cfg.preset = PresetId::thm4;
    p.cfg.channel = ChannelKind::doubly_dirty;
    p.cfg.powers = pc;
    p.cfg.user2_sends = false;
    p.cfg.lat1 = lat_for_power(pc.p1);
    p.cfg.lat2 = lat_for_power(pc.p2);
    const double d1 = p.cfg.lat1.spacing();
    const double d2 = p.cfg.lat2.spacing();

    StageModel st;
    st.name = "corner";
    st.coef1 = 1.0;
    double pred_pre = 0.5 * std::log2((pc.p1 + pc.p2 + n) /
                                      (2.0 * n + sqr(std::sqrt(pc.p1) - std::sqrt(pc.p2))));
    if (pc.p1 <= pc.p2) {
        const double alpha1 = std::sqrt(pc.p1) * (std::sqrt(pc.p1) + std::sqrt(pc.p2)) / (pc.p1 + pc.p2 + n);
        const double alpha2 = alpha1 * std::sqrt(pc.p2 / pc.p1);
        p.validity.require("alpha2 >= 1e-6", alpha2, 1e-6, alpha2 >= 1e-6);
        p.validity.require("alpha2 <= 1", alpha2, 1.0, alpha2 <= 1.0 + 1e-12);
        p.cfg.alpha1 = alpha1;
        p.cfg.alpha2 = alpha2;
        p.cfg.alpha_r = alpha1;
        p.cfg.gamma = 1.0;
        p.cfg.beta = alpha1 / alpha2;
        p.cfg.lat_r = p.cfg.lat1;
        st.noise.wrap_delta = d1;
        st.noise.components = {NoiseComponent::uniform(d1, 1.0 - alpha1),
                               NoiseComponent::uniform(d2, std::sqrt(pc.p1 / pc.p2) - alpha1),
                               NoiseComponent::gaussian(alpha1 * alpha1 * n)};
        st.message_widths = {d1};
        st.coef1 = 1.0;
    } else {
        const double alpha2 = std::sqrt(pc.p2) * (std::sqrt(pc.p1) + std::sqrt(pc.p2)) / (pc.p1 + pc.p2 + n);
        const double alpha1 = alpha2 * std::sqrt(pc.p1 / pc.p2);
        p.validity.require("alpha1 >= 1e-6", alpha1, 1e-6, alpha1 >= 1e-6);
        p.validity.require("alpha1 <= 1", alpha1, 1.0, alpha1 <= 1.0 + 1e-12);
        p.cfg.alpha1 = alpha1;
        p.cfg.alpha2 = alpha2;
        p.cfg.alpha_r = alpha2;
        p.cfg.beta = 1.0;
        p.cfg.gamma = alpha2 / alpha1;
        p.cfg.lat_r = p.cfg.lat2;
        st.noise.wrap_delta = d2;
        st.noise.components = {NoiseComponent::uniform(d1, std::sqrt(pc.p2 / pc.p1) - alpha2),
                               NoiseComponent::uniform(d2, 1.0 - alpha2),
                               NoiseComponent::gaussian(alpha2 * alpha2 * n)};
        st.message_widths = {d2};
        st.coef1 = std::sqrt(pc.p2 / pc.p1);
    }
    st.predicted_rate = rates::clamp_rate(pred_pre).value;
    st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
    st.outer_cap = rates::capacity(pc.min_power() / n);
    st.counts_user1 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_helper_thm5(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    p.validity.require("N <= |P1 - P2|", n, std::fabs(pc.p1 - pc.p2), n <= std::fabs(pc.p1 - pc.p2) + 1e-12);
    p.cfg.preset = PresetId::helper_thm5;
    p.cfg.channel = ChannelKind::single_dirty;
    p.cfg.powers = pc;
    p.cfg.user1_sends = false;
    p.cfg.user2_raw = true;
    p.cfg.dither2 = false;

    StageModel st;
    st.name = "helper";
    if (pc.p1 >= pc.p2) {
        // Strong helper: unit scaling; the uninformed message occupies a
        // proper sub-cell (kappa^2 * P + N = P holds by construction).
        const double p1_eff = pc.p2 + n;
        p.validity.require("helper power covers P2 + N", pc.p1, p1_eff, pc.p1 >= p1_eff - 1e-9 * p1_eff);
        p.cfg.lat1 = lat_for_power(p1_eff);
        const double kappa = std::sqrt(pc.p2 / p1_eff);
        p.cfg.lat2 = p.cfg.lat1.scaled_by(kappa);
        p.cfg.lat_r = p.cfg.lat1;
        p.cfg.alpha1 = 1.0;
        p.cfg.alpha_r = 1.0;
        p.cfg.gamma = 1.0;
        p.cfg.beta = 0.0;
        st.noise.wrap_delta = p.cfg.lat1.spacing();
        st.noise.components = {NoiseComponent::gaussian(n)};
        st.message_widths = {p.cfg.lat2.spacing()};
        st.coef2 = 1.0;
        st.predicted_rate = rates::capacity(pc.p2 / n);
        st.one_d_lower = scaled_message_floor(pc.p2, p1_eff, n);
        st.outer_cap = rates::capacity(pc.min_power() / n);
    } else {
        // Weak helper: MMSE scaling with an exactly matched lattice pair. The
        // construction is power-consistent only once the uninformed power
        // reaches (P1+N)^2/P1.
        const double p2_eff = sqr(pc.p1 + n) / pc.p1;
        const double alpha1 = pc.p1 / (pc.p1 + n);
        p.validity.require("uninformed power covers (P1+N)^2/P1", pc.p2, p2_eff,
                           pc.p2 >= p2_eff - 1e-9 * p2_eff);
        p.cfg.lat2 = lat_for_power(p2_eff);
        p.cfg.lat1 = p.cfg.lat2.scaled_by(alpha1);
        p.cfg.lat_r = p.cfg.lat1;
        p.cfg.alpha1 = alpha1;
        p.cfg.alpha_r = alpha1;
        p.cfg.gamma = 1.0;
        p.cfg.beta = 0.0;
        st.noise.wrap_delta = p.cfg.lat1.spacing();
        st.noise.components = {NoiseComponent::uniform(p.cfg.lat1.spacing(), 1.0 - alpha1),
                               NoiseComponent::gaussian(alpha1 * alpha1 * n)};
        st.message_widths = {p.cfg.lat1.spacing()};
        st.coef2 = alpha1;
        double pred_pre = rates::capacity(pc.p1 / n);
        st.predicted_rate = pred_pre;
        st.one_d_lower = lower_with_allowance(pred_pre, rates::shaping_loss_1d());
        st.outer_cap = rates::capacity(pc.min_power() / n);
    }
    st.counts_user2 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_helper_lemma4(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    p.validity.require("|P1 - P2| < N", std::fabs(pc.p1 - pc.p2), n, std::fabs(pc.p1 - pc.p2) < n + 1e-12);
    const double alpha1 = 2.0 * pc.p1 / (pc.p1 + pc.p2 + n);
    p.validity.require("alpha1 <= 1", alpha1, 1.0, alpha1 <= 1.0 + 1e-12);
    p.cfg.preset = PresetId::helper_lemma4;
    p.cfg.channel = ChannelKind::single_dirty;
    p.cfg.powers = pc;
    p.cfg.user1_sends = false;
    p.cfg.user2_raw = true;
    p.cfg.dither2 = false;
    p.cfg.lat1 = lat_for_power(pc.p1);
    p.cfg.lat2 = lat_for_power(pc.p2);
    p.cfg.lat_r = p.cfg.lat1;
    p.cfg.alpha1 = alpha1;
    p.cfg.alpha_r = alpha1;
    p.cfg.gamma = 1.0;
    p.cfg.beta = 0.0;

    StageModel st;
    st.name = "helper";
    st.noise.wrap_delta = p.cfg.lat1.spacing();
    st.noise.components = {NoiseComponent::uniform(p.cfg.lat1.spacing(), 1.0 - alpha1),
                           NoiseComponent::gaussian(alpha1 * alpha1 * n)};
    st.message_widths = {alpha1 * p.cfg.lat2.spacing()};
    st.coef2 = alpha1;
    st.predicted_rate = 0.5 * std::log2(1.0 + 4.0 * pc.p1 * pc.p2 /
                                        (sqr(pc.p2 - pc.p1 + n) + 4.0 * pc.p1 * n));
    st.one_d_lower = scaled_message_floor(alpha1 * alpha1 * pc.p2, pc.p1,
                                          sqr(1.0 - alpha1) * pc.p1 + alpha1 * alpha1 * n);
    st.outer_cap = rates::capacity(pc.min_power() / n);
    st.counts_user2 = true;
    p.stages.push_back(std::move(st));
    return p;
}

Preset build_lemma7(const PowerConfig& pc, const PresetOptions& opts) {
    Preset p;
    const double n = pc.noise;
    const double alpha = opts.lemma7_alpha >= 0.0 ? opts.lemma7_alpha : pc.p1 / (pc.p1 + n);
    p.validity.require("alpha1 in [0, 1]", alpha, 1.0, alpha >= 0.0 && alpha <= 1.0);
    p.cfg.preset = PresetId::lemma7;
    p.cfg.channel = ChannelKind::single_dirty;
    p.cfg.powers = pc;
    p.cfg.lemma7_alpha = alpha;
    p.cfg.user2_raw = true;
    p.cfg.dither2 = false;
    p.cfg.lat1 = lat_for_power(pc.p1);
    p.cfg.lat2 = lat_for_power(pc.p2);
    p.cfg.lat_r = p.cfg.lat1;
    p.cfg.alpha1 = alpha;
    p.cfg.alpha2 = 1.0;
    p.cfg.alpha_r = alpha;
    p.cfg.gamma = 1.0;
    p.cfg.beta = 0.0;
    const double d1 = p.cfg.lat1.spacing();
    const double d2 = p.cfg.lat2.spacing();

    const double mixed = sqr(1.0 - alpha) * pc.p1 + alpha * alpha * (pc.p2 + n);
    const double top = std::min(pc.p1, mixed);
    const double resid = sqr(1.0 - alpha) * pc.p1 + alpha * alpha * n;
    p.cfg.stage2_wrap_delta = std::sqrt(top / pc.p1) * d1;

    StageModel s1;
    s1.name = "user1";
    s1.noise.wrap_delta = d1;
    s1.noise.components = {NoiseComponent::uniform(d2, alpha),
                           NoiseComponent::uniform(d1, 1.0 - alpha),
                           NoiseComponent::gaussian(alpha * alpha * n)};
    s1.message_widths = {d1};
    s1.coef1 = 1.0;  // the scaled uninformed message stays inside the stage-one noise
    double pred1 = 0.5 * std::log2(pc.p1 / top);
    s1.predicted_rate = rates::clamp_rate(pred1).value;
    s1.one_d_lower = lower_with_allowance(pred1, rates::shaping_loss_1d());
    s1.outer_cap = rates::capacity(pc.p1 / n);
    s1.counts_user1 = true;
    p.stages.push_back(std::move(s1));

    StageModel s2;
    s2.name = "user2";
    s2.noise.wrap_delta = p.cfg.stage2_wrap_delta;
    s2.inner_wrap_delta = d1;  // the stripped signal is already reduced mod Λ1
    s2.noise.components = {NoiseComponent::uniform(d1, 1.0 - alpha),
                           NoiseComponent::gaussian(alpha * alpha * n)};
    s2.message_widths = {alpha * d2};
    s2.coef2 = alpha;
    s2.predicted_rate = rates::clamp_rate(0.5 * std::log2(top / resid)).value;
    s2.one_d_lower = scaled_message_floor(alpha * alpha * pc.p2, top, resid);
    s2.outer_cap = rates::capacity(pc.min_power() / n);
    s2.counts_user2 = true;
    p.stages.push_back(std::move(s2));
    return p;
}

Preset build_common(const PowerConfig& pc) {
    Preset p;
    const double n = pc.noise;
    const double alpha1 = pc.p1 / (pc.p1 + pc.p2 + n);
    const double alpha2 = pc.p2 / (pc.p2 + n);
    p.cfg.preset = PresetId::common;
    p.cfg.channel = ChannelKind::common_interference;
    p.cfg.powers = pc;
    p.cfg.lat1 = lat_for_power(pc.p1);
    p.cfg.lat2 = lat_for_power(pc.p2);
    p.cfg.lat_r = p.cfg.lat1;
    p.cfg.alpha1 = alpha1;
    p.cfg.alpha2 = alpha2;
    p.cfg.alpha_r = alpha1;
    p.cfg.gamma = 1.0;  // full dither removal; scaled removal only cancels when alpha1 = 1
    p.cfg.beta = 0.0;
    p.cfg.stage2_gain = 1.0 / (1.0 - alpha1);
    p.cfg.stage2_wrap_delta = p.cfg.lat2.spacing();
    p.validity.require("stage-two gain finite (alpha1 < 1)", alpha1, 1.0, alpha1 < 1.0);
    p.stage2_residual_power_prediction = pc.p1 * (pc.p2 + n) / (pc.p1 + pc.p2 + n);
    const double d1 = p.cfg.lat1.spacing();
    const double d2 = p.cfg.lat2.spacing();

    StageModel s1;
    s1.name = "user1";
    s1.noise.wrap_delta = d1;
    s1.noise.components = {NoiseComponent::uniform(d1, 1.0 - alpha1),
                           NoiseComponent::uniform(d2, alpha1),
                           NoiseComponent::gaussian(alpha1 * alpha1 * n)};
    s1.message_widths = {d1};
    s1.coef1 = 1.0;
    double pred1 = rates::capacity(pc.p1 / (pc.p2 + n));
    s1.predicted_rate = pred1;
    s1.one_d_lower = lower_with_allowance(pred1, rates::shaping_loss_1d());
    s1.outer_cap = rates::capacity(pc.p1 / n);
    s1.counts_user1 = true;
    p.stages.push_back(std::move(s1));

    StageModel s3;
    s3.name = "user2";
    s3.noise.wrap_delta = d2;
    s3.noise.components = {NoiseComponent::uniform(d2, 1.0 - alpha2),
                           NoiseComponent::gaussian(alpha2 * alpha2 * n)};
    s3.message_widths = {d2};
    s3.coef2 = 1.0;
    double pred3 = rates::capacity(pc.p2 / n);
    s3.predicted_rate = pred3;
    s3.one_d_lower = lower_with_allowance(pred3, rates::shaping_loss_1d());
    s3.outer_cap = rates::capacity(pc.p2 / n);
    s3.counts_user2 = true;
    p.stages.push_back(std::move(s3));
    return p;
}

}  // namespace

Preset build_preset(PresetId id, const PowerConfig& pc, const PresetOptions& opts) {
    pc.validate();
    switch (id) {
        case PresetId::thm2: return build_thm2(pc, opts);
        case PresetId::symmetric_mmse: return build_symmetric(pc);
        case PresetId::thm3_helper: return build_thm3_helper(pc);
        case PresetId::thm4: return build_thm4(pc);
        case PresetId::helper_thm5: return build_helper_thm5(pc);
        case PresetId::helper_lemma4: return build_helper_lemma4(pc);
        case PresetId::lemma7: return build_lemma7(pc, opts);
        case PresetId::common: return build_common(pc);
    }
    throw std::logic_error("unknown preset");
}

ThreeStageDecode decode_common_three_stage(double y, double v1_decoded, const SchemeConfig& cfg,
                                           double d1, double d2) {
    if (cfg.preset != PresetId::common)
        throw std::invalid_argument("three-stage decode: config is not the shared-interference preset");
    ThreeStageDecode out;
    out.v1_hat = v1_decoded;
    const double y1 = front_end(y, cfg, d1, d2);
    out.z_eq_hat = cfg.lat1.reduce(y1 - v1_decoded);
    const double corrected = y + cfg.stage2_gain * out.z_eq_hat;
    const double y_tilde = (1.0 - cfg.alpha1) * corrected;
    out.v2_hat = cfg.lat2.reduce(cfg.alpha2 * y_tilde - d2);
    return out;
}

SimulationResult simulate_equivalent(const Preset& preset, std::size_t n_samples,
                                     const InterferenceSpec& s1_spec, const InterferenceSpec& s2_spec,
                                     Rng& rng) {
    return simulate_equivalent(preset, n_samples, s1_spec, s2_spec, rng, rng);
}

SimulationResult simulate_equivalent(const Preset& preset, std::size_t n_samples,
                                     const InterferenceSpec& s1_spec, const InterferenceSpec& s2_spec,
                                     Rng& rng, Rng& state_rng) {
    const SchemeConfig& cfg = preset.cfg;
    if (!preset.validity.ok())
        throw std::invalid_argument(std::string("simulate: invalid preset config: ") + preset.validity.summary());
    SimulationResult res;
    res.y_prime.reserve(n_samples);
    res.z_eq.reserve(n_samples);
    const bool two_stage = cfg.preset == PresetId::lemma7 || cfg.preset == PresetId::common;
    if (two_stage) {
        res.stage2_out.reserve(n_samples);
        res.stage2_noise.reserve(n_samples);
    }
    const StageModel& st1 = preset.stages.front();
    const double noise_sd = std::sqrt(cfg.powers.noise);
    double pow1 = 0.0, pow2 = 0.0, resid2 = 0.0;

    Lattice stage2_lat;
    if (cfg.preset == PresetId::lemma7)
        stage2_lat = Lattice::scaled_integers(cfg.stage2_wrap_delta);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double v1 = cfg.user1_sends ? cfg.lat1.sample_dither_1d(rng) : 0.0;
        const double v2 = cfg.user2_sends ? cfg.lat2.sample_dither_1d(rng) : 0.0;
        // Dithered encoder outputs are uniform over the cell whatever the
        // state is, so they are drawn from the shared stream and the dither
        // that realizes them is reconstructed once the state is known. Two
        // runs sharing rng then differ only through the interference path.
        const double x1_target = cfg.dither1 ? cfg.lat1.sample_dither_1d(rng) : 0.0;
        const double x2_target = cfg.dither2 ? cfg.lat2.sample_dither_1d(rng) : 0.0;
        const double z = rng.normal(0.0, noise_sd);

        double s1 = 0.0, s2 = 0.0, d1 = 0.0, d2 = 0.0, x1 = 0.0, x2 = 0.0, y = 0.0;
        switch (cfg.channel) {
            case ChannelKind::doubly_dirty:
                s1 = draw_state_sample(s1_spec, i, n_samples, state_rng);
                s2 = draw_state_sample(s2_spec, i, n_samples, state_rng);
                if (cfg.dither1) d1 = cfg.lat1.reduce(x1_target - v1 + cfg.alpha1 * s1);
                if (cfg.dither2) d2 = cfg.lat2.reduce(x2_target - v2 + cfg.alpha2 * s2);
                x1 = cfg.lat1.reduce(v1 - cfg.alpha1 * s1 + d1);
                x2 = cfg.lat2.reduce(v2 - cfg.alpha2 * s2 + d2);
                y = x1 + x2 + s1 + s2 + z;
                break;
            case ChannelKind::single_dirty:
                s1 = draw_state_sample(s1_spec, i, n_samples, state_rng);
                if (cfg.dither1) d1 = cfg.lat1.reduce(x1_target - v1 + cfg.alpha1 * s1);
                x1 = cfg.lat1.reduce(v1 - cfg.alpha1 * s1 + d1);
                x2 = cfg.user2_raw ? v2 : cfg.lat2.reduce(v2 + d2);
                y = x1 + x2 + s1 + z;
                break;
            case ChannelKind::common_interference: {
                s1 = draw_state_sample(s1_spec, i, n_samples, state_rng);
                const double s_tilde = (1.0 - cfg.alpha1) * s1;
                if (cfg.dither1) d1 = cfg.lat1.reduce(x1_target - v1 + cfg.alpha1 * s1);
                if (cfg.dither2) d2 = cfg.lat2.reduce(x2_target - v2 + cfg.alpha2 * s_tilde);
                x1 = cfg.lat1.reduce(v1 - cfg.alpha1 * s1 + d1);
                x2 = cfg.lat2.reduce(v2 - cfg.alpha2 * s_tilde + d2);
                y = x1 + x2 + s1 + z;
                break;
            }
            case ChannelKind::k_user:
                throw std::invalid_argument("simulate: K-user presets are not defined");
        }
        pow1 += x1 * x1;
        pow2 += x2 * x2;

        const double y1 = front_end(y, cfg, d1, d2);
        res.y_prime.push_back(y1);
        res.z_eq.push_back(cfg.lat_r.reduce(y1 - st1.coef1 * v1 - st1.coef2 * v2));

        if (cfg.preset == PresetId::lemma7) {
            const double stripped = cfg.lat1.reduce(y1 - v1);
            res.stage2_out.push_back(stage2_lat.reduce(stripped));
            // Conditional noise takes the same two wraps the signal does.
            const double noise2 = -(1.0 - cfg.alpha1) * x1 + cfg.alpha1 * z;
            res.stage2_noise.push_back(stage2_lat.reduce(cfg.lat1.reduce(noise2)));
        } else if (cfg.preset == PresetId::common) {
            const double true_resid = -(1.0 - cfg.alpha1) * x1 + cfg.alpha1 * (x2 + z);
            resid2 += true_resid * true_resid;
            if (cfg.lat1.nearest_point(true_resid) != 0.0) ++res.stage2_overload;
            // Rate samples for the last stage come from the exact-reconstruction
            // channel; the overload counter reports how often the real decoder
            // deviates from it.
            const double n3 = -(1.0 - cfg.alpha2) * x2 + cfg.alpha2 * z;
            res.stage2_out.push_back(cfg.lat2.reduce(v2 + n3));
            res.stage2_noise.push_back(cfg.lat2.reduce(n3));
        }
    }
    res.power1 = pow1 / static_cast<double>(n_samples);
    res.power2 = pow2 / static_cast<double>(n_samples);
    if (cfg.preset == PresetId::common)
        res.stage2_residual_power = resid2 / static_cast<double>(n_samples);
    return res;
}

RateResult stage_numeric_rate(const StageModel& stage, int bins_log2) {
    if (stage.inner_wrap_delta <= 0.0)
        return rate_of_spec(stage.noise, stage.message_widths, bins_log2);

    // Double-wrapped stage: grid anchored to the inner cell, then folded onto
    // the (possibly incommensurate) final wrap lattice.
    const double h = stage.inner_wrap_delta / static_cast<double>(1LL << bins_log2);
    GridDensity noise = noise_density(stage.noise, h);
    RateResult r;
    if (noise.size() == 1) {
        r.degenerate = true;
        r.pre_clamp = static_cast<double>(bins_log2);
        r.rate = r.pre_clamp;
        return r;
    }
    GridDensity signal = noise;
    for (double w : stage.message_widths) {
        if (w <= 0.0) continue;
        signal = signal.convolved_with(GridDensity::uniform(w, h));
    }
    double h_noise = noise.wrapped_to(stage.inner_wrap_delta)
                         .rewrapped_to(stage.noise.wrap_delta, bins_log2)
                         .entropy_bits();
    double h_sig = signal.wrapped_to(stage.inner_wrap_delta)
                       .rewrapped_to(stage.noise.wrap_delta, bins_log2)
                       .entropy_bits();
    r.pre_clamp = h_sig - h_noise;
    r.clamped = r.pre_clamp < 0.0;
    r.rate = r.clamped ? 0.0 : r.pre_clamp;
    return r;
}

double stage_mc_rate(std::span<const double> outputs, std::span<const double> noise,
                     double wrap_delta, int bins) {
    const double half = wrap_delta / 2.0;
    const double h_out = stats::histogram_entropy_bits(outputs, bins, -half, half);
    const double h_noise = stats::histogram_entropy_bits(noise, bins, -half, half);
    return h_out - h_noise;
}

}  // namespace dmac
