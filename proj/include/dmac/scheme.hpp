#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmac/channel.hpp"
#include "dmac/density.hpp"
#include "dmac/equiv_noise.hpp"
#include "dmac/lattice.hpp"
#include "dmac/rng.hpp"

namespace dmac {

// Scheme presets. Each one resolves the canonical dithered modulo-lattice
// transmitter/receiver scalars and lattices for a particular operating point:
//   thm2           zero-forcing scaling, shared lattice, high-SNR sum rate
//   symmetric_mmse shared lattice with the MMSE scaling 2P/(2P+N)
//   thm3_helper    nested pair that cancels the quantization term exactly
//   thm4           MMSE pair for asymmetric powers (single-corner rate)
//   helper_thm5    helper at the capacity-achieving power split
//   helper_lemma4  helper MMSE scheme inside the gap regime
//   lemma7         informed-user scheme traced over alpha1 (two-stage decode)
//   common         shared interference, three-stage successive decoder
enum class PresetId { thm2, symmetric_mmse, thm3_helper, thm4, helper_thm5, helper_lemma4, lemma7, common };

const char* preset_name(PresetId id);
std::optional<PresetId> preset_from_name(std::string_view name);
std::vector<PresetId> all_presets();

struct ValidityCheck {
    std::string condition;
    double value = 0.0;
    double bound = 0.0;
    bool satisfied = true;
};

struct ValidityReport {
    std::vector<ValidityCheck> checks;
    bool ok() const;
    std::string summary() const;
    void require(std::string condition, double value, double bound, bool satisfied);
};

// Resolved canonical-scheme scalars and lattices, shared by simulation and
// the density-based rate computation.
struct SchemeConfig {
    PresetId preset = PresetId::thm2;
    ChannelKind channel = ChannelKind::doubly_dirty;
    PowerConfig powers;

    double alpha1 = 1.0, alpha2 = 1.0, alpha_r = 1.0;
    double beta = 0.0, gamma = 0.0;       // receiver dither scalings
    Lattice lat1, lat2, lat_r;
    bool dither1 = true, dither2 = true;
    bool user1_sends = true, user2_sends = true;
    bool user2_raw = false;               // x2 = v2, no modulo encoder

    // Two-stage decoders only.
    double stage2_wrap_delta = 0.0;       // second front-end lattice spacing
    double stage2_gain = 0.0;             // common: feedback gain into stage two
    double lemma7_alpha = -1.0;
};

// One decoding stage: the wrapped channel it sees, the uniform message
// components feeding it, and the rate figures it is expected to deliver.
struct StageModel {
    std::string name;
    EquivNoiseSpec noise;
    std::vector<double> message_widths;
    double coef1 = 0.0, coef2 = 0.0;      // message coefficients on V1/V2 inside the output
    double inner_wrap_delta = 0.0;        // nonzero: signal passes a first wrap before noise.wrap_delta
    double predicted_rate = 0.0;          // idealized (good-lattice) prediction
    double one_d_lower = 0.0;             // shaping-adjusted floor for the numeric rate
    double outer_cap = 0.0;               // information-theoretic ceiling for the numeric rate
    bool counts_user1 = false, counts_user2 = false;
};

struct Preset {
    SchemeConfig cfg;
    std::vector<StageModel> stages;
    ValidityReport validity;
    double stage2_residual_power_prediction = 0.0;  // common preset diagnostic
};

struct PresetOptions {
    double lemma7_alpha = -1.0;   // < 0: use the boundary-vertex scaling P1/(P1+N)
    bool thm2_dithers = true;     // false: power holds only on average over messages
};

Preset build_preset(PresetId id, const PowerConfig& powers, const PresetOptions& opts = {});

// Stage-one equivalent noise for a resolved config.
EquivNoiseSpec equiv_noise_of(const SchemeConfig& cfg);

// Canonical encoder x = [v − α·s + d] mod Λ.
double modulo_encode(double v, double s, double dither, double alpha, const Lattice& lat);

// Canonical receiver front end y' = [α_r·y − γ·d1 − β·d2] mod Λ_r.
double front_end(double y, const SchemeConfig& cfg, double d1, double d2);

struct ThreeStageDecode {
    double v1_hat = 0.0;       // caller-supplied stage-one decision
    double v2_hat = 0.0;       // stage-three front-end output
    double z_eq_hat = 0.0;     // reconstructed stage-one residual
};

// Successive decoder for the shared-interference scheme. There is no channel
// code at blocklength one, so the stage-one decision is supplied by the
// caller; the mod-Λ rate analysis is what guarantees it asymptotically.
ThreeStageDecode decode_common_three_stage(double y, double v1_decoded, const SchemeConfig& cfg,
                                           double d1, double d2);

struct SimulationResult {
    std::vector<double> y_prime;        // stage-one front-end outputs
    std::vector<double> z_eq;           // [y' − message] mod Λ_r
    std::vector<double> stage2_out;     // second-stage outputs (lemma7/common)
    std::vector<double> stage2_noise;
    double power1 = 0.0, power2 = 0.0;  // time-average encoder powers
    std::size_t stage2_overload = 0;    // stage-one residual escaped the cell
    double stage2_residual_power = 0.0;
};

SimulationResult simulate_equivalent(const Preset& preset, std::size_t n_samples,
                                     const InterferenceSpec& s1, const InterferenceSpec& s2,
                                     Rng& rng);

// Variant with a dedicated interference stream: messages, dithers, and noise
// come from rng while states come from state_rng, so two runs that share rng
// differ only in the interference realization (paired comparison).
SimulationResult simulate_equivalent(const Preset& preset, std::size_t n_samples,
                                     const InterferenceSpec& s1, const InterferenceSpec& s2,
                                     Rng& rng, Rng& state_rng);

// Density-path rate for one stage.
RateResult stage_numeric_rate(const StageModel& stage, int bins_log2 = kDefaultBinsLog2);

// Monte Carlo rate from simulation output: H(out) − H(noise) over the wrap cell.
double stage_mc_rate(std::span<const double> outputs, std::span<const double> noise,
                     double wrap_delta, int bins = 1024);

}  // namespace dmac
