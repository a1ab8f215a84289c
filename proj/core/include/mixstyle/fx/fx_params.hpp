#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixstyle/common/error.hpp"

namespace mixstyle::fx {

enum class FxKind : int {
  kEq = 0,
  kDrc = 1,
  kPan = 2,
  kImager = 3,
  kReverb = 4,
  kLoudness = 5,
};

inline constexpr int kNumFx = 6;

// Canonical chain order before shuffling: EQ, DRC, pan, imager, reverb, gain.
inline constexpr std::array<FxKind, kNumFx> kCanonicalOrder = {
    FxKind::kEq, FxKind::kDrc, FxKind::kPan, FxKind::kImager, FxKind::kReverb, FxKind::kLoudness};

const char* fx_name(FxKind k);
FxKind fx_from_name(const std::string& name);

enum class EqBandType : int { kPeaking = 0, kLowShelf = 1, kHighShelf = 2 };

struct EqBand {
  EqBandType type = EqBandType::kPeaking;
  double freq_hz = 1000.0;
  double gain_db = 0.0;
  double q = 0.707;
};

struct EqParams {
  std::vector<EqBand> bands;
  void validate() const;
};

struct DrcParams {
  double threshold_db = -20.0;
  double ratio = 4.0;
  double attack_ms = 5.0;
  double release_ms = 100.0;
  double knee_db = 0.0;
  double makeup_db = 0.0;
  void validate() const;
};

struct PanParams {
  // [0, pi/2]; 0 = full left, pi/4 = center.
  double angle = M_PI / 4.0;
  void validate() const;
};

struct ImagerParams {
  double side_gain = 1.0;  // [0, 3]
  void validate() const;
};

struct ReverbParams {
  // Synthetic IR spec; an external IR file may be referenced instead.
  double rt60_s = 1.0;
  double pre_delay_ms = 0.0;
  uint64_t ir_seed = 0;
  std::string ir_path;  // empty = synthesize
  double wet = 0.3;     // [0, 1]
  void validate() const;
};

struct LoudnessParams {
  double gain_db = 0.0;  // |gain| <= 12
  void validate() const;
};

// Parameter sampling ranges. Defaults are the documented contract; the paper
// leaves all of them open.
struct SamplingRanges {
  int eq_min_bands = 1, eq_max_bands = 6;
  double eq_freq_lo = 60.0, eq_freq_hi = 12000.0;  // log-uniform
  double eq_gain_abs = 12.0;
  double eq_q_lo = 0.3, eq_q_hi = 3.0;

  double drc_threshold_lo = -40.0, drc_threshold_hi = -10.0;
  double drc_ratio_lo = 2.0, drc_ratio_hi = 8.0;
  double drc_attack_lo = 1.0, drc_attack_hi = 50.0;
  double drc_release_lo = 50.0, drc_release_hi = 500.0;
  double drc_knee_lo = 0.0, drc_knee_hi = 6.0;
  double drc_makeup_lo = 0.0, drc_makeup_hi = 0.0;

  double pan_angle_lo = M_PI / 8.0, pan_angle_hi = 3.0 * M_PI / 8.0;

  double imager_side_lo = 0.0, imager_side_hi = 2.0;

  double reverb_rt60_lo = 0.2, reverb_rt60_hi = 3.0;
  double reverb_wet_lo = 0.05, reverb_wet_hi = 0.7;
  double reverb_predelay_lo = 0.0, reverb_predelay_hi = 20.0;  // ms

  double loudness_gain_abs = 6.0;
};

struct FxChainConfig {
  std::array<double, kNumFx> probabilities = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  SamplingRanges ranges;
  std::string ir_dir;  // optional directory of stereo IR WAVs
  void validate() const;
};

// One concrete sampled configuration of the 6-effect chain.
struct FxChainInstance {
  std::array<bool, kNumFx> applied = {false, false, false, false, false, false};
  std::array<FxKind, kNumFx> order = kCanonicalOrder;
  EqParams eq;
  DrcParams drc;
  PanParams pan;
  ImagerParams imager;
  ReverbParams reverb;
  LoudnessParams loudness;

  bool empty() const;
  void validate() const;  // includes the constrained-permutation invariant
};

}  // namespace mixstyle::fx
