#include "mixstyle/fx/fx_params.hpp"

namespace mixstyle::fx {

const char* fx_name(FxKind k) {
  switch (k) {
    case FxKind::kEq: return "eq";
    case FxKind::kDrc: return "drc";
    case FxKind::kPan: return "pan";
    case FxKind::kImager: return "imager";
    case FxKind::kReverb: return "reverb";
    case FxKind::kLoudness: return "loudness";
  }
  throw Error("fx_name: bad kind");
}

FxKind fx_from_name(const std::string& name) {
  for (int i = 0; i < kNumFx; ++i) {
    const auto k = static_cast<FxKind>(i);
    if (name == fx_name(k)) return k;
  }
  throw Error("unknown FX name: " + name);
}

void EqParams::validate() const {
  require(!bands.empty() && bands.size() <= 6, "EqParams: need 1..6 bands");
  for (const auto& b : bands) {
    require(b.freq_hz >= 20.0 && b.freq_hz <= 20000.0, "EqParams: freq out of [20, 20000]");
    require(std::fabs(b.gain_db) <= 24.0, "EqParams: |gain| > 24 dB");
    require(b.q >= 0.1 && b.q <= 10.0, "EqParams: Q out of [0.1, 10]");
  }
}

void DrcParams::validate() const {
  require(threshold_db >= -60.0 && threshold_db <= 0.0, "DrcParams: threshold out of [-60, 0]");
  require(ratio >= 1.0 && ratio <= 20.0, "DrcParams: ratio out of [1, 20]");
  require(attack_ms > 0.0 && release_ms > 0.0, "DrcParams: attack/release must be positive");
  require(knee_db >= 0.0, "DrcParams: knee must be >= 0");
}

void PanParams::validate() const {
  require(angle >= 0.0 && angle <= M_PI / 2.0, "PanParams: angle out of [0, pi/2]");
}

void ImagerParams::validate() const {
  require(side_gain >= 0.0 && side_gain <= 3.0, "ImagerParams: side_gain out of [0, 3]");
}

void ReverbParams::validate() const {
  require(rt60_s >= 0.1 && rt60_s <= 4.0, "ReverbParams: rt60 out of [0.1, 4]");
  require(wet >= 0.0 && wet <= 1.0, "ReverbParams: wet out of [0, 1]");
  require(pre_delay_ms >= 0.0, "ReverbParams: pre_delay must be >= 0");
}

void LoudnessParams::validate() const {
  require(std::fabs(gain_db) <= 12.0, "LoudnessParams: |gain| > 12 dB");
}

void FxChainConfig::validate() const {
  for (double p : probabilities)
    require(p >= 0.0 && p <= 1.0, "FxChainConfig: probability out of [0, 1]");
}

bool FxChainInstance::empty() const {
  for (bool a : applied)
    if (a) return false;
  return true;
}

void FxChainInstance::validate() const {
  // order must be the canonical order with only the (EQ,DRC) and
  // (pan,imager) swaps allowed; reverb 5th, loudness 6th.
  auto is_pair = [](FxKind a, FxKind b, FxKind x, FxKind y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  require(is_pair(order[0], order[1], FxKind::kEq, FxKind::kDrc),
          "FxChainInstance: slots 1-2 must hold {EQ, DRC}");
  require(is_pair(order[2], order[3], FxKind::kPan, FxKind::kImager),
          "FxChainInstance: slots 3-4 must hold {pan, imager}");
  require(order[4] == FxKind::kReverb, "FxChainInstance: slot 5 must be reverb");
  require(order[5] == FxKind::kLoudness, "FxChainInstance: slot 6 must be loudness");

  if (applied[static_cast<int>(FxKind::kEq)]) eq.validate();
  if (applied[static_cast<int>(FxKind::kDrc)]) drc.validate();
  if (applied[static_cast<int>(FxKind::kPan)]) pan.validate();
  if (applied[static_cast<int>(FxKind::kImager)]) imager.validate();
  if (applied[static_cast<int>(FxKind::kReverb)]) reverb.validate();
  if (applied[static_cast<int>(FxKind::kLoudness)]) loudness.validate();
}

}  // namespace mixstyle::fx
