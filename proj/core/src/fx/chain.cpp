#include "mixstyle/fx/chain.hpp"

#include <json.hpp>

namespace mixstyle::fx {

using nlohmann::json;

FxChainInstance sample_chain(const FxChainConfig& config, Rng& rng) {
  config.validate();
  const SamplingRanges& r = config.ranges;
  FxChainInstance inst;

  // Draw order is fixed: application mask, swaps, then per-FX parameters.
  for (int i = 0; i < kNumFx; ++i) inst.applied[i] = rng.bernoulli(config.probabilities[i]);

  if (rng.bernoulli(0.5)) std::swap(inst.order[0], inst.order[1]);
  if (rng.bernoulli(0.5)) std::swap(inst.order[2], inst.order[3]);

  if (inst.applied[static_cast<int>(FxKind::kEq)]) {
    const int nbands =
        r.eq_min_bands + static_cast<int>(rng.randint(r.eq_max_bands - r.eq_min_bands + 1));
    inst.eq.bands.clear();
    for (int b = 0; b < nbands; ++b) {
      EqBand band;
      band.type = static_cast<EqBandType>(rng.randint(3));
      band.freq_hz = rng.log_uniform(r.eq_freq_lo, r.eq_freq_hi);
      band.gain_db = rng.uniform(-r.eq_gain_abs, r.eq_gain_abs);
      band.q = rng.uniform(r.eq_q_lo, r.eq_q_hi);
      inst.eq.bands.push_back(band);
    }
  }
  if (inst.applied[static_cast<int>(FxKind::kDrc)]) {
    inst.drc.threshold_db = rng.uniform(r.drc_threshold_lo, r.drc_threshold_hi);
    inst.drc.ratio = rng.uniform(r.drc_ratio_lo, r.drc_ratio_hi);
    inst.drc.attack_ms = rng.uniform(r.drc_attack_lo, r.drc_attack_hi);
    inst.drc.release_ms = rng.uniform(r.drc_release_lo, r.drc_release_hi);
    inst.drc.knee_db = rng.uniform(r.drc_knee_lo, r.drc_knee_hi);
    inst.drc.makeup_db = rng.uniform(r.drc_makeup_lo, r.drc_makeup_hi);
  }
  if (inst.applied[static_cast<int>(FxKind::kPan)])
    inst.pan.angle = rng.uniform(r.pan_angle_lo, r.pan_angle_hi);
  if (inst.applied[static_cast<int>(FxKind::kImager)])
    inst.imager.side_gain = rng.uniform(r.imager_side_lo, r.imager_side_hi);
  if (inst.applied[static_cast<int>(FxKind::kReverb)]) {
    inst.reverb.rt60_s = rng.uniform(r.reverb_rt60_lo, r.reverb_rt60_hi);
    inst.reverb.wet = rng.uniform(r.reverb_wet_lo, r.reverb_wet_hi);
    inst.reverb.pre_delay_ms = rng.uniform(r.reverb_predelay_lo, r.reverb_predelay_hi);
    inst.reverb.ir_seed = rng.next_u64();
    inst.reverb.ir_path.clear();  // IR directories are resolved by the caller
  }
  if (inst.applied[static_cast<int>(FxKind::kLoudness)])
    inst.loudness.gain_db = rng.uniform(-r.loudness_gain_abs, r.loudness_gain_abs);

  inst.validate();
  return inst;
}

std::string chain_to_json(const FxChainInstance& instance) {
  json j;
  json order = json::array();
  for (FxKind k : instance.order) order.push_back(fx_name(k));
  j["order"] = order;
  json applied;
  for (int i = 0; i < kNumFx; ++i) applied[fx_name(static_cast<FxKind>(i))] = instance.applied[i];
  j["applied"] = applied;

  if (instance.applied[static_cast<int>(FxKind::kEq)]) {
    json bands = json::array();
    for (const auto& b : instance.eq.bands) {
      bands.push_back({{"type", static_cast<int>(b.type)},
                       {"freq_hz", b.freq_hz},
                       {"gain_db", b.gain_db},
                       {"q", b.q}});
    }
    j["eq"] = {{"bands", bands}};
  }
  if (instance.applied[static_cast<int>(FxKind::kDrc)]) {
    j["drc"] = {{"threshold_db", instance.drc.threshold_db}, {"ratio", instance.drc.ratio},
                {"attack_ms", instance.drc.attack_ms},       {"release_ms", instance.drc.release_ms},
                {"knee_db", instance.drc.knee_db},           {"makeup_db", instance.drc.makeup_db}};
  }
  if (instance.applied[static_cast<int>(FxKind::kPan)]) j["pan"] = {{"angle", instance.pan.angle}};
  if (instance.applied[static_cast<int>(FxKind::kImager)])
    j["imager"] = {{"side_gain", instance.imager.side_gain}};
  if (instance.applied[static_cast<int>(FxKind::kReverb)]) {
    j["reverb"] = {{"rt60_s", instance.reverb.rt60_s},
                   {"pre_delay_ms", instance.reverb.pre_delay_ms},
                   {"ir_seed", instance.reverb.ir_seed},
                   {"ir_path", instance.reverb.ir_path},
                   {"wet", instance.reverb.wet}};
  }
  if (instance.applied[static_cast<int>(FxKind::kLoudness)])
    j["loudness"] = {{"gain_db", instance.loudness.gain_db}};
  return j.dump(2);
}

FxChainInstance chain_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("chain_from_json: parse failure: ") + e.what());
  }
  FxChainInstance inst;
  const auto& order = j.at("order");
  require(order.size() == kNumFx, "chain_from_json: order must list 6 effects");
  for (int i = 0; i < kNumFx; ++i) inst.order[i] = fx_from_name(order[i].get<std::string>());
  for (int i = 0; i < kNumFx; ++i)
    inst.applied[i] = j.at("applied").at(fx_name(static_cast<FxKind>(i))).get<bool>();

  if (inst.applied[static_cast<int>(FxKind::kEq)]) {
    inst.eq.bands.clear();
    for (const auto& b : j.at("eq").at("bands")) {
      EqBand band;
      band.type = static_cast<EqBandType>(b.at("type").get<int>());
      band.freq_hz = b.at("freq_hz").get<double>();
      band.gain_db = b.at("gain_db").get<double>();
      band.q = b.at("q").get<double>();
      inst.eq.bands.push_back(band);
    }
  }
  if (inst.applied[static_cast<int>(FxKind::kDrc)]) {
    const auto& d = j.at("drc");
    inst.drc.threshold_db = d.at("threshold_db").get<double>();
    inst.drc.ratio = d.at("ratio").get<double>();
    inst.drc.attack_ms = d.at("attack_ms").get<double>();
    inst.drc.release_ms = d.at("release_ms").get<double>();
    inst.drc.knee_db = d.at("knee_db").get<double>();
    inst.drc.makeup_db = d.at("makeup_db").get<double>();
  }
  if (inst.applied[static_cast<int>(FxKind::kPan)]) inst.pan.angle = j.at("pan").at("angle").get<double>();
  if (inst.applied[static_cast<int>(FxKind::kImager)])
    inst.imager.side_gain = j.at("imager").at("side_gain").get<double>();
  if (inst.applied[static_cast<int>(FxKind::kReverb)]) {
    const auto& r = j.at("reverb");
    inst.reverb.rt60_s = r.at("rt60_s").get<double>();
    inst.reverb.pre_delay_ms = r.at("pre_delay_ms").get<double>();
    inst.reverb.ir_seed = r.at("ir_seed").get<uint64_t>();
    inst.reverb.ir_path = r.at("ir_path").get<std::string>();
    inst.reverb.wet = r.at("wet").get<double>();
  }
  if (inst.applied[static_cast<int>(FxKind::kLoudness)])
    inst.loudness.gain_db = j.at("loudness").at("gain_db").get<double>();

  inst.validate();
  return inst;
}

}  // namespace mixstyle::fx
