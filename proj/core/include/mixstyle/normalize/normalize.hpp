#pragma once

#include <array>
#include <string>

#include "mixstyle/normalize/features.hpp"

namespace mixstyle::fxnorm {

// Linear-phase FIR matching filter toward the instrument's average spectrum.
// Per-bin correction clamped to +/- 12 dB. Silent buffers pass through.
AudioBuffer normalize_eq(const AudioBuffer& buffer, const InstrumentFeatures& features,
                         const AnalysisSettings& settings = {});

// Envelope exponentiation in the dB domain until the crest factor matches
// avg_crest within 0.3 dB. Silent buffers pass through.
AudioBuffer normalize_drc(const AudioBuffer& buffer, const InstrumentFeatures& features);

// One broadband scalar on the side channel so side/mid RMS hits
// avg_side_ratio exactly. Mono buffers (zero side) pass through.
AudioBuffer normalize_imaging(const AudioBuffer& buffer, const InstrumentFeatures& features);

// Energy-preserving per-channel gains so left RMS / (left+right RMS) hits
// avg_lr_balance. A silent channel borrows the mono sum, since no gain can
// move its balance.
AudioBuffer normalize_panning(const AudioBuffer& buffer, const InstrumentFeatures& features);

// Measure-and-gain plus one refinement pass; gating shifts after the first
// gain. Silence passes through.
AudioBuffer normalize_loudness(const AudioBuffer& buffer, double target_lufs);

// The five normalizations in order: EQ, DRC, imaging, panning, loudness.
AudioBuffer fx_normalize(const AudioBuffer& buffer, const std::string& instrument,
                         const NormalizationStats& stats, double target_lufs = -10.0);

// The stage order fx_normalize executes, exposed for pipeline instrumentation.
const std::array<const char*, 5>& fx_normalize_stages();

}  // namespace mixstyle::fxnorm
