#pragma once

#include <map>
#include <string>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"

namespace mixstyle::fxnorm {

using audio::AudioBuffer;

// Per-instrument average effect features driving FX normalization.
struct InstrumentFeatures {
  std::vector<float> avg_spectrum_db;  // smoothed log-magnitude, fft_size/2+1 bins
  double avg_loudness_lufs = -20.0;
  double avg_crest_db = 12.0;        // peak-to-RMS
  double avg_side_ratio = 0.2;       // side RMS / mid RMS
  double avg_lr_balance = 0.5;       // left RMS / (left + right RMS)
  void validate() const;
};

struct AnalysisSettings {
  int fft_size = 4096;
  int hop = 2048;
  double silence_threshold_db = -60.0;  // frame RMS gate for feature analysis
  double smoothing_octaves = 1.0 / 3.0;
};

struct NormalizationStats {
  AnalysisSettings settings;
  std::map<std::string, InstrumentFeatures> instruments;

  const InstrumentFeatures& require_instrument(const std::string& name) const;
};

// Frame-gated smoothed average spectrum of one buffer (dB per bin), using the
// same analysis the normalizer targets. Returns false if every frame is
// below the silence gate.
bool average_spectrum_db(const AudioBuffer& buffer, const AnalysisSettings& settings,
                         std::vector<float>& out_db);

// Fractional-octave box smoothing in the dB domain.
std::vector<float> smooth_spectrum_db(const std::vector<float>& spectrum_db, int fft_size,
                                      double sample_rate, double octaves);

double crest_factor_db(const AudioBuffer& buffer);
double side_mid_ratio(const AudioBuffer& buffer);
double lr_balance(const AudioBuffer& buffer);

// Features averaged across stems per instrument, silent frames excluded.
// Throws on an empty corpus or an all-silent instrument.
NormalizationStats compute_features(
    const std::map<std::string, std::vector<AudioBuffer>>& stems_per_instrument,
    const AnalysisSettings& settings = {}, int threads = 1);

std::string stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const std::string& text);
void save_stats(const NormalizationStats& stats, const std::string& path);
NormalizationStats load_stats(const std::string& path);

}  // namespace mixstyle::fxnorm
