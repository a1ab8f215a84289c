#include "mixstyle/normalize/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mixstyle/audio/loudness.hpp"
#include "mixstyle/audio/stft.hpp"
#include "mixstyle/common/parallel.hpp"

namespace mixstyle::fxnorm {

using nlohmann::json;

void InstrumentFeatures::validate() const {
  require(!avg_spectrum_db.empty(), "InstrumentFeatures: empty spectrum");
  for (float v : avg_spectrum_db)
    require(std::isfinite(v), "InstrumentFeatures: non-finite spectrum bin");
  require(avg_side_ratio >= 0.0, "InstrumentFeatures: side ratio must be >= 0");
  require(avg_lr_balance > 0.0 && avg_lr_balance < 1.0,
          "InstrumentFeatures: balance must be in (0, 1)");
}

const InstrumentFeatures& NormalizationStats::require_instrument(const std::string& name) const {
  const auto it = instruments.find(name);
  require(it != instruments.end(), "unknown instrument in NormalizationStats: " + name);
  return it->second;
}

bool average_spectrum_db(const AudioBuffer& buffer, const AnalysisSettings& settings,
                         std::vector<float>& out_db) {
  buffer.validate();
  const int bins = settings.fft_size / 2 + 1;
  out_db.assign(static_cast<size_t>(bins), 0.0f);
  if (buffer.length() < 2) return false;

  const double gate = std::pow(10.0, settings.silence_threshold_db / 20.0);

  // mono analysis signal: (L+R)/2
  std::vector<float> mono(buffer.length());
  for (size_t i = 0; i < buffer.length(); ++i)
    mono[i] = 0.5f * (buffer.left()[i] + buffer.right()[i]);

  const auto spec = audio::stft_magnitude(mono, settings.fft_size, settings.hop);
  std::vector<double> acc(static_cast<size_t>(bins), 0.0);
  size_t kept = 0;
  for (int f = 0; f < spec.frames; ++f) {
    double e = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double m = spec.at(f, b);
      e += m * m;
    }
    // Parseval: frame energy / fft_size relates mag energy to sample energy
    const double frame_rms =
        std::sqrt(e / (static_cast<double>(settings.fft_size) * settings.fft_size));
    if (frame_rms < gate) continue;
    ++kept;
    for (int b = 0; b < bins; ++b)
      acc[static_cast<size_t>(b)] += 20.0 * std::log10(std::max<double>(spec.at(f, b), 1e-12));
  }
  if (kept == 0) return false;
  std::vector<float> raw(static_cast<size_t>(bins));
  for (int b = 0; b < bins; ++b)
    raw[static_cast<size_t>(b)] = static_cast<float>(acc[static_cast<size_t>(b)] / static_cast<double>(kept));
  out_db = smooth_spectrum_db(raw, settings.fft_size, buffer.sample_rate, settings.smoothing_octaves);
  return true;
}

std::vector<float> smooth_spectrum_db(const std::vector<float>& spectrum_db, int fft_size,
                                      double sample_rate, double octaves) {
  const int bins = static_cast<int>(spectrum_db.size());
  std::vector<float> out(spectrum_db.size());
  const double half = std::pow(2.0, octaves / 2.0);
  for (int b = 0; b < bins; ++b) {
    const double f = static_cast<double>(b) * sample_rate / fft_size;
    int lo, hi;
    if (b == 0) {
      lo = hi = 0;
    } else {
      lo = std::max(0, static_cast<int>(std::floor(f / half * fft_size / sample_rate)));
      hi = std::min(bins - 1, static_cast<int>(std::ceil(f * half * fft_size / sample_rate)));
    }
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += spectrum_db[static_cast<size_t>(k)];
    out[static_cast<size_t>(b)] = static_cast<float>(acc / (hi - lo + 1));
  }
  return out;
}

double crest_factor_db(const AudioBuffer& buffer) {
  const double peak = audio::peak_abs(buffer);
  const double rms = audio::rms_all(buffer);
  if (peak <= 0.0 || rms <= 0.0) return 0.0;
  return 20.0 * std::log10(peak / rms);
}

double side_mid_ratio(const AudioBuffer& buffer) {
  std::vector<float> mid, side;
  audio::to_mid_side(buffer, mid, side);
  const double m = audio::rms_mono(mid);
  const double s = audio::rms_mono(side);
  if (m <= 0.0) return 0.0;
  return s / m;
}

double lr_balance(const AudioBuffer& buffer) {
  const double l = audio::rms_mono(buffer.left());
  const double r = audio::rms_mono(buffer.right());
  if (l + r <= 0.0) return 0.5;
  return l / (l + r);
}

NormalizationStats compute_features(
    const std::map<std::string, std::vector<AudioBuffer>>& stems_per_instrument,
    const AnalysisSettings& settings, int threads) {
  require(!stems_per_instrument.empty(), "compute_features: empty corpus");

  NormalizationStats stats;
  stats.settings = settings;

  for (const auto& [name, stems] : stems_per_instrument) {
    require(!stems.empty(), "compute_features: no stems for instrument " + name);
    const int bins = settings.fft_size / 2 + 1;

    struct StemFeatures {
      std::vector<float> spectrum;
      double loudness = 0.0, crest = 0.0, side = 0.0, balance = 0.5;
      bool silent = true;
    };
    std::vector<StemFeatures> per_stem(stems.size());

    parallel_for(static_cast<int64_t>(stems.size()), threads, [&](int64_t i) {
      const AudioBuffer& b = stems[static_cast<size_t>(i)];
      StemFeatures f;
      if (average_spectrum_db(b, settings, f.spectrum)) {
        const auto lufs = audio::integrated_loudness(b);
        if (!lufs.silence()) {
          f.silent = false;
          f.loudness = lufs.value;
          f.crest = crest_factor_db(b);
          f.side = side_mid_ratio(b);
          f.balance = lr_balance(b);
        }
      }
      per_stem[static_cast<size_t>(i)] = std::move(f);
    });

    InstrumentFeatures avg;
    avg.avg_spectrum_db.assign(static_cast<size_t>(bins), 0.0f);
    avg.avg_loudness_lufs = avg.avg_crest_db = avg.avg_side_ratio = 0.0;
    avg.avg_lr_balance = 0.0;
    size_t used = 0;
    for (const auto& f : per_stem) {
      if (f.silent) continue;
      ++used;
      for (int b = 0; b < bins; ++b) avg.avg_spectrum_db[static_cast<size_t>(b)] += f.spectrum[static_cast<size_t>(b)];
      avg.avg_loudness_lufs += f.loudness;
      avg.avg_crest_db += f.crest;
      avg.avg_side_ratio += f.side;
      avg.avg_lr_balance += f.balance;
    }
    require(used > 0, "compute_features: all stems silent for instrument " + name);
    const double inv = 1.0 / static_cast<double>(used);
    for (auto& v : avg.avg_spectrum_db) v = static_cast<float>(v * inv);
    avg.avg_loudness_lufs *= inv;
    avg.avg_crest_db *= inv;
    avg.avg_side_ratio *= inv;
    avg.avg_lr_balance *= inv;
    avg.avg_lr_balance = std::clamp(avg.avg_lr_balance, 1e-4, 1.0 - 1e-4);
    avg.validate();
    stats.instruments[name] = std::move(avg);
  }
  return stats;
}

namespace {
constexpr int kStatsVersion = 1;
}

std::string stats_to_json(const NormalizationStats& stats) {
  json j;
  j["version"] = kStatsVersion;
  j["settings"] = {{"fft_size", stats.settings.fft_size},
                   {"hop", stats.settings.hop},
                   {"silence_threshold_db", stats.settings.silence_threshold_db},
                   {"smoothing_octaves", stats.settings.smoothing_octaves}};
  json insts;
  for (const auto& [name, f] : stats.instruments) {
    insts[name] = {{"avg_spectrum_db", f.avg_spectrum_db},
                   {"avg_loudness_lufs", f.avg_loudness_lufs},
                   {"avg_crest_db", f.avg_crest_db},
                   {"avg_side_ratio", f.avg_side_ratio},
                   {"avg_lr_balance", f.avg_lr_balance}};
  }
  j["instruments"] = insts;
  return j.dump(2);
}

NormalizationStats stats_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("stats_from_json: parse failure: ") + e.what());
  }
  require(j.at("version").get<int>() == kStatsVersion,
          "stats_from_json: unsupported stats version");
  NormalizationStats stats;
  const auto& s = j.at("settings");
  stats.settings.fft_size = s.at("fft_size").get<int>();
  stats.settings.hop = s.at("hop").get<int>();
  stats.settings.silence_threshold_db = s.at("silence_threshold_db").get<double>();
  stats.settings.smoothing_octaves = s.at("smoothing_octaves").get<double>();
  for (const auto& [name, f] : j.at("instruments").items()) {
    InstrumentFeatures feat;
    feat.avg_spectrum_db = f.at("avg_spectrum_db").get<std::vector<float>>();
    feat.avg_loudness_lufs = f.at("avg_loudness_lufs").get<double>();
    feat.avg_crest_db = f.at("avg_crest_db").get<double>();
    feat.avg_side_ratio = f.at("avg_side_ratio").get<double>();
    feat.avg_lr_balance = f.at("avg_lr_balance").get<double>();
    feat.validate();
    stats.instruments[name] = std::move(feat);
  }
  return stats;
}

void save_stats(const NormalizationStats& stats, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  require(f.good(), "cannot write stats file: " + path);
  f << stats_to_json(stats) << "\n";
}

NormalizationStats load_stats(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot read stats file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return stats_from_json(text);
}

}  // namespace mixstyle::fxnorm
