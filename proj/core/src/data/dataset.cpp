#include "mixstyle/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mixstyle/audio/wav.hpp"
#include "mixstyle/common/hash.hpp"
#include "mixstyle/common/parallel.hpp"
#include "mixstyle/normalize/normalize.hpp"

namespace mixstyle::data {

namespace fs = std::filesystem;
using nlohmann::json;

MultitrackDataset scan_dataset(const std::string& root) {
  require(fs::is_directory(root), "scan_dataset: not a directory: " + root);
  MultitrackDataset out;
  out.root = root;

  std::vector<std::string> song_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) song_dirs.push_back(e.path().filename().string());
  std::sort(song_dirs.begin(), song_dirs.end());
  require(!song_dirs.empty(), "scan_dataset: no song folders under " + root);

  for (const auto& name : song_dirs) {
    SongEntry entry;
    entry.name = name;
    bool ok = true;
    size_t length = 0;
    for (const char* inst : kInstruments) {
      const fs::path p = fs::path(root) / name / (std::string(inst) + ".wav");
      if (!fs::is_regular_file(p)) {
        out.warnings.push_back(name + ": missing " + inst + ".wav, skipped");
        ok = false;
        break;
      }
      AudioBuffer b;
      try {
        b = audio::read_wav(p.string());
      } catch (const std::exception& e) {
        out.warnings.push_back(name + ": " + e.what() + ", skipped");
        ok = false;
        break;
      }
      if (length == 0) {
        length = b.length();
      } else if (b.length() != length) {
        out.warnings.push_back(name + ": stems of unequal length, skipped");
        ok = false;
        break;
      }
      entry.stem_paths[inst] = p.string();
    }
    if (ok && length == 0) {
      out.warnings.push_back(name + ": empty stems, skipped");
      ok = false;
    }
    if (ok) {
      entry.length = length;
      out.songs.push_back(std::move(entry));
    }
  }
  return out;
}

SplitAssignment split_dataset(const MultitrackDataset& dataset, std::array<int, 3> counts,
                              uint64_t seed) {
  const int total = counts[0] + counts[1] + counts[2];
  require(static_cast<int>(dataset.songs.size()) >= total,
          "split_dataset: dataset has " + std::to_string(dataset.songs.size()) +
              " songs, need " + std::to_string(total));

  std::vector<std::string> names;
  names.reserve(dataset.songs.size());
  for (const auto& s : dataset.songs) names.push_back(s.name);
  std::sort(names.begin(), names.end());

  Rng rng(seed);
  for (size_t i = names.size() - 1; i > 0; --i) {
    const size_t j = static_cast<size_t>(rng.randint(static_cast<int64_t>(i + 1)));
    std::swap(names[i], names[j]);
  }

  SplitAssignment split;
  int pos = 0;
  for (int i = 0; i < counts[0]; ++i) split.train.push_back(names[static_cast<size_t>(pos++)]);
  for (int i = 0; i < counts[1]; ++i) split.val.push_back(names[static_cast<size_t>(pos++)]);
  for (int i = 0; i < counts[2]; ++i) split.test.push_back(names[static_cast<size_t>(pos++)]);
  return split;
}

std::array<int, 3> scaled_split_counts(int n_songs) {
  require(n_songs >= 3, "scaled_split_counts: need at least 3 songs");
  if (n_songs >= 150) return {86, 14, 50};
  int train = std::max(1, static_cast<int>(std::lround(n_songs * 86.0 / 150.0)));
  int val = std::max(1, static_cast<int>(std::lround(n_songs * 14.0 / 150.0)));
  int test = n_songs - train - val;
  while (test < 1) {
    if (train > 1) --train;
    else --val;
    test = n_songs - train - val;
  }
  return {train, val, test};
}

void save_split(const SplitAssignment& split, const std::string& path) {
  json j;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  std::ofstream f(path, std::ios::trunc);
  require(f.good(), "cannot write split file: " + path);
  f << j.dump(2) << "\n";
}

SplitAssignment load_split(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot read split file: " + path);
  json j = json::parse(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
  SplitAssignment s;
  s.train = j.at("train").get<std::vector<std::string>>();
  s.val = j.at("val").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  return s;
}

size_t SegmentIndex::total_samples() const {
  size_t n = 0;
  for (const auto& [a, b] : ranges) n += b - a;
  return n;
}

bool SegmentIndex::contains(size_t start, size_t len) const {
  for (const auto& [a, b] : ranges)
    if (start >= a && start + len <= b) return true;
  return false;
}

SegmentIndex index_silence(const AudioBuffer& buffer, double threshold_db, double window_s) {
  buffer.validate();
  SegmentIndex out;
  const size_t n = buffer.length();
  if (n == 0) return out;
  const size_t window = std::max<size_t>(1, static_cast<size_t>(std::lround(window_s * buffer.sample_rate)));
  const double gate = std::pow(10.0, threshold_db / 20.0);

  size_t open_start = 0;
  bool open = false;
  for (size_t start = 0; start < n; start += window) {
    const size_t len = std::min(window, n - start);
    double acc = 0.0;
    for (size_t i = start; i < start + len; ++i) {
      acc += static_cast<double>(buffer.left()[i]) * buffer.left()[i];
      acc += static_cast<double>(buffer.right()[i]) * buffer.right()[i];
    }
    const double rms = std::sqrt(acc / (2.0 * static_cast<double>(len)));
    if (rms >= gate) {
      if (!open) {
        open = true;
        open_start = start;
      }
    } else if (open) {
      out.ranges.emplace_back(open_start, start);
      open = false;
    }
  }
  if (open) out.ranges.emplace_back(open_start, n);
  return out;
}

SegmentIndex intersect(const SegmentIndex& a, const SegmentIndex& b) {
  SegmentIndex out;
  size_t i = 0, j = 0;
  while (i < a.ranges.size() && j < b.ranges.size()) {
    const size_t lo = std::max(a.ranges[i].first, b.ranges[j].first);
    const size_t hi = std::min(a.ranges[i].second, b.ranges[j].second);
    if (lo < hi) out.ranges.emplace_back(lo, hi);
    if (a.ranges[i].second < b.ranges[j].second) ++i;
    else ++j;
  }
  return out;
}

std::optional<size_t> sample_segment_start(const SegmentIndex& index, size_t need, Rng& rng) {
  require(need > 0, "sample_segment_start: need must be positive");
  size_t total = 0;
  for (const auto& [a, b] : index.ranges)
    if (b - a >= need) total += b - a - need + 1;
  if (total == 0) return std::nullopt;
  size_t pick = static_cast<size_t>(rng.randint(static_cast<int64_t>(total)));
  for (const auto& [a, b] : index.ranges) {
    if (b - a < need) continue;
    const size_t starts = b - a - need + 1;
    if (pick < starts) return a + pick;
    pick -= starts;
  }
  return std::nullopt;  // unreachable
}

AudioBuffer cut_segment(const AudioBuffer& buffer, size_t start, size_t len) {
  require(start + len <= buffer.length(), "cut_segment: out of range");
  AudioBuffer out(len, buffer.sample_rate);
  for (int c = 0; c < 2; ++c)
    std::copy(buffer.ch[static_cast<size_t>(c)].begin() + static_cast<std::ptrdiff_t>(start),
              buffer.ch[static_cast<size_t>(c)].begin() + static_cast<std::ptrdiff_t>(start + len),
              out.ch[static_cast<size_t>(c)].begin());
  return out;
}

// ---------------------------------------------------------------------------

namespace {
const char* kManifestName = "cache_manifest.json";
}

bool prepare_normalized_cache(const MultitrackDataset& dataset,
                              const std::vector<std::string>& songs,
                              const fxnorm::NormalizationStats& stats, double target_lufs,
                              const std::string& cache_dir, int threads) {
  const std::string stats_text = fxnorm::stats_to_json(stats);
  const uint64_t checksum = fnv1a64(stats_text.data(), stats_text.size());

  fs::create_directories(cache_dir);
  const fs::path manifest_path = fs::path(cache_dir) / kManifestName;

  // checksum hit with intact files: nothing to do
  if (fs::is_regular_file(manifest_path)) {
    try {
      const CacheManifest m = load_cache_manifest(cache_dir);
      bool intact = m.stats_checksum == checksum && m.target_lufs == target_lufs;
      if (intact) {
        for (const auto& s : songs) {
          for (const char* inst : kInstruments) {
            if (!fs::is_regular_file(fs::path(cache_dir) / s / (std::string(inst) + ".wav"))) {
              intact = false;
              break;
            }
          }
          if (!intact) break;
        }
      }
      if (intact) return false;
    } catch (const std::exception&) {
      // stale manifest, rebuild below
    }
  }

  std::map<std::string, const SongEntry*> by_name;
  for (const auto& e : dataset.songs) by_name[e.name] = &e;

  struct Job {
    const SongEntry* song;
    std::string inst;
  };
  std::vector<Job> jobs;
  for (const auto& name : songs) {
    const auto it = by_name.find(name);
    require(it != by_name.end(), "prepare_normalized_cache: song not in dataset: " + name);
    fs::create_directories(fs::path(cache_dir) / name);
    for (const char* inst : kInstruments) jobs.push_back({it->second, inst});
  }

  parallel_for(static_cast<int64_t>(jobs.size()), threads, [&](int64_t i) {
    const Job& job = jobs[static_cast<size_t>(i)];
    const AudioBuffer raw = audio::read_wav(job.song->stem_paths.at(job.inst));
    const AudioBuffer norm = fxnorm::fx_normalize(raw, job.inst, stats, target_lufs);
    const fs::path out = fs::path(cache_dir) / job.song->name / (job.inst + ".wav");
    audio::write_wav(norm, out.string(), audio::WavBitDepth::kFloat32);
  });

  json j;
  j["stats_checksum"] = checksum;
  j["target_lufs"] = target_lufs;
  j["songs"] = songs;
  std::ofstream f(manifest_path, std::ios::trunc);
  require(f.good(), "cannot write cache manifest");
  f << j.dump(2) << "\n";
  return true;
}

CacheManifest load_cache_manifest(const std::string& cache_dir) {
  const fs::path p = fs::path(cache_dir) / kManifestName;
  std::ifstream f(p);
  require(f.good(), "cannot read cache manifest: " + p.string());
  json j = json::parse(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
  CacheManifest m;
  m.stats_checksum = j.at("stats_checksum").get<uint64_t>();
  m.target_lufs = j.at("target_lufs").get<double>();
  m.songs = j.at("songs").get<std::vector<std::string>>();
  return m;
}

double CorpusView::total_nonsilent_seconds(const std::string& instrument) const {
  double total = 0.0;
  for (const auto& s : songs) {
    const auto it = s.nonsilent.find(instrument);
    if (it != s.nonsilent.end())
      total += static_cast<double>(it->second.total_samples()) / audio::kSampleRate;
  }
  return total;
}

std::vector<std::string> CorpusView::instruments() const {
  std::vector<std::string> out;
  if (songs.empty()) return out;
  for (const auto& [inst, _] : songs.front().stems) out.push_back(inst);
  return out;
}

CorpusView load_corpus(const std::string& dir, const std::vector<std::string>& songs,
                       double silence_threshold_db, double window_s) {
  CorpusView view;
  for (const auto& name : songs) {
    SongAudio sa;
    sa.name = name;
    for (const char* inst : kInstruments) {
      const fs::path p = fs::path(dir) / name / (std::string(inst) + ".wav");
      require(fs::is_regular_file(p), "load_corpus: missing stem " + p.string());
      AudioBuffer b = audio::read_wav(p.string());
      sa.nonsilent[inst] = index_silence(b, silence_threshold_db, window_s);
      sa.stems[inst] = std::move(b);
    }
    view.songs.push_back(std::move(sa));
  }
  require(!view.songs.empty(), "load_corpus: empty song list");
  return view;
}

}  // namespace mixstyle::data
