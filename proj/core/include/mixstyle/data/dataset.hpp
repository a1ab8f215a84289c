#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/common/rng.hpp"
#include "mixstyle/normalize/features.hpp"

namespace mixstyle::data {

using audio::AudioBuffer;

inline const std::array<const char*, 4> kInstruments = {"drums", "bass", "vocals", "other"};

struct SongEntry {
  std::string name;
  std::map<std::string, std::string> stem_paths;  // instrument -> wav path
  size_t length = 0;                              // samples, equal across stems
};

struct MultitrackDataset {
  std::string root;
  std::vector<SongEntry> songs;
  std::vector<std::string> warnings;  // skipped songs with reasons
};

// Scans <root>/<song>/{drums,bass,vocals,other}.wav. Malformed songs are
// skipped with a diagnostic in warnings.
MultitrackDataset scan_dataset(const std::string& root);

struct SplitAssignment {
  std::vector<std::string> train, val, test;
};

// Deterministic shuffle (by seed) over lexicographically sorted names, then
// partition into the requested counts.
SplitAssignment split_dataset(const MultitrackDataset& dataset, std::array<int, 3> counts,
                              uint64_t seed);

// Proportional scale-down of the paper's 86/14/50 for smaller corpora.
std::array<int, 3> scaled_split_counts(int n_songs);

void save_split(const SplitAssignment& split, const std::string& path);
SplitAssignment load_split(const std::string& path);

// Non-silent (start, end) sample ranges, sorted and disjoint.
struct SegmentIndex {
  std::vector<std::pair<size_t, size_t>> ranges;

  size_t total_samples() const;
  bool contains(size_t start, size_t len) const;
};

SegmentIndex index_silence(const AudioBuffer& buffer, double threshold_db = -60.0,
                           double window_s = 0.5);

SegmentIndex intersect(const SegmentIndex& a, const SegmentIndex& b);

// Uniform draw over every valid start position; nullopt when no range fits.
std::optional<size_t> sample_segment_start(const SegmentIndex& index, size_t need, Rng& rng);

AudioBuffer cut_segment(const AudioBuffer& buffer, size_t start, size_t len);

// ---------------------------------------------------------------------------
// normalized cache
// ---------------------------------------------------------------------------

struct CacheManifest {
  uint64_t stats_checksum = 0;
  double target_lufs = -10.0;
  std::vector<std::string> songs;
};

// FX-normalizes every stem once into cache_dir/<song>/<stem>.wav (float32).
// A manifest records the stats checksum; a second invocation with matching
// checksum and intact files is a no-op. Returns true when work was done.
bool prepare_normalized_cache(const MultitrackDataset& dataset,
                              const std::vector<std::string>& songs,
                              const fxnorm::NormalizationStats& stats, double target_lufs,
                              const std::string& cache_dir, int threads = 1);

CacheManifest load_cache_manifest(const std::string& cache_dir);

// ---------------------------------------------------------------------------
// in-memory corpus for training
// ---------------------------------------------------------------------------

struct SongAudio {
  std::string name;
  std::map<std::string, AudioBuffer> stems;
  std::map<std::string, SegmentIndex> nonsilent;
};

struct CorpusView {
  std::vector<SongAudio> songs;

  double total_nonsilent_seconds(const std::string& instrument) const;
  std::vector<std::string> instruments() const;
};

CorpusView load_corpus(const std::string& dir, const std::vector<std::string>& songs,
                       double silence_threshold_db = -60.0, double window_s = 0.5);

}  // namespace mixstyle::data
