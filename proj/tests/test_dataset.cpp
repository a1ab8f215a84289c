#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define MIXSTYLE_TEST_NEEDS_CORPUS
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "mixstyle/audio/loudness.hpp"
#include "mixstyle/audio/wav.hpp"
#include "mixstyle/normalize/normalize.hpp"

using namespace mixstyle;
using namespace testutil;
using mixstyle::data::synth_stem;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("synth_toy_dataset writes deterministic MUSDB-style folders") {
  const auto dir = fresh_dir("mixstyle_toy_a");
  data::synth_toy_dataset(2, 4.0, 123, dir.string());
  for (int s = 0; s < 2; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "song_%03d", s);
    for (const char* inst : data::kInstruments) {
      const fs::path p = dir / name / (std::string(inst) + ".wav");
      REQUIRE(fs::is_regular_file(p));
      const auto b = audio::read_wav(p.string());
      CHECK(b.length() == static_cast<size_t>(4.0 * audio::kSampleRate));
      // silence indexing keeps at least 80% of every toy stem
      const auto idx = data::index_silence(b);
      CHECK(idx.total_samples() >= static_cast<size_t>(0.8 * b.length()));
    }
  }

  // same seed, bit-identical bytes
  const auto dir2 = fresh_dir("mixstyle_toy_b");
  data::synth_toy_dataset(2, 4.0, 123, dir2.string());
  for (int s = 0; s < 2; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "song_%03d", s);
    for (const char* inst : data::kInstruments) {
      const auto h1 = hash_file((dir / name / (std::string(inst) + ".wav")).string());
      const auto h2 = hash_file((dir2 / name / (std::string(inst) + ".wav")).string());
      CHECK(h1 == h2);
    }
  }
}

TEST_CASE("scan_dataset accepts well-formed songs and skips malformed ones") {
  const auto dir = fresh_dir("mixstyle_scan");
  data::synth_toy_dataset(3, 2.0, 7, dir.string());

  // valid scan
  auto ds = data::scan_dataset(dir.string());
  CHECK(ds.songs.size() == 3);
  CHECK(ds.warnings.empty());

  // missing stem
  fs::remove(dir / "song_001" / "bass.wav");
  ds = data::scan_dataset(dir.string());
  CHECK(ds.songs.size() == 2);
  REQUIRE(ds.warnings.size() == 1);
  CHECK(ds.warnings[0].find("song_001") != std::string::npos);
  CHECK(ds.warnings[0].find("bass") != std::string::npos);

  // unequal stem lengths
  const auto shorter = synth_stem("bass", 1.0, 9);
  audio::write_wav(shorter, (dir / "song_001" / "bass.wav").string(), audio::WavBitDepth::kFloat32);
  ds = data::scan_dataset(dir.string());
  CHECK(ds.songs.size() == 2);
  bool mentioned = false;
  for (const auto& w : ds.warnings) mentioned = mentioned || w.find("unequal length") != std::string::npos;
  CHECK(mentioned);
}

TEST_CASE("split_dataset partitions deterministically") {
  data::MultitrackDataset ds;
  for (int i = 0; i < 150; ++i) {
    data::SongEntry e;
    char name[16];
    std::snprintf(name, sizeof(name), "s%03d", i);
    e.name = name;
    ds.songs.push_back(e);
  }

  const auto split = data::split_dataset(ds, {86, 14, 50}, 3);
  CHECK(split.train.size() == 86);
  CHECK(split.val.size() == 14);
  CHECK(split.test.size() == 50);

  // partition: no duplicates across subsets
  std::set<std::string> all;
  for (const auto& v : {split.train, split.val, split.test})
    for (const auto& s : v) CHECK(all.insert(s).second);
  CHECK(all.size() == 150);

  const auto again = data::split_dataset(ds, {86, 14, 50}, 3);
  CHECK(again.train == split.train);
  CHECK(again.val == split.val);
  CHECK(again.test == split.test);

  ds.songs.resize(10);
  const auto small = data::split_dataset(ds, {6, 1, 3}, 1);
  CHECK(small.train.size() == 6);
  CHECK(small.val.size() == 1);
  CHECK(small.test.size() == 3);

  CHECK_THROWS_AS((void)data::split_dataset(ds, {86, 14, 50}, 1), Error);
}

TEST_CASE("index_silence fixtures") {
  // all silent
  audio::AudioBuffer silent(audio::kSampleRate);
  CHECK(data::index_silence(silent).ranges.empty());

  // fully loud: one range covering the file
  const auto loud = noise(1.3, 10, 0.3);
  const auto full = data::index_silence(loud);
  REQUIRE(full.ranges.size() == 1);
  CHECK(full.ranges[0].first == 0);
  CHECK(full.ranges[0].second == loud.length());

  // loud-silent-loud: two ranges at the construction boundaries +- one window
  const size_t w = static_cast<size_t>(0.5 * audio::kSampleRate);
  audio::AudioBuffer lsl(6 * w);
  Rng rng(11);
  for (size_t i = 0; i < lsl.length(); ++i) {
    const bool on = i < 2 * w || i >= 4 * w;
    const float v = on ? static_cast<float>(0.3 * rng.uniform(-1.0, 1.0)) : 0.0f;
    lsl.left()[i] = lsl.right()[i] = v;
  }
  const auto idx = data::index_silence(lsl);
  REQUIRE(idx.ranges.size() == 2);
  CHECK(idx.ranges[0].first == 0);
  CHECK(idx.ranges[0].second >= 2 * w - w);
  CHECK(idx.ranges[0].second <= 2 * w + w);
  CHECK(idx.ranges[1].first >= 4 * w - w);
  CHECK(idx.ranges[1].first <= 4 * w + w);
  CHECK(idx.ranges[1].second == lsl.length());
}

TEST_CASE("sample_segment_start draws uniformly over valid starts") {
  data::SegmentIndex idx;
  idx.ranges = {{100, 200}};
  Rng rng(12);

  // range exactly equal to the duration pins the start
  auto s = data::sample_segment_start(idx, 100, rng);
  REQUIRE(s.has_value());
  CHECK(*s == 100);

  // nothing long enough
  CHECK_FALSE(data::sample_segment_start(idx, 101, rng).has_value());

  // uniformity: starts over one long range, chi-square-free 3-sigma band
  data::SegmentIndex wide;
  wide.ranges = {{0, 1000 + 50 - 1}};
  std::array<int, 10> hist{};
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const auto pos = data::sample_segment_start(wide, 50, rng);
    hist[static_cast<size_t>(*pos / 100)]++;
  }
  const double expect = draws / 10.0;
  const double sigma = std::sqrt(draws * 0.1 * 0.9);
  for (int bin : hist) CHECK(std::fabs(bin - expect) <= 3.0 * sigma);
}

TEST_CASE("segments never intersect silent regions") {
  const size_t w = static_cast<size_t>(0.5 * audio::kSampleRate);
  audio::AudioBuffer lsl(6 * w);
  Rng rng(13);
  for (size_t i = 0; i < lsl.length(); ++i) {
    const bool on = i < 2 * w || i >= 4 * w;
    lsl.left()[i] = lsl.right()[i] = on ? static_cast<float>(0.3 * rng.uniform(-1.0, 1.0)) : 0.0f;
  }
  const auto idx = data::index_silence(lsl);
  for (int t = 0; t < 200; ++t) {
    const auto start = data::sample_segment_start(idx, w / 2, rng);
    REQUIRE(start.has_value());
    CHECK(idx.contains(*start, w / 2));
  }
}

TEST_CASE("normalized cache: checksum hit skips, stats change rebuilds") {
  const auto dir = fresh_dir("mixstyle_cache_src");
  data::synth_toy_dataset(2, 3.0, 21, dir.string());
  const auto ds = data::scan_dataset(dir.string());
  std::vector<std::string> names;
  for (const auto& s : ds.songs) names.push_back(s.name);

  // stats from the same stems
  std::map<std::string, std::vector<audio::AudioBuffer>> stems;
  for (const auto& song : ds.songs)
    for (const char* inst : data::kInstruments)
      stems[inst].push_back(audio::read_wav(song.stem_paths.at(inst)));
  auto stats = fxnorm::compute_features(stems);

  const auto cache = fresh_dir("mixstyle_cache_out");
  CHECK(data::prepare_normalized_cache(ds, names, stats, -10.0, cache.string()));
  CHECK_FALSE(data::prepare_normalized_cache(ds, names, stats, -10.0, cache.string()));

  // cached stems measure at the target loudness
  const auto cached = audio::read_wav((cache / names[0] / "drums.wav").string());
  CHECK(audio::integrated_loudness(cached).value == doctest::Approx(-10.0).epsilon(0.02));

  // a changed stats file forces recomputation
  stats.instruments.at("drums").avg_crest_db += 1.0;
  CHECK(data::prepare_normalized_cache(ds, names, stats, -10.0, cache.string()));
}

TEST_CASE("load_corpus exposes stems, silence indices and durations") {
  const auto dir = fresh_dir("mixstyle_corpus");
  data::synth_toy_dataset(2, 2.0, 31, dir.string());
  const auto corpus = data::load_corpus(dir.string(), {"song_000", "song_001"});
  REQUIRE(corpus.songs.size() == 2);
  CHECK(corpus.instruments().size() == 4);
  for (const auto& inst : corpus.instruments())
    CHECK(corpus.total_nonsilent_seconds(inst) > 0.8 * 2 * 2.0);

  CHECK_THROWS_AS((void)data::load_corpus(dir.string(), {"missing_song"}), Error);
}
