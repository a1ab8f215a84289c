#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mixstyle/audio/wav.hpp"
#include "mixstyle/common/hash.hpp"
#include "mixstyle/data/toy_dataset.hpp"
#include "mixstyle_cli/cli.hpp"
#include "mixstyle_cli/config.hpp"

using namespace mixstyle;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("default config echoes the paper-scale hyperparameters") {
  const auto cfg = cli::default_config();
  CHECK(cfg.at("encoder").at("batch_pairs").get<int>() * 2 == 256);
  CHECK(cfg.at("encoder").at("iterations").get<int>() == 16000);
  CHECK(cfg.at("encoder").at("steps_per_iteration").get<int>() == 4);
  CHECK(cfg.at("encoder").at("tau").get<double>() == 0.1);
  CHECK(cfg.at("encoder").at("d0").get<int>() == 360);
  CHECK(cfg.at("encoder").at("embedding_dim").get<int>() == 2048);
  CHECK(cfg.at("encoder").at("lr").get<double>() == 2e-4);
  CHECK(cfg.at("encoder").at("seg_min_s").get<double>() == 5.9);
  CHECK(cfg.at("encoder").at("seg_max_s").get<double>() == 11.8);
  CHECK(cfg.at("cloner").at("batch").get<int>() == 8);
  CHECK(cfg.at("cloner").at("epochs").get<int>() == 100);
  CHECK(cfg.at("cloner").at("segment_s").get<double>() == 11.8);
  CHECK(cfg.at("cloner").at("alpha").get<double>() == 0.1);
  CHECK(cfg.at("cloner").at("fft_sizes") == cli::json({4096, 2048, 1024, 512}));
  CHECK(cfg.at("dataset").at("split").at("train").get<int>() == 86);
  CHECK(cfg.at("dataset").at("split").at("val").get<int>() == 14);
  CHECK(cfg.at("dataset").at("split").at("test").get<int>() == 50);
  CHECK(cfg.at("eval").at("segments").get<int>() == 25);
  CHECK(cfg.at("eval").at("configs").get<int>() == 10);
  CHECK(cfg.at("normalize").at("target_lufs").get<double>() == -10.0);

  // the paper-default TCN lands the 5.2 s receptive field
  const auto tcn = cli::tcn_config_from_cfg(cfg);
  CHECK(cloner::receptive_field(tcn) == 229363);
}

TEST_CASE("config rejects unknown keys, from file and from overrides") {
  const auto dir = fresh_dir("mixstyle_cfg");
  const auto path = (dir / "bad.json").string();
  {
    std::ofstream f(path);
    f << R"({"encoder": {"taus": 0.2}})";
  }
  CHECK_THROWS_AS((void)cli::resolve_config(path, {}), Error);

  CHECK_THROWS_AS((void)cli::resolve_config("", {"encoder.nope=1"}), Error);
}

TEST_CASE("config file values and --set overrides apply in order") {
  const auto dir = fresh_dir("mixstyle_cfg2");
  const auto path = (dir / "cfg.json").string();
  {
    std::ofstream f(path);
    f << R"({"encoder": {"iterations": 500}, "run": {"seed": 3}})";
  }
  const auto cfg = cli::resolve_config(path, {"encoder.iterations=250", "cloner.batch=2"});
  CHECK(cfg.at("encoder").at("iterations").get<int>() == 250);
  CHECK(cfg.at("cloner").at("batch").get<int>() == 2);
  CHECK(cfg.at("run").at("seed").get<int>() == 3);
}

TEST_CASE("print-config exits cleanly") {
  CHECK(cli::run_cli({"gradcheck", "--print-config"}) == 0);
}

TEST_CASE("manipulate is bit-identical across reruns with one seed") {
  const auto dir = fresh_dir("mixstyle_manip");
  const auto in = (dir / "in.wav").string();
  audio::write_wav(data::synth_stem("other", 1.5, 5), in, audio::WavBitDepth::kFloat32);

  const auto out1 = (dir / "out1.wav").string();
  const auto out2 = (dir / "out2.wav").string();
  const auto out3 = (dir / "out3.wav").string();

  auto run = [&](const std::string& out, const std::string& seed) {
    return cli::run_cli({"manipulate", "--in", in, "--out-file", out, "--seed", seed, "--out",
                         (dir / "run").string(), "--set", "fx.ranges.reverb_rt60_hi=0.4"});
  };
  REQUIRE(run(out1, "7") == 0);
  REQUIRE(run(out2, "7") == 0);
  REQUIRE(run(out3, "8") == 0);
  CHECK(hash_file(out1) == hash_file(out2));
  CHECK(hash_file(out1) != hash_file(out3));
}

TEST_CASE("manipulate writes a parseable chain log") {
  const auto dir = fresh_dir("mixstyle_chainlog");
  const auto in = (dir / "in.wav").string();
  audio::write_wav(data::synth_stem("bass", 1.0, 6), in, audio::WavBitDepth::kFloat32);
  const auto chain_path = (dir / "chain.json").string();
  REQUIRE(cli::run_cli({"manipulate", "--in", in, "--out-file", (dir / "out.wav").string(),
                        "--chain-out", chain_path, "--seed", "4", "--out", (dir / "run").string(),
                        "--set", "fx.ranges.reverb_rt60_hi=0.3"}) == 0);
  std::ifstream f(chain_path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto inst = fx::chain_from_json(text);  // parses and validates
  inst.validate();
}

TEST_CASE("toy-data, features, normalize pipeline produces a usable cache") {
  const auto root = fresh_dir("mixstyle_pipe");
  const auto data_dir = (root / "data").string();
  const auto feat_dir = (root / "features").string();

  REQUIRE(cli::run_cli({"toy-data", "--songs", "4", "--duration", "4", "--seed", "11", "--out",
                        data_dir}) == 0);
  REQUIRE(cli::run_cli({"features", "--out", feat_dir, "--set", "dataset.root=" + data_dir,
                        "--set", "dataset.split.train=2", "--set", "dataset.split.val=1",
                        "--set", "dataset.split.test=1"}) == 0);
  CHECK(fs::is_regular_file(fs::path(feat_dir) / "stats.json"));
  CHECK(fs::is_regular_file(fs::path(feat_dir) / "split.json"));
  CHECK(fs::is_regular_file(fs::path(feat_dir) / "manifest.json"));

  const auto cache_dir = (root / "cache").string();
  REQUIRE(cli::run_cli({"normalize", "--stats", (fs::path(feat_dir) / "stats.json").string(),
                        "--split", (fs::path(feat_dir) / "split.json").string(), "--out",
                        (root / "norm_run").string(), "--set", "dataset.root=" + data_dir,
                        "--set", "dataset.cache_dir=" + cache_dir}) == 0);
  CHECK(fs::is_regular_file(fs::path(cache_dir) / "cache_manifest.json"));
  const auto split = data::load_split((fs::path(feat_dir) / "split.json").string());
  CHECK(split.train.size() == 2);
  for (const char* inst : data::kInstruments)
    CHECK(fs::is_regular_file(fs::path(cache_dir) / split.train[0] / (std::string(inst) + ".wav")));
}

TEST_CASE("single-file normalize mode works") {
  const auto root = fresh_dir("mixstyle_norm1");
  const auto data_dir = (root / "data").string();
  REQUIRE(cli::run_cli({"toy-data", "--songs", "3", "--duration", "3", "--seed", "12", "--out",
                        data_dir}) == 0);
  const auto feat_dir = (root / "features").string();
  REQUIRE(cli::run_cli({"features", "--out", feat_dir, "--set", "dataset.root=" + data_dir,
                        "--set", "dataset.split.train=1", "--set", "dataset.split.val=1",
                        "--set", "dataset.split.test=1", "--set", "dataset.split.auto_scale=true"}) == 0);

  const auto out_file = (root / "normalized.wav").string();
  REQUIRE(cli::run_cli({"normalize", "--stats", (fs::path(feat_dir) / "stats.json").string(),
                        "--in", (fs::path(data_dir) / "song_000" / "bass.wav").string(),
                        "--instrument", "bass", "--out-file", out_file, "--out",
                        (root / "run").string()}) == 0);
  CHECK(fs::is_regular_file(out_file));
}

TEST_CASE("missing inputs produce a nonzero exit and one-line error") {
  CHECK(cli::run_cli({"encode", "--encoder", "/nonexistent.ckpt", "--in", "/nonexistent.wav"}) != 0);
  CHECK(cli::run_cli({"transfer", "--input-stems", "/nope", "--ref", "/nope.wav", "--encoder",
                      "/nope.ckpt", "--cloner", "/nope.ckpt"}) != 0);
}

TEST_CASE("gradcheck subcommand exits zero") {
  const auto dir = fresh_dir("mixstyle_gc");
  CHECK(cli::run_cli({"gradcheck", "--out", dir.string()}) == 0);
  CHECK(fs::is_regular_file(dir / "manifest.json"));
}

TEST_CASE("run manifest echoes the paper-scale hyperparameters") {
  const auto dir = fresh_dir("mixstyle_manifest");
  REQUIRE(cli::run_cli({"gradcheck", "--out", dir.string()}) == 0);
  std::ifstream f(dir / "manifest.json");
  REQUIRE(f.good());
  const auto m = cli::json::parse(std::string((std::istreambuf_iterator<char>(f)),
                                              std::istreambuf_iterator<char>()));
  const auto& cfg = m.at("config");
  CHECK(cfg.at("encoder").at("batch_pairs").get<int>() * 2 == 256);
  CHECK(cfg.at("encoder").at("iterations").get<int>() == 16000);
  CHECK(cfg.at("encoder").at("tau").get<double>() == 0.1);
  CHECK(cfg.at("encoder").at("d0").get<int>() == 360);
  CHECK(cfg.at("cloner").at("batch").get<int>() == 8);
  CHECK(cfg.at("cloner").at("epochs").get<int>() == 100);
  CHECK(cfg.at("cloner").at("segment_s").get<double>() == 11.8);
  CHECK(m.contains("seed"));
  CHECK(m.contains("inputs"));
  CHECK(m.contains("wall_time_ms"));
}

TEST_CASE("evaluate emits a metrics CSV with the table-shaped columns") {
  const auto root = fresh_dir("mixstyle_eval_cli");
  const auto data_dir = (root / "data").string();
  REQUIRE(cli::run_cli({"toy-data", "--songs", "4", "--duration", "5", "--seed", "31", "--out",
                        data_dir}) == 0);
  const auto feat_dir = (root / "features").string();
  REQUIRE(cli::run_cli({"features", "--out", feat_dir, "--set", "dataset.root=" + data_dir}) == 0);
  const auto cache_dir = (root / "cache").string();
  REQUIRE(cli::run_cli({"normalize", "--stats", feat_dir + "/stats.json", "--split",
                        feat_dir + "/split.json", "--out", (root / "nrun").string(), "--set",
                        "dataset.root=" + data_dir, "--set", "dataset.cache_dir=" + cache_dir}) == 0);

  // a random-init encoder checkpoint is enough for the format contract
  auto arch = enc::EncoderConfig::toy(16, 8, 2, 4);
  enc::EncoderNet<float> net(arch);
  const auto ckpt = (root / "encoder.ckpt").string();
  enc::save_encoder(net, ckpt);

  const auto out_dir = (root / "eval").string();
  REQUIRE(cli::run_cli({"evaluate", "--cache", cache_dir, "--split", feat_dir + "/split.json",
                        "--encoder", ckpt, "--out", out_dir, "--set", "eval.segments=2",
                        "--set", "eval.configs=3", "--set", "eval.segment_s=0.5",
                        "--set", "eval.bins=4", "--set", "eval.forest_size=4",
                        "--set", "eval.seeds=2",
                        "--set", "fx.ranges.reverb_rt60_hi=0.3"}) == 0);

  std::ifstream f(fs::path(out_dir) / "metrics.csv");
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header == "case,dcimig,dci_rf_expl_mean,dci_rf_expl_std");
  std::set<std::string> cases;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) cases.insert(line.substr(0, line.find(',')));
  CHECK(cases.count("multitrack_full_fx") == 1);
  CHECK(cases.count("single_stem_full_fx") == 1);
  CHECK(cases.count("multitrack_single_fx") == 1);
  CHECK(cases.count("single_stem_single_fx") == 1);
  CHECK(fs::is_regular_file(fs::path(out_dir) / "embeddings.csv"));
}
