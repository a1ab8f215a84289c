#include "mixstyle_cli/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mixstyle/audio/wav.hpp"
#include "mixstyle/common/parallel.hpp"
#include "mixstyle/data/toy_dataset.hpp"
#include "mixstyle/eval/eval_set.hpp"
#include "mixstyle/eval/report.hpp"
#include "mixstyle/fx/processors.hpp"
#include "mixstyle/nn/gradcheck.hpp"
#include "mixstyle/normalize/normalize.hpp"
#include "mixstyle_cli/config.hpp"

namespace mixstyle::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  int64_t seed = -1;
  std::string out_dir;
  int threads = -1;
  bool print_config = false;
};

void add_common(CLI::App* app, CommonFlags& flags) {
  app->add_option("--config", flags.config_path, "JSON config file");
  app->add_option("--set", flags.overrides, "override config values, key.path=value");
  app->add_option("--seed", flags.seed, "override run.seed");
  app->add_option("--out", flags.out_dir, "override run.out_dir");
  app->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
  app->add_flag("--print-config", flags.print_config, "print the resolved config and exit");
}

json resolve(const CommonFlags& flags) {
  json cfg = resolve_config(flags.config_path, flags.overrides);
  if (flags.seed >= 0) cfg["run"]["seed"] = flags.seed;
  if (!flags.out_dir.empty()) cfg["run"]["out_dir"] = flags.out_dir;
  if (flags.threads >= 0) cfg["run"]["threads"] = flags.threads;
  return cfg;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

data::SplitAssignment make_or_load_split(const json& cfg, const data::MultitrackDataset& dataset,
                                         const std::string& split_path) {
  if (!split_path.empty() && fs::is_regular_file(split_path)) return data::load_split(split_path);
  const auto& sp = cfg.at("dataset").at("split");
  std::array<int, 3> counts = {sp.at("train").get<int>(), sp.at("val").get<int>(),
                               sp.at("test").get<int>()};
  const int total = counts[0] + counts[1] + counts[2];
  if (static_cast<int>(dataset.songs.size()) < total && sp.at("auto_scale").get<bool>())
    counts = data::scaled_split_counts(static_cast<int>(dataset.songs.size()));
  return data::split_dataset(dataset, counts, sp.at("seed").get<uint64_t>());
}

int cmd_toy_data(const json& cfg, int songs, double duration_s) {
  Timer timer;
  const std::string out = cfg.at("run").at("out_dir").get<std::string>();
  data::synth_toy_dataset(songs, duration_s, cfg.at("run").at("seed").get<uint64_t>(), out);
  write_manifest(out, "toy-data", cfg, {}, timer.ms());
  std::cout << "wrote " << songs << " toy songs to " << out << "\n";
  return 0;
}

int cmd_features(const json& cfg, const std::string& split_path) {
  Timer timer;
  const std::string root = cfg.at("dataset").at("root").get<std::string>();
  require(!root.empty(), "features: dataset.root is required");
  const std::string out = cfg.at("run").at("out_dir").get<std::string>();
  fs::create_directories(out);

  const auto dataset = data::scan_dataset(root);
  for (const auto& w : dataset.warnings) std::cerr << "warning: " << w << "\n";
  const auto split = make_or_load_split(cfg, dataset, split_path);
  data::save_split(split, (fs::path(out) / "split.json").string());

  // stats come from the training subset only
  std::map<std::string, const data::SongEntry*> by_name;
  for (const auto& s : dataset.songs) by_name[s.name] = &s;
  std::map<std::string, std::vector<audio::AudioBuffer>> stems;
  for (const auto& name : split.train) {
    const auto* song = by_name.at(name);
    for (const char* inst : data::kInstruments)
      stems[inst].push_back(audio::read_wav(song->stem_paths.at(inst)));
  }
  const auto stats = fxnorm::compute_features(stems, {}, cfg.at("run").at("threads").get<int>());
  fxnorm::save_stats(stats, (fs::path(out) / "stats.json").string());

  write_manifest(out, "features", cfg, {root}, timer.ms());
  std::cout << "wrote stats for " << stats.instruments.size() << " instruments to " << out << "\n";
  return 0;
}

int cmd_normalize(const json& cfg, const std::string& stats_path, const std::string& split_path,
                  const std::string& in_wav, const std::string& instrument,
                  const std::string& out_file) {
  Timer timer;
  const auto stats = fxnorm::load_stats(stats_path);
  const double target = cfg.at("normalize").at("target_lufs").get<double>();

  if (!in_wav.empty()) {
    require(!out_file.empty() && !instrument.empty(),
            "normalize: single-file mode needs --in, --instrument and --out-file");
    const auto wet = audio::read_wav(in_wav);
    const auto norm = fxnorm::fx_normalize(wet, instrument, stats, target);
    audio::write_wav(norm, out_file, audio::WavBitDepth::kFloat32);
    std::cout << "normalized " << in_wav << " -> " << out_file << "\n";
    return 0;
  }

  const std::string root = cfg.at("dataset").at("root").get<std::string>();
  require(!root.empty(), "normalize: dataset.root is required");
  std::string cache = cfg.at("dataset").at("cache_dir").get<std::string>();
  if (cache.empty()) cache = (fs::path(cfg.at("run").at("out_dir").get<std::string>()) / "cache").string();

  const auto dataset = data::scan_dataset(root);
  const auto split = make_or_load_split(cfg, dataset, split_path);
  std::vector<std::string> all;
  all.insert(all.end(), split.train.begin(), split.train.end());
  all.insert(all.end(), split.val.begin(), split.val.end());
  all.insert(all.end(), split.test.begin(), split.test.end());

  const bool did_work = data::prepare_normalized_cache(dataset, all, stats, target, cache,
                                                       cfg.at("run").at("threads").get<int>());
  write_manifest(cfg.at("run").at("out_dir").get<std::string>(), "normalize", cfg,
                 {root, stats_path}, timer.ms());
  std::cout << (did_work ? "normalized " : "cache up to date for ") << all.size() << " songs -> "
            << cache << "\n";
  return 0;
}

int cmd_manipulate(const json& cfg, const std::string& in_wav, const std::string& out_file,
                   const std::string& chain_out) {
  Timer timer;
  require(!in_wav.empty() && !out_file.empty(), "manipulate: need --in and --out-file");
  const auto fx_cfg = fx_config_from(cfg);
  Rng rng(cfg.at("run").at("seed").get<uint64_t>());
  const auto chain = fx::sample_chain(fx_cfg, rng);
  const auto input = audio::read_wav(in_wav);
  const auto wet = fx::apply_chain(input, chain);
  audio::write_wav(wet, out_file, audio::WavBitDepth::kFloat32);
  if (!chain_out.empty()) {
    std::ofstream f(chain_out, std::ios::trunc);
    require(f.good(), "manipulate: cannot write " + chain_out);
    f << fx::chain_to_json(chain) << "\n";
  }
  write_manifest(cfg.at("run").at("out_dir").get<std::string>(), "manipulate", cfg, {in_wav},
                 timer.ms());
  std::cout << "manipulated " << in_wav << " -> " << out_file << "\n";
  return 0;
}

int cmd_train_encoder(const json& cfg, const std::string& cache, const std::string& split_path) {
  Timer timer;
  require(!cache.empty(), "train-encoder: need --cache");
  require(!split_path.empty(), "train-encoder: need --split");
  const auto split = data::load_split(split_path);
  const auto train = data::load_corpus(cache, split.train);
  const auto val = data::load_corpus(cache, split.val);

  auto tc = encoder_train_from(cfg);
  tc.out_dir = cfg.at("run").at("out_dir").get<std::string>();
  enc::EncoderNet<float> net(tc.arch);
  const auto result = enc::train_encoder(train, val, tc, net);

  write_manifest(tc.out_dir, "train-encoder", cfg, {cache, split_path}, timer.ms());
  std::cout << "trained encoder: initial loss " << result.initial_loss << ", final loss "
            << result.final_loss << ", checkpoint in " << tc.out_dir << "\n";
  return 0;
}

int cmd_train_cloner(const json& cfg, const std::string& cache, const std::string& split_path,
                     const std::string& encoder_path) {
  Timer timer;
  require(!cache.empty() && !split_path.empty() && !encoder_path.empty(),
          "train-cloner: need --cache, --split and --encoder");
  const auto split = data::load_split(split_path);
  const auto train = data::load_corpus(cache, split.train);
  const auto val = data::load_corpus(cache, split.val);
  auto encoder = enc::load_encoder(encoder_path);

  auto tc = cloner_train_from(cfg);
  tc.arch.condition_dim = encoder.cfg.embedding_dim;
  tc.out_dir = cfg.at("run").at("out_dir").get<std::string>();
  cloner::ClonerNet<float> net(tc.arch);
  const auto result = cloner::train_cloner(train, val, encoder, tc, net);

  write_manifest(tc.out_dir, "train-cloner", cfg, {cache, split_path, encoder_path}, timer.ms());
  std::cout << "trained cloner over " << result.steps << " steps: val full_loss(y,gt) "
            << result.val_loss_y_gt << " vs input baseline " << result.val_loss_x_gt << "\n";
  return 0;
}

int cmd_encode(const json& cfg, const std::string& encoder_path, std::vector<std::string> inputs,
               const std::string& in_dir) {
  Timer timer;
  require(!encoder_path.empty(), "encode: need --encoder");
  if (!in_dir.empty()) {
    for (const auto& e : fs::directory_iterator(in_dir))
      if (e.is_regular_file() && e.path().extension() == ".wav") inputs.push_back(e.path().string());
    std::sort(inputs.begin(), inputs.end());
  }
  require(!inputs.empty(), "encode: no input files");
  auto encoder = enc::load_encoder(encoder_path);

  const std::string out = cfg.at("run").at("out_dir").get<std::string>();
  fs::create_directories(out);
  std::ofstream f(fs::path(out) / "embeddings.csv", std::ios::trunc);
  require(f.good(), "encode: cannot write embeddings.csv");
  f << "id";
  for (int d = 0; d < encoder.cfg.embedding_dim; ++d) f << ",c" << d;
  f << "\n";
  char buf[48];
  for (const auto& path : inputs) {
    const auto emb = enc::encode(audio::read_wav(path), encoder);
    f << fs::path(path).stem().string();
    for (float v : emb.v) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
      f << "," << buf;
    }
    f << "\n";
  }
  std::vector<std::string> manifest_inputs = inputs;
  manifest_inputs.push_back(encoder_path);
  write_manifest(out, "encode", cfg, manifest_inputs, timer.ms());
  std::cout << "encoded " << inputs.size() << " files -> " << out << "/embeddings.csv\n";
  return 0;
}

int cmd_transfer(const json& cfg, const std::string& stems_dir, const std::string& ref_path,
                 const std::string& encoder_path, const std::string& cloner_path) {
  Timer timer;
  require(!stems_dir.empty() && !ref_path.empty() && !encoder_path.empty() && !cloner_path.empty(),
          "transfer: need --input-stems, --ref, --encoder and --cloner");
  auto encoder = enc::load_encoder(encoder_path);
  auto net = cloner::load_cloner(cloner_path);

  std::vector<std::pair<std::string, audio::AudioBuffer>> stems;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(stems_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "transfer: no stems in " + stems_dir);
  for (const auto& f : files) stems.emplace_back(fs::path(f).stem().string(), audio::read_wav(f));

  const auto ref = audio::read_wav(ref_path);
  const auto result =
      cloner::transfer(stems, ref, encoder, net, cfg.at("run").at("threads").get<int>());

  const std::string out = cfg.at("run").at("out_dir").get<std::string>();
  fs::create_directories(out);
  for (const auto& [name, buffer] : result.stems)
    audio::write_wav(buffer, (fs::path(out) / (name + ".wav")).string(), audio::WavBitDepth::kFloat32);
  audio::write_wav(result.mixture, (fs::path(out) / "mixture.wav").string(),
                   audio::WavBitDepth::kFloat32);

  std::vector<std::string> manifest_inputs = files;
  manifest_inputs.push_back(ref_path);
  manifest_inputs.push_back(encoder_path);
  manifest_inputs.push_back(cloner_path);
  write_manifest(out, "transfer", cfg, manifest_inputs, timer.ms());
  std::cout << "transferred " << stems.size() << " stems -> " << out << "\n";
  return 0;
}

int cmd_evaluate(const json& cfg, const std::string& cache, const std::string& split_path,
                 const std::string& encoder_path, const std::string& cloner_path) {
  Timer timer;
  require(!cache.empty() && !split_path.empty() && !encoder_path.empty(),
          "evaluate: need --cache, --split and --encoder");
  const auto split = data::load_split(split_path);
  const auto test = data::load_corpus(cache, split.test);
  auto encoder = enc::load_encoder(encoder_path);

  const auto& ev = cfg.at("eval");
  const int segments = ev.at("segments").get<int>();
  const int configs = ev.at("configs").get<int>();
  const double segment_s = ev.at("segment_s").get<double>();
  const int bins = ev.at("bins").get<int>();
  const int forest = ev.at("forest_size").get<int>();
  const int seeds = ev.at("seeds").get<int>();
  const auto fx_cfg = fx_config_from(cfg);
  const uint64_t seed = cfg.at("run").at("seed").get<uint64_t>();
  const int threads = cfg.at("run").at("threads").get<int>();

  const std::string out = cfg.at("run").at("out_dir").get<std::string>();
  fs::create_directories(out);

  auto encode_set = [&](const evalm::EvalSet& set) {
    evalm::CodeMatrix codes;
    codes.n = static_cast<int>(set.samples.size());
    codes.d = encoder.cfg.embedding_dim;
    codes.values.resize(static_cast<size_t>(codes.n) * codes.d);
    parallel_for(codes.n, threads, [&](int64_t i) {
      const auto emb = enc::encode(set.samples[static_cast<size_t>(i)], encoder);
      std::copy(emb.v.begin(), emb.v.end(), codes.values.begin() + i * codes.d);
    });
    return codes;
  };

  std::vector<evalm::MetricCase> cases;
  bool exported = false;
  using evalm::EvalRegime;
  for (EvalRegime regime : {EvalRegime::kMultitrackFullFx, EvalRegime::kSingleStemFullFx,
                            EvalRegime::kMultitrackSingleFx, EvalRegime::kSingleStemSingleFx}) {
    const bool single_fx = regime == EvalRegime::kMultitrackSingleFx ||
                           regime == EvalRegime::kSingleStemSingleFx;
    std::vector<std::pair<evalm::CodeMatrix, evalm::FactorMatrix>> runs;
    if (single_fx) {
      for (int f = 0; f < fx::kNumFx; ++f) {
        if (fx_cfg.probabilities[static_cast<size_t>(f)] <= 0.0) continue;
        auto set = evalm::build_eval_set(test, fx_cfg, segments, configs, segment_s, regime,
                                         static_cast<fx::FxKind>(f), mix_seed(seed, static_cast<uint64_t>(f)),
                                         threads);
        runs.emplace_back(encode_set(set), set.factors);
      }
    } else {
      auto set = evalm::build_eval_set(test, fx_cfg, segments, configs, segment_s, regime,
                                       std::nullopt, seed, threads);
      auto codes = encode_set(set);
      if (!exported) {
        evalm::export_embeddings(codes, set.factors, (fs::path(out) / "embeddings.csv").string());
        exported = true;
      }
      runs.emplace_back(std::move(codes), set.factors);
    }

    evalm::MetricCase mc;
    mc.name = evalm::eval_regime_name(regime);
    double rf_var_acc = 0.0;
    for (const auto& [codes, factors] : runs) {
      mc.dcimig += evalm::dcimig(codes, factors, bins);
      const auto rf = evalm::dci_rf_explicitness(codes, factors, seeds, forest, seed, threads);
      mc.rf_mean += rf.mean;
      rf_var_acc += rf.stddev * rf.stddev;
    }
    const double inv = 1.0 / static_cast<double>(runs.size());
    mc.dcimig *= inv;
    mc.rf_mean *= inv;
    mc.rf_std = std::sqrt(rf_var_acc * inv);
    cases.push_back(mc);
  }

  {
    std::ofstream f(fs::path(out) / "metrics.csv", std::ios::trunc);
    f << evalm::metric_report_csv(cases);
  }
  std::cout << evalm::metric_report_table(cases);

  // style-transfer table when a cloner is supplied
  if (!cloner_path.empty()) {
    auto net = cloner::load_cloner(cloner_path);
    const auto loss_cfg = loss_config_from(cfg);
    std::vector<evalm::TransferQuad> quads;
    const size_t need = static_cast<size_t>(segment_s * audio::kSampleRate);
    const auto instruments = test.instruments();
    for (int q = 0; q < std::max(2, segments / 4); ++q) {
      Rng rng(mix_seed(seed, 0x7175ull /* "qu" */, static_cast<uint64_t>(q)));
      const auto chain = fx::sample_chain(fx_cfg, rng);
      // x and ref from different songs
      const int song_a = static_cast<int>(rng.randint(static_cast<int64_t>(test.songs.size())));
      int song_b = static_cast<int>(rng.randint(static_cast<int64_t>(test.songs.size())));
      if (song_b == song_a) song_b = (song_b + 1) % static_cast<int>(test.songs.size());

      auto draw_mix = [&](int song, const fx::FxChainInstance* fx_chain,
                          std::vector<std::pair<std::string, audio::AudioBuffer>>* stems_out)
          -> std::optional<audio::AudioBuffer> {
        const auto& sa = test.songs[static_cast<size_t>(song)];
        data::SegmentIndex idx;
        bool first = true;
        for (const auto& inst : instruments) {
          idx = first ? sa.nonsilent.at(inst) : data::intersect(idx, sa.nonsilent.at(inst));
          first = false;
        }
        const auto start = data::sample_segment_start(idx, need, rng);
        if (!start) return std::nullopt;
        audio::AudioBuffer mix(need, audio::kSampleRate);
        for (const auto& inst : instruments) {
          auto seg = data::cut_segment(sa.stems.at(inst), *start, need);
          if (fx_chain) seg = fx::apply_chain(seg, *fx_chain);
          if (stems_out) stems_out->emplace_back(inst, seg);
          for (int c = 0; c < 2; ++c)
            for (size_t i = 0; i < need; ++i)
              mix.ch[static_cast<size_t>(c)][i] += seg.ch[static_cast<size_t>(c)][i];
        }
        return mix;
      };

      std::vector<std::pair<std::string, audio::AudioBuffer>> x_stems;
      const auto x = draw_mix(song_a, nullptr, &x_stems);
      const auto gt = draw_mix(song_a, &chain, nullptr);
      const auto ref = draw_mix(song_b, &chain, nullptr);
      if (!x || !gt || !ref) continue;

      evalm::TransferQuad quad;
      quad.input = *x;
      quad.gt = *gt;
      quad.ref = *ref;
      quad.y = cloner::transfer(x_stems, *ref, encoder, net, threads).mixture;
      quads.push_back(std::move(quad));
    }
    require(!quads.empty(), "evaluate: could not build any transfer quadruples");
    const auto rows = evalm::style_transfer_report(quads, encoder, loss_cfg);
    {
      std::ofstream f(fs::path(out) / "transfer_report.csv", std::ios::trunc);
      f << evalm::transfer_report_csv(rows);
    }
    std::cout << evalm::transfer_report_table(rows);
  }

  std::vector<std::string> manifest_inputs = {cache, split_path, encoder_path};
  if (!cloner_path.empty()) manifest_inputs.push_back(cloner_path);
  write_manifest(out, "evaluate", cfg, manifest_inputs, timer.ms());
  return 0;
}

int cmd_gradcheck(const json& cfg) {
  Timer timer;
  const auto report = nn::gradcheck_suite();
  bool ok = true;
  for (const auto& e : report) {
    std::printf("%-28s max_rel_err %.3e %s\n", e.name.c_str(), e.max_rel_err,
                e.max_rel_err < 1e-5 ? "ok" : "FAIL");
    ok = ok && e.max_rel_err < 1e-5;
  }
  write_manifest(cfg.at("run").at("out_dir").get<std::string>(), "gradcheck", cfg, {}, timer.ms());
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"music mixing style transfer pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;

  // toy-data
  auto* toy = app.add_subcommand("toy-data", "generate a synthetic 4-stem dataset");
  int toy_songs = 10;
  double toy_duration = 30.0;
  toy->add_option("--songs", toy_songs, "number of songs");
  toy->add_option("--duration", toy_duration, "seconds per song");
  add_common(toy, flags);

  // features
  auto* features = app.add_subcommand("features", "compute per-instrument normalization stats");
  std::string split_path;
  features->add_option("--split", split_path, "existing split.json (otherwise computed)");
  add_common(features, flags);

  // normalize
  auto* normalize = app.add_subcommand("normalize", "FX-normalize a dataset into a cache");
  std::string stats_path, in_wav, instrument, out_file;
  normalize->add_option("--stats", stats_path, "stats.json from `features`")->required();
  normalize->add_option("--split", split_path, "split.json");
  normalize->add_option("--in", in_wav, "single-file mode: input WAV");
  normalize->add_option("--instrument", instrument, "single-file mode: instrument name");
  normalize->add_option("--out-file", out_file, "single-file mode: output WAV");
  add_common(normalize, flags);

  // manipulate
  auto* manipulate = app.add_subcommand("manipulate", "apply a random FX chain to a WAV");
  std::string chain_out;
  manipulate->add_option("--in", in_wav, "input WAV")->required();
  manipulate->add_option("--out-file", out_file, "output WAV")->required();
  manipulate->add_option("--chain-out", chain_out, "write the sampled chain as JSON");
  add_common(manipulate, flags);

  // train-encoder
  auto* train_enc = app.add_subcommand("train-encoder", "contrastive FX encoder training");
  std::string cache_dir;
  train_enc->add_option("--cache", cache_dir, "normalized cache directory")->required();
  train_enc->add_option("--split", split_path, "split.json")->required();
  add_common(train_enc, flags);

  // train-cloner
  auto* train_cln = app.add_subcommand("train-cloner", "style converter training");
  std::string encoder_path;
  train_cln->add_option("--cache", cache_dir, "normalized cache directory")->required();
  train_cln->add_option("--split", split_path, "split.json")->required();
  train_cln->add_option("--encoder", encoder_path, "encoder checkpoint")->required();
  add_common(train_cln, flags);

  // encode
  auto* encode = app.add_subcommand("encode", "embed WAV files to CSV");
  std::vector<std::string> encode_inputs;
  std::string in_dir;
  encode->add_option("--encoder", encoder_path, "encoder checkpoint")->required();
  encode->add_option("--in", encode_inputs, "input WAV files");
  encode->add_option("--in-dir", in_dir, "directory of WAV files");
  add_common(encode, flags);

  // transfer
  auto* transfer = app.add_subcommand("transfer", "mixing style transfer");
  std::string stems_dir, ref_path, cloner_path;
  transfer->add_option("--input-stems", stems_dir, "directory of input stem WAVs")->required();
  transfer->add_option("--ref", ref_path, "reference WAV")->required();
  transfer->add_option("--encoder", encoder_path, "encoder checkpoint")->required();
  transfer->add_option("--cloner", cloner_path, "cloner checkpoint")->required();
  add_common(transfer, flags);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "disentanglement and transfer metrics");
  evaluate->add_option("--cache", cache_dir, "normalized cache directory")->required();
  evaluate->add_option("--split", split_path, "split.json")->required();
  evaluate->add_option("--encoder", encoder_path, "encoder checkpoint")->required();
  evaluate->add_option("--cloner", cloner_path, "cloner checkpoint (adds the transfer table)");
  add_common(evaluate, flags);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  add_common(gradcheck, flags);

  std::vector<const char*> argv;
  argv.push_back("mixstyle");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const json cfg = resolve(flags);
    if (flags.print_config) {
      std::cout << cfg.dump(2) << "\n";
      return 0;
    }
    if (toy->parsed()) return cmd_toy_data(cfg, toy_songs, toy_duration);
    if (features->parsed()) return cmd_features(cfg, split_path);
    if (normalize->parsed()) return cmd_normalize(cfg, stats_path, split_path, in_wav, instrument, out_file);
    if (manipulate->parsed()) return cmd_manipulate(cfg, in_wav, out_file, chain_out);
    if (train_enc->parsed()) return cmd_train_encoder(cfg, cache_dir, split_path);
    if (train_cln->parsed()) return cmd_train_cloner(cfg, cache_dir, split_path, encoder_path);
    if (encode->parsed()) return cmd_encode(cfg, encoder_path, encode_inputs, in_dir);
    if (transfer->parsed()) return cmd_transfer(cfg, stems_dir, ref_path, encoder_path, cloner_path);
    if (evaluate->parsed()) return cmd_evaluate(cfg, cache_dir, split_path, encoder_path, cloner_path);
    if (gradcheck->parsed()) return cmd_gradcheck(cfg);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mixstyle::cli
