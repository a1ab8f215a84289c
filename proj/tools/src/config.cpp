#include "mixstyle_cli/config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "mixstyle/common/hash.hpp"

namespace mixstyle::cli {

namespace fs = std::filesystem;

json default_config() {
  json j;
  j["run"] = {{"seed", 17}, {"out_dir", "out"}, {"threads", 0}};
  j["dataset"] = {{"root", ""},
                  {"cache_dir", ""},
                  {"split", {{"train", 86}, {"val", 14}, {"test", 50}, {"seed", 1}, {"auto_scale", true}}}};
  j["normalize"] = {{"target_lufs", -10.0}};

  json ranges = {{"eq_min_bands", 1},        {"eq_max_bands", 6},
                 {"eq_freq_lo", 60.0},       {"eq_freq_hi", 12000.0},
                 {"eq_gain_abs", 12.0},      {"eq_q_lo", 0.3},
                 {"eq_q_hi", 3.0},           {"drc_threshold_lo", -40.0},
                 {"drc_threshold_hi", -10.0},{"drc_ratio_lo", 2.0},
                 {"drc_ratio_hi", 8.0},      {"drc_attack_lo", 1.0},
                 {"drc_attack_hi", 50.0},    {"drc_release_lo", 50.0},
                 {"drc_release_hi", 500.0},  {"drc_knee_lo", 0.0},
                 {"drc_knee_hi", 6.0},       {"drc_makeup_lo", 0.0},
                 {"drc_makeup_hi", 0.0},     {"pan_angle_lo", M_PI / 8.0},
                 {"pan_angle_hi", 3.0 * M_PI / 8.0}, {"imager_side_lo", 0.0},
                 {"imager_side_hi", 2.0},    {"reverb_rt60_lo", 0.2},
                 {"reverb_rt60_hi", 3.0},    {"reverb_wet_lo", 0.05},
                 {"reverb_wet_hi", 0.7},     {"reverb_predelay_lo", 0.0},
                 {"reverb_predelay_hi", 20.0}, {"loudness_gain_abs", 6.0}};
  j["fx"] = {{"probabilities",
              {{"eq", 1.0}, {"drc", 1.0}, {"pan", 1.0}, {"imager", 1.0}, {"reverb", 1.0}, {"loudness", 1.0}}},
             {"ranges", ranges},
             {"ir_dir", ""}};

  json blocks = json::array();
  int ch = 16;
  for (int i = 0; i < 9; ++i) {
    blocks.push_back({{"channels", ch}, {"kernel", 9}, {"stride", 2}});
    if (ch < 512) ch *= 2;
  }
  j["encoder"] = {{"blocks", blocks},
                  {"embedding_dim", 2048},
                  {"d0", 360},
                  {"tau", 0.1},
                  {"use_batchnorm", true},
                  {"init_seed", 1},
                  {"batch_pairs", 128},
                  {"iterations", 16000},
                  {"steps_per_iteration", 4},
                  {"combination_mode", "stems_equal_step"},
                  {"lr", 2e-4},
                  {"seg_min_s", 5.9},
                  {"seg_max_s", 11.8},
                  {"val_interval", 500},
                  {"val_pairs", 4},
                  {"val_batches", 2}};

  j["cloner"] = {{"blocks", 14},
                 {"kernel", 15},
                 {"hidden", 64},
                 {"padding", "same"},
                 {"init_seed", 1},
                 {"batch", 8},
                 {"epochs", 100},
                 {"max_steps", 0},
                 {"segment_s", 11.8},
                 {"lr", 2e-4},
                 {"alpha", 0.1},
                 {"log_eps", 1e-7},
                 {"fft_sizes", {4096, 2048, 1024, 512}},
                 {"val_pairs", 4},
                 {"val_interval", 50}};

  j["eval"] = {{"segments", 25},
               {"configs", 10},
               {"segment_s", 4.0},
               {"bins", 20},
               {"forest_size", 20},
               {"seeds", 4}};
  return j;
}

void reject_unknown_keys(const json& defaults, const json& user, const std::string& path) {
  if (!user.is_object()) return;
  require(defaults.is_object(), "config: unexpected object at " + path);
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    require(defaults.contains(key), "config: unknown key " + here);
    if (value.is_object()) reject_unknown_keys(defaults.at(key), value, here);
  }
}

namespace {

void merge_into(json& base, const json& user) {
  for (const auto& [key, value] : user.items()) {
    if (value.is_object() && base.contains(key) && base.at(key).is_object()) {
      merge_into(base.at(key), value);
    } else {
      base[key] = value;
    }
  }
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const std::exception&) {
    return json(text);  // bare strings are allowed
  }
}

}  // namespace

json resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    require(f.good(), "cannot read config file: " + config_path);
    json user;
    try {
      user = json::parse(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
    } catch (const std::exception& e) {
      throw Error(std::string("config parse failure: ") + e.what());
    }
    reject_unknown_keys(cfg, user, "");
    merge_into(cfg, user);
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    require(eq != std::string::npos, "override must be key.path=value: " + ov);
    const std::string keypath = ov.substr(0, eq);
    const json value = parse_scalar(ov.substr(eq + 1));

    json* cursor = &cfg;
    size_t start = 0;
    std::vector<std::string> parts;
    while (start <= keypath.size()) {
      const auto dot = keypath.find('.', start);
      parts.push_back(keypath.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
      require(cursor->contains(parts[i]), "config: unknown key " + keypath);
      cursor = &cursor->at(parts[i]);
    }
    require(cursor->contains(parts.back()), "config: unknown key " + keypath);
    (*cursor)[parts.back()] = value;
  }
  return cfg;
}

fx::FxChainConfig fx_config_from(const json& cfg) {
  const json& f = cfg.at("fx");
  fx::FxChainConfig out;
  for (int i = 0; i < fx::kNumFx; ++i)
    out.probabilities[static_cast<size_t>(i)] =
        f.at("probabilities").at(fx::fx_name(static_cast<fx::FxKind>(i))).get<double>();
  const json& r = f.at("ranges");
  fx::SamplingRanges& g = out.ranges;
  g.eq_min_bands = r.at("eq_min_bands").get<int>();
  g.eq_max_bands = r.at("eq_max_bands").get<int>();
  g.eq_freq_lo = r.at("eq_freq_lo").get<double>();
  g.eq_freq_hi = r.at("eq_freq_hi").get<double>();
  g.eq_gain_abs = r.at("eq_gain_abs").get<double>();
  g.eq_q_lo = r.at("eq_q_lo").get<double>();
  g.eq_q_hi = r.at("eq_q_hi").get<double>();
  g.drc_threshold_lo = r.at("drc_threshold_lo").get<double>();
  g.drc_threshold_hi = r.at("drc_threshold_hi").get<double>();
  g.drc_ratio_lo = r.at("drc_ratio_lo").get<double>();
  g.drc_ratio_hi = r.at("drc_ratio_hi").get<double>();
  g.drc_attack_lo = r.at("drc_attack_lo").get<double>();
  g.drc_attack_hi = r.at("drc_attack_hi").get<double>();
  g.drc_release_lo = r.at("drc_release_lo").get<double>();
  g.drc_release_hi = r.at("drc_release_hi").get<double>();
  g.drc_knee_lo = r.at("drc_knee_lo").get<double>();
  g.drc_knee_hi = r.at("drc_knee_hi").get<double>();
  g.drc_makeup_lo = r.at("drc_makeup_lo").get<double>();
  g.drc_makeup_hi = r.at("drc_makeup_hi").get<double>();
  g.pan_angle_lo = r.at("pan_angle_lo").get<double>();
  g.pan_angle_hi = r.at("pan_angle_hi").get<double>();
  g.imager_side_lo = r.at("imager_side_lo").get<double>();
  g.imager_side_hi = r.at("imager_side_hi").get<double>();
  g.reverb_rt60_lo = r.at("reverb_rt60_lo").get<double>();
  g.reverb_rt60_hi = r.at("reverb_rt60_hi").get<double>();
  g.reverb_wet_lo = r.at("reverb_wet_lo").get<double>();
  g.reverb_wet_hi = r.at("reverb_wet_hi").get<double>();
  g.reverb_predelay_lo = r.at("reverb_predelay_lo").get<double>();
  g.reverb_predelay_hi = r.at("reverb_predelay_hi").get<double>();
  g.loudness_gain_abs = r.at("loudness_gain_abs").get<double>();
  out.ir_dir = f.at("ir_dir").get<std::string>();
  out.validate();
  return out;
}

enc::EncoderConfig encoder_arch_from(const json& cfg) {
  const json& e = cfg.at("encoder");
  enc::EncoderConfig out;
  out.blocks.clear();
  for (const auto& b : e.at("blocks"))
    out.blocks.push_back(
        {b.at("channels").get<int>(), b.at("kernel").get<int>(), b.at("stride").get<int>()});
  out.embedding_dim = e.at("embedding_dim").get<int>();
  out.d0 = e.at("d0").get<int>();
  out.tau = e.at("tau").get<double>();
  out.use_batchnorm = e.at("use_batchnorm").get<bool>();
  out.init_seed = e.at("init_seed").get<uint64_t>();
  out.validate();
  return out;
}

enc::EncoderTrainConfig encoder_train_from(const json& cfg) {
  const json& e = cfg.at("encoder");
  enc::EncoderTrainConfig out;
  out.arch = encoder_arch_from(cfg);
  out.fx = fx_config_from(cfg);
  out.batch_pairs = e.at("batch_pairs").get<int>();
  out.iterations = e.at("iterations").get<int>();
  out.steps_per_iteration = e.at("steps_per_iteration").get<int>();
  out.combination_mode = e.at("combination_mode").get<std::string>() == "random_combination"
                             ? enc::CombinationMode::kRandomCombination
                             : enc::CombinationMode::kStemsEqualStep;
  out.lr = e.at("lr").get<double>();
  out.seg_min_s = e.at("seg_min_s").get<double>();
  out.seg_max_s = e.at("seg_max_s").get<double>();
  out.val_interval = e.at("val_interval").get<int>();
  out.val_pairs = e.at("val_pairs").get<int>();
  out.val_batches = e.at("val_batches").get<int>();
  out.seed = cfg.at("run").at("seed").get<uint64_t>();
  out.threads = cfg.at("run").at("threads").get<int>();
  return out;
}

cloner::TcnConfig tcn_config_from_cfg(const json& cfg) {
  const json& c = cfg.at("cloner");
  cloner::TcnConfig out;
  out.blocks = c.at("blocks").get<int>();
  out.kernel = c.at("kernel").get<int>();
  out.hidden = c.at("hidden").get<int>();
  out.condition_dim = cfg.at("encoder").at("embedding_dim").get<int>();
  out.padding = c.at("padding").get<std::string>() == "causal" ? nn::PadMode::kCausal : nn::PadMode::kSame;
  out.init_seed = c.at("init_seed").get<uint64_t>();
  out.validate();
  return out;
}

cloner::SpectralLossConfig loss_config_from(const json& cfg) {
  const json& c = cfg.at("cloner");
  cloner::SpectralLossConfig out;
  out.fft_sizes = c.at("fft_sizes").get<std::vector<int>>();
  out.alpha = c.at("alpha").get<double>();
  out.log_eps = c.at("log_eps").get<double>();
  out.validate();
  return out;
}

cloner::ClonerTrainConfig cloner_train_from(const json& cfg) {
  const json& c = cfg.at("cloner");
  cloner::ClonerTrainConfig out;
  out.arch = tcn_config_from_cfg(cfg);
  out.loss = loss_config_from(cfg);
  out.fx = fx_config_from(cfg);
  out.batch = c.at("batch").get<int>();
  out.epochs = c.at("epochs").get<int>();
  out.max_steps = c.at("max_steps").get<int>();
  out.segment_s = c.at("segment_s").get<double>();
  out.lr = c.at("lr").get<double>();
  out.val_interval = c.at("val_interval").get<int>();
  out.val_pairs = c.at("val_pairs").get<int>();
  out.seed = cfg.at("run").at("seed").get<uint64_t>();
  out.threads = cfg.at("run").at("threads").get<int>();
  return out;
}

void write_manifest(const std::string& out_dir, const std::string& subcommand, const json& cfg,
                    const std::vector<std::string>& input_paths, double wall_ms) {
  fs::create_directories(out_dir);
  json m;
  m["subcommand"] = subcommand;
  m["config"] = cfg;
  m["seed"] = cfg.at("run").at("seed");
  json inputs = json::object();
  for (const auto& p : input_paths) {
    if (fs::is_regular_file(p)) {
      inputs[p] = hash_hex(hash_file(p));
    } else if (fs::is_directory(p)) {
      // directory fingerprint: sorted relative paths and sizes
      uint64_t h = 0xcbf29ce484222325ull;
      std::vector<std::string> files;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        h = fnv1a64(f.data(), f.size(), h);
        const auto size = fs::file_size(f);
        h = fnv1a64(&size, sizeof(size), h);
      }
      inputs[p] = hash_hex(h);
    }
  }
  m["inputs"] = inputs;
  m["wall_time_ms"] = wall_ms;
  std::ofstream f(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  require(f.good(), "cannot write manifest in " + out_dir);
  f << m.dump(2) << "\n";
}

}  // namespace mixstyle::cli
