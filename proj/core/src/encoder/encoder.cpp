#include "mixstyle/encoder/encoder.hpp"

#include <cmath>

#include <json.hpp>

#include "mixstyle/common/rng.hpp"

namespace mixstyle::enc {

using nlohmann::json;
using nn::Var;

EncoderConfig EncoderConfig::paper_default() {
  EncoderConfig cfg;
  int ch = 16;
  for (int i = 0; i < 9; ++i) {
    cfg.blocks.push_back({ch, 9, 2});
    if (ch < 512) ch *= 2;
  }
  cfg.embedding_dim = 2048;
  cfg.d0 = 360;
  cfg.tau = 0.1;
  return cfg;
}

EncoderConfig EncoderConfig::toy(int embedding_dim, int d0, int base_channels, int n_blocks) {
  EncoderConfig cfg;
  int ch = base_channels;
  for (int i = 0; i < n_blocks; ++i) {
    cfg.blocks.push_back({ch, 9, 2});
    if (i % 2 == 1) ch *= 2;
  }
  cfg.embedding_dim = embedding_dim;
  cfg.d0 = d0;
  cfg.tau = 0.1;
  return cfg;
}

int64_t EncoderConfig::min_input_length() const {
  int64_t n = 1;
  for (const auto& b : blocks) n *= b.stride;
  return n;
}

void EncoderConfig::validate() const {
  require(!blocks.empty(), "EncoderConfig: need at least one block");
  for (const auto& b : blocks)
    require(b.out_channels >= 1 && b.kernel >= 1 && b.stride >= 1, "EncoderConfig: bad block spec");
  require(embedding_dim >= 1, "EncoderConfig: embedding_dim must be >= 1");
  require(d0 >= 1 && d0 <= embedding_dim, "EncoderConfig: need 0 < d0 <= embedding_dim");
  require(tau > 0.0, "EncoderConfig: tau must be positive");
}

std::string encoder_config_to_json(const EncoderConfig& cfg) {
  json blocks = json::array();
  for (const auto& b : cfg.blocks)
    blocks.push_back({{"channels", b.out_channels}, {"kernel", b.kernel}, {"stride", b.stride}});
  json j = {{"blocks", blocks},
            {"embedding_dim", cfg.embedding_dim},
            {"d0", cfg.d0},
            {"tau", cfg.tau},
            {"use_batchnorm", cfg.use_batchnorm},
            {"init_seed", cfg.init_seed}};
  return j.dump();
}

EncoderConfig encoder_config_from_json(const std::string& text) {
  json j = json::parse(text);
  EncoderConfig cfg;
  cfg.blocks.clear();
  for (const auto& b : j.at("blocks"))
    cfg.blocks.push_back({b.at("channels").get<int>(), b.at("kernel").get<int>(), b.at("stride").get<int>()});
  cfg.embedding_dim = j.at("embedding_dim").get<int>();
  cfg.d0 = j.at("d0").get<int>();
  cfg.tau = j.at("tau").get<double>();
  cfg.use_batchnorm = j.at("use_batchnorm").get<bool>();
  cfg.init_seed = j.at("init_seed").get<uint64_t>();
  cfg.validate();
  return cfg;
}

namespace {

template <typename T>
void init_uniform(Var<T>& v, Rng& rng, double bound) {
  for (auto& x : v->v) x = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace

template <typename T>
EncoderNet<T>::EncoderNet(const EncoderConfig& config) : cfg(config) {
  cfg.validate();
  Rng rng(cfg.init_seed);
  int64_t cin = 2;
  for (const auto& spec : cfg.blocks) {
    Block blk(spec.out_channels);
    blk.stride = spec.stride;
    blk.kernel = spec.kernel;
    blk.w = nn::make_var<T>({spec.out_channels, cin, spec.kernel}, true);
    blk.b = nn::make_var<T>({spec.out_channels}, true);
    blk.sw = nn::make_var<T>({spec.out_channels, cin, 1}, true);
    blk.sb = nn::make_var<T>({spec.out_channels}, true);
    blk.alpha = nn::make_var<T>({spec.out_channels}, true);
    init_uniform(blk.w, rng, std::sqrt(1.0 / (static_cast<double>(cin) * spec.kernel)));
    init_uniform(blk.b, rng, 0.01);
    init_uniform(blk.sw, rng, std::sqrt(1.0 / static_cast<double>(cin)));
    init_uniform(blk.sb, rng, 0.01);
    std::fill(blk.alpha->v.begin(), blk.alpha->v.end(), T(0.25));
    blocks.push_back(std::move(blk));
    cin = spec.out_channels;
  }
  head_w = nn::make_var<T>({cfg.embedding_dim, cin}, true);
  head_b = nn::make_var<T>({cfg.embedding_dim}, true);
  init_uniform(head_w, rng, std::sqrt(1.0 / static_cast<double>(cin)));
  init_uniform(head_b, rng, 0.01);
}

template <typename T>
std::vector<Var<T>> EncoderNet<T>::params() const {
  std::vector<Var<T>> out;
  for (const auto& blk : blocks) {
    out.push_back(blk.w);
    out.push_back(blk.b);
    out.push_back(blk.sw);
    out.push_back(blk.sb);
    out.push_back(blk.alpha);
    if (cfg.use_batchnorm) {
      out.push_back(blk.bn.gamma);
      out.push_back(blk.bn.beta);
    }
  }
  out.push_back(head_w);
  out.push_back(head_b);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Var<T>>> EncoderNet<T>::named_params() const {
  std::vector<std::pair<std::string, Var<T>>> out;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    out.emplace_back(p + "conv.w", blocks[i].w);
    out.emplace_back(p + "conv.b", blocks[i].b);
    out.emplace_back(p + "shortcut.w", blocks[i].sw);
    out.emplace_back(p + "shortcut.b", blocks[i].sb);
    out.emplace_back(p + "prelu.alpha", blocks[i].alpha);
    out.emplace_back(p + "bn.gamma", blocks[i].bn.gamma);
    out.emplace_back(p + "bn.beta", blocks[i].bn.beta);
  }
  out.emplace_back("head.w", head_w);
  out.emplace_back("head.b", head_b);
  return out;
}

template <typename T>
std::vector<Var<T>> EncoderNet<T>::forward(nn::Tape<T>* tape, const std::vector<Var<T>>& inputs,
                                           bool training) {
  require(!inputs.empty(), "EncoderNet::forward: empty batch");
  const int64_t min_len = cfg.min_input_length();
  for (const auto& x : inputs) {
    require(x->shape.size() == 2 && x->shape[0] == 2, "EncoderNet::forward: inputs must be [2, L]");
    require(x->shape[1] >= min_len,
            "EncoderNet::forward: input shorter than the conv stack supports");
  }

  std::vector<Var<T>> xs = inputs;
  for (auto& blk : blocks) {
    std::vector<Var<T>> mains, shortcuts;
    mains.reserve(xs.size());
    shortcuts.reserve(xs.size());
    for (const auto& x : xs) {
      mains.push_back(nn::conv1d(tape, x, blk.w, blk.b, blk.stride, 1, nn::PadMode::kSame));
      shortcuts.push_back(nn::conv1d(tape, x, blk.sw, blk.sb, blk.stride, 1, nn::PadMode::kSame));
    }
    if (cfg.use_batchnorm) mains = nn::batchnorm_group(tape, mains, blk.bn, training);
    for (size_t i = 0; i < xs.size(); ++i)
      xs[i] = nn::prelu(tape, nn::add(tape, mains[i], shortcuts[i]), blk.alpha);
  }

  std::vector<Var<T>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    auto pooled = nn::global_avg_pool_time(tape, x);
    out.push_back(nn::linear(tape, pooled, head_w, head_b));
  }
  return out;
}

Embedding encode(const AudioBuffer& buffer, EncoderNet<float>& net) {
  buffer.validate();
  auto x = audio_to_var<float>(buffer);
  auto embs = net.forward(nullptr, {x}, false);
  Embedding e;
  e.v = embs[0]->v;
  e.d0 = net.cfg.d0;
  return e;
}

void save_encoder(const EncoderNet<float>& net, const std::string& path) {
  std::vector<nn::NamedTensor> tensors;
  tensors.push_back(nn::tensor_from_string("__config__", encoder_config_to_json(net.cfg)));
  for (const auto& [name, p] : net.named_params())
    tensors.push_back(nn::tensor_from_floats(name, p->shape, p->v));
  for (size_t i = 0; i < net.blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".bn.";
    const auto& bn = net.blocks[i].bn;
    tensors.push_back(nn::tensor_from_floats(
        p + "running_mean", {static_cast<int64_t>(bn.running_mean.size())}, bn.running_mean));
    tensors.push_back(nn::tensor_from_floats(
        p + "running_var", {static_cast<int64_t>(bn.running_var.size())}, bn.running_var));
  }
  nn::save_checkpoint(path, tensors);
}

EncoderNet<float> load_encoder(const std::string& path) {
  const auto tensors = nn::load_checkpoint(path);
  const EncoderConfig cfg =
      encoder_config_from_json(nn::string_from_tensor(nn::find_tensor(tensors, "__config__")));
  EncoderNet<float> net(cfg);
  for (auto& [name, p] : net.named_params()) {
    const auto& t = nn::find_tensor(tensors, name);
    const auto vals = nn::floats_from_tensor(t);
    require(vals.size() == p->v.size(), "load_encoder: size mismatch for " + name);
    p->v = vals;
  }
  for (size_t i = 0; i < net.blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".bn.";
    net.blocks[i].bn.running_mean = nn::floats_from_tensor(nn::find_tensor(tensors, p + "running_mean"));
    net.blocks[i].bn.running_var = nn::floats_from_tensor(nn::find_tensor(tensors, p + "running_var"));
  }
  return net;
}

template struct EncoderNet<float>;
template struct EncoderNet<double>;

}  // namespace mixstyle::enc
