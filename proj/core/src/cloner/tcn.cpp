#include "mixstyle/cloner/tcn.hpp"

#include <cmath>

#include <json.hpp>

#include "mixstyle/common/rng.hpp"

namespace mixstyle::cloner {

using nlohmann::json;
using nn::Var;

void TcnConfig::validate() const {
  require(blocks >= 1 && blocks <= 24, "TcnConfig: blocks out of [1, 24]");
  require(kernel >= 2, "TcnConfig: kernel must be >= 2");
  require(hidden >= 1, "TcnConfig: hidden must be >= 1");
  require(condition_dim >= 1, "TcnConfig: condition_dim must be >= 1");
}

std::string tcn_config_to_json(const TcnConfig& cfg) {
  json j = {{"blocks", cfg.blocks},
            {"kernel", cfg.kernel},
            {"hidden", cfg.hidden},
            {"condition_dim", cfg.condition_dim},
            {"padding", cfg.padding == nn::PadMode::kSame ? "same" : "causal"},
            {"init_seed", cfg.init_seed}};
  return j.dump();
}

TcnConfig tcn_config_from_json(const std::string& text) {
  json j = json::parse(text);
  TcnConfig cfg;
  cfg.blocks = j.at("blocks").get<int>();
  cfg.kernel = j.at("kernel").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.condition_dim = j.at("condition_dim").get<int>();
  cfg.padding = j.at("padding").get<std::string>() == "causal" ? nn::PadMode::kCausal : nn::PadMode::kSame;
  cfg.init_seed = j.at("init_seed").get<uint64_t>();
  cfg.validate();
  return cfg;
}

int64_t receptive_field(const TcnConfig& cfg) {
  cfg.validate();
  int64_t dil_sum = 0;
  for (int i = 0; i < cfg.blocks; ++i) dil_sum += int64_t{1} << i;
  return 1 + static_cast<int64_t>(cfg.kernel - 1) * dil_sum;
}

namespace {

template <typename T>
void init_uniform(Var<T>& v, Rng& rng, double bound) {
  for (auto& x : v->v) x = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace

template <typename T>
ClonerNet<T>::ClonerNet(const TcnConfig& config) : cfg(config) {
  cfg.validate();
  Rng rng(cfg.init_seed);
  const int h = cfg.hidden;

  in_w = nn::make_var<T>({h, 2, 1}, true);
  in_b = nn::make_var<T>({h}, true);
  init_uniform(in_w, rng, std::sqrt(1.0 / 2.0));
  init_uniform(in_b, rng, 0.01);

  for (int i = 0; i < cfg.blocks; ++i) {
    Block blk;
    blk.w = nn::make_var<T>({2 * h, h, cfg.kernel}, true);
    blk.b = nn::make_var<T>({2 * h}, true);
    blk.film_w = nn::make_var<T>({4 * h, cfg.condition_dim}, true);
    blk.film_b = nn::make_var<T>({4 * h}, true);
    init_uniform(blk.w, rng, std::sqrt(1.0 / (static_cast<double>(h) * cfg.kernel)));
    init_uniform(blk.b, rng, 0.01);
    init_uniform(blk.film_w, rng, std::sqrt(1.0 / static_cast<double>(cfg.condition_dim)));
    // gamma half starts near 1 so conditioning begins close to pass-through
    for (int c = 0; c < 2 * h; ++c) blk.film_b->v[static_cast<size_t>(c)] = T(1);
    for (int c = 2 * h; c < 4 * h; ++c) blk.film_b->v[static_cast<size_t>(c)] = T(0);
    blocks.push_back(std::move(blk));
  }

  out_w = nn::make_var<T>({2, h, 1}, true);
  out_b = nn::make_var<T>({2}, true);
  init_uniform(out_w, rng, std::sqrt(1.0 / static_cast<double>(h)));
  init_uniform(out_b, rng, 0.01);
}

template <typename T>
std::vector<Var<T>> ClonerNet<T>::params() const {
  std::vector<Var<T>> out = {in_w, in_b};
  for (const auto& blk : blocks) {
    out.push_back(blk.w);
    out.push_back(blk.b);
    out.push_back(blk.film_w);
    out.push_back(blk.film_b);
  }
  out.push_back(out_w);
  out.push_back(out_b);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Var<T>>> ClonerNet<T>::named_params() const {
  std::vector<std::pair<std::string, Var<T>>> out;
  out.emplace_back("in.w", in_w);
  out.emplace_back("in.b", in_b);
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    out.emplace_back(p + "conv.w", blocks[i].w);
    out.emplace_back(p + "conv.b", blocks[i].b);
    out.emplace_back(p + "film.w", blocks[i].film_w);
    out.emplace_back(p + "film.b", blocks[i].film_b);
  }
  out.emplace_back("out.w", out_w);
  out.emplace_back("out.b", out_b);
  return out;
}

template <typename T>
Var<T> ClonerNet<T>::forward(nn::Tape<T>* tape, const Var<T>& x, const Var<T>& condition) {
  require(x->shape.size() == 2 && x->shape[0] == 2, "ClonerNet::forward: input must be [2, L]");
  require(condition->numel() == cfg.condition_dim,
          "ClonerNet::forward: condition dimension mismatch");
  const int h = cfg.hidden;

  auto cur = nn::conv1d(tape, x, in_w, in_b, 1, 1, cfg.padding);
  for (int i = 0; i < cfg.blocks; ++i) {
    const auto& blk = blocks[static_cast<size_t>(i)];
    const int64_t dilation = int64_t{1} << i;
    auto pre = nn::conv1d(tape, cur, blk.w, blk.b, 1, dilation, cfg.padding);

    auto gb = nn::linear(tape, condition, blk.film_w, blk.film_b);
    auto gamma = nn::slice_vec(tape, gb, 0, 2 * h);
    auto beta = nn::slice_vec(tape, gb, 2 * h, 4 * h);

    auto filmed = nn::film(tape, pre, gamma, beta);
    auto t_half = nn::slice_channels(tape, filmed, 0, h);
    auto s_half = nn::slice_channels(tape, filmed, h, 2 * h);
    auto gated = nn::mul(tape, nn::tanh_op(tape, t_half), nn::sigmoid_op(tape, s_half));
    cur = nn::add(tape, cur, gated);
  }
  return nn::conv1d(tape, cur, out_w, out_b, 1, 1, cfg.padding);
}

AudioBuffer tcn_forward(const AudioBuffer& x, const enc::Embedding& condition,
                        ClonerNet<float>& net) {
  x.validate();
  auto xv = enc::audio_to_var<float>(x);
  auto cond = nn::make_var<float>({static_cast<int64_t>(condition.v.size())});
  cond->v = condition.v;
  auto y = net.forward(nullptr, xv, cond);
  AudioBuffer out(x.length(), x.sample_rate);
  for (int c = 0; c < 2; ++c)
    for (size_t i = 0; i < out.length(); ++i)
      out.ch[static_cast<size_t>(c)][i] = y->v[static_cast<size_t>(c) * out.length() + i];
  audio::require_finite(out, "tcn_forward");
  return out;
}

void save_cloner(const ClonerNet<float>& net, const std::string& path) {
  std::vector<nn::NamedTensor> tensors;
  tensors.push_back(nn::tensor_from_string("__config__", tcn_config_to_json(net.cfg)));
  for (const auto& [name, p] : net.named_params())
    tensors.push_back(nn::tensor_from_floats(name, p->shape, p->v));
  nn::save_checkpoint(path, tensors);
}

ClonerNet<float> load_cloner(const std::string& path) {
  const auto tensors = nn::load_checkpoint(path);
  const TcnConfig cfg =
      tcn_config_from_json(nn::string_from_tensor(nn::find_tensor(tensors, "__config__")));
  ClonerNet<float> net(cfg);
  for (auto& [name, p] : net.named_params()) {
    const auto vals = nn::floats_from_tensor(nn::find_tensor(tensors, name));
    require(vals.size() == p->v.size(), "load_cloner: size mismatch for " + name);
    p->v = vals;
  }
  return net;
}

template struct ClonerNet<float>;
template struct ClonerNet<double>;

}  // namespace mixstyle::cloner
