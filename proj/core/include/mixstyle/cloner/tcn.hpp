#pragma once

#include <string>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/encoder/encoder.hpp"
#include "mixstyle/nn/ops.hpp"

namespace mixstyle::cloner {

using audio::AudioBuffer;

struct TcnConfig {
  int blocks = 14;
  int kernel = 15;
  int hidden = 64;
  int condition_dim = 2048;
  nn::PadMode padding = nn::PadMode::kSame;
  uint64_t init_seed = 1;
  // dilation of block i is 2^i

  static TcnConfig paper_default() { return TcnConfig{}; }
  void validate() const;
};

std::string tcn_config_to_json(const TcnConfig& cfg);
TcnConfig tcn_config_from_json(const std::string& text);

// RF = 1 + (kernel - 1) * sum_i 2^i. The default lands on 229,363 samples,
// 5.2009 s at 44.1 kHz.
int64_t receptive_field(const TcnConfig& cfg);

// Stereo-in/stereo-out dilated TCN. Each block: dilated conv to 2*hidden
// pre-activations, FiLM from a per-block linear map of the condition, gated
// tanh/sigmoid activation, residual add. 1x1 in/out projections.
template <typename T>
struct ClonerNet {
  TcnConfig cfg;

  nn::Var<T> in_w, in_b;  // 1x1, 2 -> hidden
  struct Block {
    nn::Var<T> w, b;            // dilated conv, hidden -> 2*hidden
    nn::Var<T> film_w, film_b;  // condition -> gamma|beta over 2*hidden
  };
  std::vector<Block> blocks;
  nn::Var<T> out_w, out_b;  // 1x1, hidden -> 2

  explicit ClonerNet(const TcnConfig& config);

  std::vector<nn::Var<T>> params() const;
  std::vector<std::pair<std::string, nn::Var<T>>> named_params() const;

  // x [2, L], condition [condition_dim] -> [2, L]
  nn::Var<T> forward(nn::Tape<T>* tape, const nn::Var<T>& x, const nn::Var<T>& condition);
};

AudioBuffer tcn_forward(const AudioBuffer& x, const enc::Embedding& condition,
                        ClonerNet<float>& net);

void save_cloner(const ClonerNet<float>& net, const std::string& path);
ClonerNet<float> load_cloner(const std::string& path);

extern template struct ClonerNet<float>;
extern template struct ClonerNet<double>;

}  // namespace mixstyle::cloner
