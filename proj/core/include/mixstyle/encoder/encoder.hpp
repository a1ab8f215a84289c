#pragma once

#include <string>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/nn/checkpoint.hpp"
#include "mixstyle/nn/ops.hpp"

namespace mixstyle::enc {

using audio::AudioBuffer;

struct BlockSpec {
  int out_channels = 16;
  int kernel = 9;
  int stride = 2;
};

struct EncoderConfig {
  std::vector<BlockSpec> blocks;
  int embedding_dim = 2048;
  int d0 = 360;
  double tau = 0.1;
  bool use_batchnorm = true;
  uint64_t init_seed = 1;

  // 9 residual blocks, kernel 9, stride-2 downsampling, channels doubling
  // 16 -> 512 then flat; 2048-dim embedding, d0 = 360, tau = 0.1.
  static EncoderConfig paper_default();
  // shrunk uniformly for desk-scale runs
  static EncoderConfig toy(int embedding_dim = 128, int d0 = 32, int base_channels = 4,
                           int n_blocks = 6);

  int64_t min_input_length() const;  // product of strides
  void validate() const;
};

std::string encoder_config_to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const std::string& text);

// The encoder's style representation. The [0 : d0) prefix is the loss
// subvector; the full vector conditions the cloner.
struct Embedding {
  std::vector<float> v;
  int d0 = 0;
};

template <typename T>
struct EncoderNet {
  EncoderConfig cfg;

  struct Block {
    nn::Var<T> w, b;          // main conv
    nn::Var<T> sw, sb;        // 1x1 shortcut conv
    nn::Var<T> alpha;         // prelu, per channel
    nn::BatchNorm1d<T> bn;
    int stride, kernel;

    explicit Block(int64_t c) : bn(c), stride(1), kernel(1) {}
  };
  std::vector<Block> blocks;
  nn::Var<T> head_w, head_b;  // linear to embedding_dim

  explicit EncoderNet(const EncoderConfig& config);

  std::vector<nn::Var<T>> params() const;
  std::vector<std::pair<std::string, nn::Var<T>>> named_params() const;

  // Joint forward so batchnorm statistics span the whole batch. Returns one
  // embedding Var [embedding_dim] per input [2, L_i].
  std::vector<nn::Var<T>> forward(nn::Tape<T>* tape, const std::vector<nn::Var<T>>& inputs,
                                  bool training);
};

template <typename T>
nn::Var<T> audio_to_var(const AudioBuffer& buffer) {
  auto x = nn::make_var<T>({2, static_cast<int64_t>(buffer.length())});
  for (int c = 0; c < 2; ++c)
    for (size_t i = 0; i < buffer.length(); ++i)
      x->v[static_cast<size_t>(c) * buffer.length() + i] = static_cast<T>(buffer.ch[static_cast<size_t>(c)][i]);
  return x;
}

// Inference: running batchnorm statistics, no tape. Deterministic.
Embedding encode(const AudioBuffer& buffer, EncoderNet<float>& net);

void save_encoder(const EncoderNet<float>& net, const std::string& path);
EncoderNet<float> load_encoder(const std::string& path);

extern template struct EncoderNet<float>;
extern template struct EncoderNet<double>;

}  // namespace mixstyle::enc
