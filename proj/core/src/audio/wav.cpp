#include "mixstyle/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace mixstyle::audio {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& v, uint32_t x) {
  v.push_back(static_cast<unsigned char>(x & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 16) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 24) & 0xFF));
}

void put_u16(std::vector<unsigned char>& v, uint16_t x) {
  v.push_back(static_cast<unsigned char>(x & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
}

void put_tag(std::vector<unsigned char>& v, const char* tag) {
  v.insert(v.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  require(bytes.size() >= 44, "WAV file too small: " + path);
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0 && std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_len = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + len > bytes.size()) break;
    if (std::memcmp(tag, "fmt ", 4) == 0 && len >= 16) {
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && len >= 40) {
        // subformat GUID starts with the effective format code
        format = read_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  require(have_fmt && data != nullptr, "WAV missing fmt or data chunk: " + path);
  require(channels == 1 || channels == 2, "unsupported channel count in " + path);
  require(rate == static_cast<uint32_t>(kSampleRate),
          "sample rate mismatch (expected 44100): " + path);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool pcm24 = format == kFormatPcm && bits == 24;
  const bool f32 = format == kFormatFloat && bits == 32;
  require(pcm16 || pcm24 || f32, "unsupported WAV encoding (need PCM16/PCM24/float32): " + path);

  const size_t bytes_per = bits / 8;
  const size_t frames = data_len / (bytes_per * channels);
  AudioBuffer out(frames, kSampleRate);

  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * bytes_per;
      float s = 0.0f;
      if (pcm16) {
        int16_t q;
        std::memcpy(&q, p, 2);
        s = static_cast<float>(q) / 32768.0f;
      } else if (pcm24) {
        int32_t q = static_cast<int32_t>(p[0]) | (static_cast<int32_t>(p[1]) << 8) |
                    (static_cast<int32_t>(p[2]) << 16);
        if (q & 0x800000) q |= ~0xFFFFFF;  // sign extend
        s = static_cast<float>(q) / 8388608.0f;
      } else {
        std::memcpy(&s, p, 4);
      }
      out.ch[static_cast<size_t>(c)][i] = s;
    }
    if (channels == 1) out.right()[i] = out.left()[i];
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::string& path, WavBitDepth depth) {
  buffer.validate();
  const size_t frames = buffer.length();
  const uint16_t channels = 2;
  uint16_t bits = 0, format = 0;
  switch (depth) {
    case WavBitDepth::kPcm16: bits = 16; format = kFormatPcm; break;
    case WavBitDepth::kPcm24: bits = 24; format = kFormatPcm; break;
    case WavBitDepth::kFloat32: bits = 32; format = kFormatFloat; break;
  }
  const uint32_t bytes_per = bits / 8;
  const uint32_t data_len = static_cast<uint32_t>(frames * channels * bytes_per);

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_len);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, channels);
  put_u32(out, static_cast<uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<uint32_t>(buffer.sample_rate) * channels * bytes_per);
  put_u16(out, static_cast<uint16_t>(channels * bytes_per));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_len);

  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < 2; ++c) {
      const float s = buffer.ch[static_cast<size_t>(c)][i];
      if (depth == WavBitDepth::kPcm16) {
        long q = std::lrint(static_cast<double>(s) * 32768.0);
        q = std::clamp(q, -32768l, 32767l);
        put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
      } else if (depth == WavBitDepth::kPcm24) {
        long q = std::lrint(static_cast<double>(s) * 8388608.0);
        q = std::clamp(q, -8388608l, 8388607l);
        const auto u = static_cast<uint32_t>(static_cast<int32_t>(q));
        out.push_back(static_cast<unsigned char>(u & 0xFF));
        out.push_back(static_cast<unsigned char>((u >> 8) & 0xFF));
        out.push_back(static_cast<unsigned char>((u >> 16) & 0xFF));
      } else {
        unsigned char b[4];
        std::memcpy(b, &s, 4);
        out.insert(out.end(), b, b + 4);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), "cannot open WAV file for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  require(f.good(), "short write to WAV file: " + path);
}

}  // namespace mixstyle::audio
