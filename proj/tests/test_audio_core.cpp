#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "mixstyle/audio/fft.hpp"
#include "mixstyle/audio/loudness.hpp"
#include "mixstyle/audio/stft.hpp"
#include "mixstyle/audio/wav.hpp"

using namespace mixstyle;
using namespace testutil;
namespace fs = std::filesystem;

TEST_CASE("wav roundtrip float32 is bit exact") {
  const auto b = noise(0.25, 11);
  const auto path = (fs::temp_directory_path() / "mixstyle_rt_f32.wav").string();
  audio::write_wav(b, path, audio::WavBitDepth::kFloat32);
  const auto back = audio::read_wav(path);
  REQUIRE(back.length() == b.length());
  CHECK(max_abs_diff(b, back) == 0.0);
}

TEST_CASE("wav roundtrip pcm16 within quantization step") {
  const auto b = noise(0.25, 12, 0.9);
  const auto path = (fs::temp_directory_path() / "mixstyle_rt_p16.wav").string();
  audio::write_wav(b, path, audio::WavBitDepth::kPcm16);
  const auto back = audio::read_wav(path);
  CHECK(max_abs_diff(b, back) <= std::pow(2.0, -15.0));
}

TEST_CASE("wav roundtrip pcm24 within quantization step") {
  const auto b = noise(0.1, 13, 0.9);
  const auto path = (fs::temp_directory_path() / "mixstyle_rt_p24.wav").string();
  audio::write_wav(b, path, audio::WavBitDepth::kPcm24);
  const auto back = audio::read_wav(path);
  CHECK(max_abs_diff(b, back) <= std::pow(2.0, -23.0));
}

TEST_CASE("wav pcm16 clipping saturates to full scale") {
  audio::AudioBuffer b(4);
  b.left() = {1.5f, -1.5f, 0.0f, 0.25f};
  b.right() = b.left();
  const auto path = (fs::temp_directory_path() / "mixstyle_clip.wav").string();
  audio::write_wav(b, path, audio::WavBitDepth::kPcm16);
  const auto back = audio::read_wav(path);
  CHECK(back.left()[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.left()[1] == doctest::Approx(-1.0));
}

TEST_CASE("wav mono file duplicates to stereo") {
  // hand-write a mono PCM16 file
  const auto path = (fs::temp_directory_path() / "mixstyle_mono.wav").string();
  {
    audio::AudioBuffer st(8);
    for (size_t i = 0; i < 8; ++i) st.left()[i] = st.right()[i] = 0.1f * static_cast<float>(i);
    audio::write_wav(st, path, audio::WavBitDepth::kPcm16);
    // patch the header to mono by rewriting with 1 channel: simplest is to
    // re-emit the file manually
    auto bytes = [&] {
      std::ifstream f(path, std::ios::binary);
      return std::vector<unsigned char>((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>());
    }();
    // keep every other sample (left), fix channel count and sizes
    std::vector<unsigned char> mono(bytes.begin(), bytes.begin() + 44);
    for (size_t i = 44; i + 4 <= bytes.size(); i += 4) {
      mono.push_back(bytes[i]);
      mono.push_back(bytes[i + 1]);
    }
    const uint32_t data_len = static_cast<uint32_t>(mono.size() - 44);
    mono[22] = 1;  // channels
    const uint32_t byte_rate = 44100u * 2u;
    std::memcpy(&mono[28], &byte_rate, 4);
    const uint16_t block_align = 2;
    std::memcpy(&mono[32], &block_align, 2);
    std::memcpy(&mono[40], &data_len, 4);
    const uint32_t riff = 36 + data_len;
    std::memcpy(&mono[4], &riff, 4);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(mono.data()), static_cast<std::streamsize>(mono.size()));
  }
  const auto back = audio::read_wav(path);
  REQUIRE(back.length() == 8);
  for (size_t i = 0; i < 8; ++i) CHECK(back.left()[i] == back.right()[i]);
}

TEST_CASE("wav rejects non-44100 sample rate") {
  const auto path = (fs::temp_directory_path() / "mixstyle_48k.wav").string();
  audio::AudioBuffer b(16, 48000);
  audio::write_wav(b, path, audio::WavBitDepth::kFloat32);
  CHECK_THROWS_AS((void)audio::read_wav(path), Error);
}

TEST_CASE("mid/side forward examples and exact roundtrip") {
  audio::AudioBuffer b(2);
  b.left() = {1.0f, 0.0f};
  b.right() = {0.0f, 1.0f};
  std::vector<float> mid, side;
  audio::to_mid_side(b, mid, side);
  CHECK(mid[0] == 1.0f);
  CHECK(mid[1] == 1.0f);
  CHECK(side[0] == 1.0f);
  CHECK(side[1] == -1.0f);

  const auto back = audio::from_mid_side(mid, side);
  CHECK(max_abs_diff(b, back) == 0.0);

  // identical channels: side is exactly zero, mid doubles
  audio::AudioBuffer mono(4);
  for (size_t i = 0; i < 4; ++i) mono.left()[i] = mono.right()[i] = 0.25f * static_cast<float>(i);
  audio::to_mid_side(mono, mid, side);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(side[i] == 0.0f);
    CHECK(mid[i] == 2.0f * mono.left()[i]);
  }
}

TEST_CASE("apply_gain_db examples") {
  const auto b = noise(0.05, 21, 0.05);
  CHECK(max_abs_diff(audio::apply_gain_db(b, 0.0), b) == 0.0);

  const auto half = audio::apply_gain_db(b, -6.0206);
  for (size_t i = 0; i < b.length(); ++i)
    CHECK(half.left()[i] == doctest::Approx(0.5f * b.left()[i]).epsilon(1e-4));

  audio::AudioBuffer x(1);
  x.left()[0] = x.right()[0] = 0.05f;
  CHECK(audio::apply_gain_db(x, 20.0).left()[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("rms_energy examples and direct-sum oracle") {
  audio::AudioBuffer c(1000);
  for (auto& s : c.left()) s = 0.5f;
  for (auto& s : c.right()) s = 0.5f;
  for (float v : audio::rms_energy(c, 100, 100)) CHECK(v == doctest::Approx(0.5).epsilon(1e-7));

  audio::AudioBuffer z(500);
  for (float v : audio::rms_energy(z, 100, 100)) CHECK(v == 0.0f);

  const auto r = noise(0.1, 31);
  const auto frames = audio::rms_energy(r, 441, 441);
  // direct summation oracle on frame 3
  double acc = 0.0;
  for (size_t i = 3 * 441; i < 4 * 441; ++i) {
    acc += static_cast<double>(r.left()[i]) * r.left()[i];
    acc += static_cast<double>(r.right()[i]) * r.right()[i];
  }
  CHECK(frames[3] == doctest::Approx(std::sqrt(acc / (2 * 441.0))).epsilon(1e-7));
}

TEST_CASE("stft zero signal and DC bin") {
  std::vector<float> zeros(2048, 0.0f);
  const auto s = audio::stft_magnitude(zeros, 512, 128);
  for (float m : s.mag) CHECK(m == 0.0f);

  std::vector<float> ones(2048, 1.0f);
  const auto d = audio::stft_magnitude(ones, 512, 128, audio::Window::kRect);
  REQUIRE(d.bins == 257);
  for (int f = 0; f < d.frames; ++f) CHECK(d.at(f, 0) == doctest::Approx(512.0).epsilon(1e-6));
}

TEST_CASE("stft matches naive DFT oracle on a bin-centered sine") {
  // bin 8 of a 512 FFT at 44100: f = 8 * 44100 / 512
  const double freq = 8.0 * 44100.0 / 512.0;
  const auto b = sine(freq, 0.1);
  const auto s = audio::stft_magnitude(b.left(), 512, 128);

  // rebuild frame 4 by hand: reflect padding, Hann window, naive DFT
  const auto win = audio::make_window(audio::Window::kHann, 512);
  const long len = static_cast<long>(b.length());
  std::vector<double> frame(512);
  const long start = 4 * 128 - 256;
  for (int i = 0; i < 512; ++i) {
    long p = start + i;
    const long period = 2 * (len - 1);
    long m = p % period;
    if (m < 0) m += period;
    if (m >= len) m = period - m;
    frame[static_cast<size_t>(i)] = static_cast<double>(b.left()[static_cast<size_t>(m)]) * win[static_cast<size_t>(i)];
  }
  const auto oracle = naive_dft_mag(frame);
  double peak = 0.0;
  for (int k = 0; k <= 256; ++k) {
    const double err = std::fabs(s.at(4, k) - oracle[static_cast<size_t>(k)]);
    CHECK(err <= 1e-5 * std::max(1.0, oracle[static_cast<size_t>(k)]));
    peak = std::max(peak, oracle[static_cast<size_t>(k)]);
  }
  // energy concentrated at bin 8
  CHECK(s.at(4, 8) == doctest::Approx(peak).epsilon(1e-6));
  CHECK(s.at(4, 8) > 20.0 * s.at(4, 16));
}

TEST_CASE("stft is content deterministic") {
  const auto b = noise(0.05, 77);
  const auto s1 = audio::stft_magnitude(b.left(), 256, 64);
  const auto s2 = audio::stft_magnitude(b.left(), 256, 64);
  CHECK(s1.mag == s2.mag);
}

TEST_CASE("integrated loudness compliance vector: 997 Hz left-only full scale") {
  audio::AudioBuffer b(audio::kSampleRate * 3);
  for (size_t i = 0; i < b.length(); ++i)
    b.left()[i] = static_cast<float>(std::sin(2.0 * M_PI * 997.0 * i / audio::kSampleRate));
  const auto lufs = audio::integrated_loudness(b);
  REQUIRE_FALSE(lufs.silence());
  CHECK(lufs.value == doctest::Approx(-3.01).epsilon(0.035));
}

TEST_CASE("integrated loudness sentinel and errors") {
  audio::AudioBuffer silence(audio::kSampleRate);
  CHECK(audio::integrated_loudness(silence).silence());

  audio::AudioBuffer tiny(1000);
  CHECK_THROWS_AS((void)audio::integrated_loudness(tiny), Error);
}

TEST_CASE("loudness is linear in gain") {
  const auto b = noise(3.0, 99, 0.2);
  const auto base = audio::integrated_loudness(b);
  const auto up = audio::integrated_loudness(audio::apply_gain_db(b, 6.02));
  CHECK(up.value - base.value == doctest::Approx(6.02).epsilon(0.05 / 6.02));
}

TEST_CASE("fft convolution matches naive oracle") {
  Rng rng(5);
  std::vector<float> a(700), k(37);
  for (auto& x : a) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (auto& x : k) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  const auto fast = audio::fft_convolve(a, k);
  const auto slow = naive_convolve(a, k);
  REQUIRE(fast.size() == slow.size());
  for (size_t i = 0; i < fast.size(); ++i)
    CHECK(std::fabs(fast[i] - slow[i]) <= 1e-5 * std::max(1.0, std::fabs(slow[i])));
}
