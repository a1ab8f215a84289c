#include "mixstyle/audio/fft.hpp"

#include <cmath>

#include "mixstyle/common/error.hpp"

namespace mixstyle::audio {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_power_of_two(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  require(is_power_of_two(n), "fft: size must be a power of two");
  if (n <= 1) return;

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<std::complex<double>> rfft(std::span<const double> x, size_t n) {
  require(is_power_of_two(n), "rfft: size must be a power of two");
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  const size_t m = std::min(x.size(), n);
  for (size_t i = 0; i < m; ++i) a[i] = {x[i], 0.0};
  fft(a, false);
  a.resize(n / 2 + 1);
  return a;
}

std::vector<float> fft_convolve(std::span<const float> a, std::span<const float> b) {
  if (a.empty() || b.empty()) return {};
  // convolve with the shorter side as the kernel
  std::span<const float> sig = a.size() >= b.size() ? a : b;
  std::span<const float> ker = a.size() >= b.size() ? b : a;

  const size_t out_len = sig.size() + ker.size() - 1;
  const size_t fft_n = next_power_of_two(std::max<size_t>(4 * ker.size(), 8192));
  const size_t block = fft_n - ker.size() + 1;

  std::vector<std::complex<double>> kf(fft_n, {0.0, 0.0});
  for (size_t i = 0; i < ker.size(); ++i) kf[i] = {static_cast<double>(ker[i]), 0.0};
  fft(kf, false);

  std::vector<double> acc(out_len, 0.0);
  std::vector<std::complex<double>> buf(fft_n);
  for (size_t start = 0; start < sig.size(); start += block) {
    const size_t len = std::min(block, sig.size() - start);
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (size_t i = 0; i < len; ++i) buf[i] = {static_cast<double>(sig[start + i]), 0.0};
    fft(buf, false);
    for (size_t i = 0; i < fft_n; ++i) buf[i] *= kf[i];
    fft(buf, true);
    const double scale = 1.0 / static_cast<double>(fft_n);
    const size_t tail = std::min(fft_n, out_len - start);
    for (size_t i = 0; i < tail; ++i) acc[start + i] += buf[i].real() * scale;
  }

  std::vector<float> out(out_len);
  for (size_t i = 0; i < out_len; ++i) out[i] = static_cast<float>(acc[i]);
  return out;
}

}  // namespace mixstyle::audio
