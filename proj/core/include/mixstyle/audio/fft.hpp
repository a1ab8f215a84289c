#pragma once

#include <complex>
#include <span>
#include <vector>

namespace mixstyle::audio {

// In-place iterative radix-2. Forward uses e^{-i2pi kn/N}; inverse uses the
// conjugate kernel and does NOT divide by N (callers scale where needed).
void fft(std::vector<std::complex<double>>& a, bool inverse);

bool is_power_of_two(size_t n);
size_t next_power_of_two(size_t n);

// One-sided spectrum, bins 0..n/2. Input shorter than n is zero-padded.
std::vector<std::complex<double>> rfft(std::span<const double> x, size_t n);

// Full linear convolution (length a+b-1), overlap-add FFT. Double internal
// precision, float output.
std::vector<float> fft_convolve(std::span<const float> a, std::span<const float> b);

}  // namespace mixstyle::audio
