// In-place iterative radix-2 FFT with a direct-DFT fallback for other lengths.
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace uasw {

/// Forward transform X[k] = sum_n x[n] exp(-2 pi i k n / N).
inline void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!std::has_single_bit(n)) {
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc{};
      for (std::size_t t = 0; t < n; ++t)
        acc += data[t] * std::polar(1.0, -2.0 * std::numbers::pi *
                                             static_cast<double>((k * t) % n) /
                                             static_cast<double>(n));
      out[k] = acc;
    }
    std::copy(out.begin(), out.end(), data.begin());
    return;
  }

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    twiddle[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = data[i + k];
        const auto v = data[i + k + half] * twiddle[k * stride];
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace uasw
