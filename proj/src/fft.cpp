// SPDX-License-Identifier: Apache-2.0
#include "mmw/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "mmw/common.hpp"

namespace mmw {
namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::complex<double>* x, size_t n) {
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void dft_direct(std::complex<double>* x, size_t n) {
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t m = 0; m < n; ++m) {
      double ang = -2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(m) /
                   static_cast<double>(n);
      acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  for (size_t k = 0; k < n; ++k) x[k] = out[k];
}

}  // namespace

void dft(std::complex<double>* x, size_t n) {
  if (n <= 1) return;
  if (is_pow2(n))
    fft_pow2(x, n);
  else
    dft_direct(x, n);
}

void fftshift(std::complex<double>* x, size_t n) {
  if (n % 2 != 0) fail(Err::InvalidArgument, "fftshift needs an even length");
  size_t h = n / 2;
  for (size_t i = 0; i < h; ++i) std::swap(x[i], x[i + h]);
}

std::vector<std::complex<double>> dft_padded_shifted(const std::complex<double>* in, size_t n_in,
                                                     size_t n_out) {
  if (n_out < n_in) fail(Err::InvalidArgument, "pad length shorter than input");
  std::vector<std::complex<double>> buf(n_out, std::complex<double>(0.0, 0.0));
  for (size_t i = 0; i < n_in; ++i) buf[i] = in[i];
  dft(buf.data(), n_out);
  fftshift(buf.data(), n_out);
  return buf;
}

}  // namespace mmw
