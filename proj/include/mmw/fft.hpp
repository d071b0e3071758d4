// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mmw {

// Forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N), no normalization.
// Radix-2 in place for power-of-two sizes, direct DFT otherwise. Sizes in
// this codebase are tiny (<= 64), so the fallback's O(n^2) is irrelevant;
// what matters is that results are bit-stable across runs and platforms
// with the same libm.
void dft(std::complex<double>* x, size_t n);

// Zero-frequency bin moved to n/2 (even n required).
void fftshift(std::complex<double>* x, size_t n);

// Forward DFT of `in` zero-padded to n_out bins, then fftshifted.
std::vector<std::complex<double>> dft_padded_shifted(const std::complex<double>* in, size_t n_in,
                                                     size_t n_out);

}  // namespace mmw
