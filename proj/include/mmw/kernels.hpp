// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace mmw::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Double-precision primitives behind the INR/hypernet hot loops. Every
// backend implements the same contracts:
//   matvec        y[r] = b[r] + sum_j W[r*cols+j] * x[j]       (b may be null)
//   matvec_t_acc  gx[j] += sum_r W[r*cols+j] * dy[r]
//   ger_acc       G[r*cols+j] += dy[r] * x[j]
//   axpy          y[i] += a * x[i]
//   dot           sum_i a[i] * b[i]
//   sum_sq        sum_i x[i]^2
//   max_abs       max_i |x[i]|
//   relu          y[i] = max(0, x[i])
//   film_relu     y[i] = max(0, gamma[i] * x[i] + beta[i])
//   film_relu_bwd dpre[i] = active ? dh[i] * gamma[i] : 0, and accumulates
//                 dgamma[i] += active ? dh[i] * pre[i] : 0, dbeta[i] += active ? dh[i] : 0,
//                 where active = (gamma[i] * pre[i] + beta[i]) > 0
//   relu_bwd      dpre[i] = pre[i] > 0 ? dh[i] : 0
//   adam_update   fused moment + parameter update with precomputed bias
//                 corrections: m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;
//                 p -= lr * (m*inv_bc1) / (sqrt(v*inv_bc2) + eps)
//
// Reductions accumulate in row/lane-block order fixed per backend, so each
// backend is individually deterministic; cross-backend equality is only
// approximate and covered by the equivalence tests.
struct Ops {
  void (*matvec)(const double* W, const double* x, const double* b, double* y, size_t rows,
                 size_t cols);
  void (*matvec_t_acc)(const double* W, const double* dy, double* gx, size_t rows, size_t cols);
  void (*ger_acc)(const double* dy, const double* x, double* G, size_t rows, size_t cols);
  void (*axpy)(double a, const double* x, double* y, size_t n);
  double (*dot)(const double* a, const double* b, size_t n);
  double (*sum_sq)(const double* x, size_t n);
  double (*max_abs)(const double* x, size_t n);
  void (*relu)(const double* x, double* y, size_t n);
  void (*film_relu)(const double* pre, const double* gamma, const double* beta, double* y,
                    size_t n);
  void (*film_relu_bwd)(const double* dh, const double* pre, const double* gamma,
                        const double* beta, double* dpre, double* dgamma, double* dbeta, size_t n);
  void (*relu_bwd)(const double* dh, const double* pre, double* dpre, size_t n);
  void (*adam_update)(double* p, const double* g, double* m, double* v, size_t n, double lr,
                      double beta1, double beta2, double eps, double inv_bc1, double inv_bc2);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

bool backend_available(Backend b);
Backend active_backend();
void set_backend(Backend b);    // throws MmwError(InvalidArgument) if unavailable
void reset_backend();           // back to best available
const Ops& ops();
std::string backend_name(Backend b);

}  // namespace mmw::kernels
