// SPDX-License-Identifier: Apache-2.0
#include "mmw/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace mmw::kernels {
namespace {

inline float64x2_t masked(uint64x2_t mask, float64x2_t v) {
  return vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(v)));
}

void matvec(const double* W, const double* x, const double* b, double* y, size_t rows,
            size_t cols) {
  size_t vec4 = cols & ~size_t(3);
  size_t vec2 = cols & ~size_t(1);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    float64x2_t a0 = vdupq_n_f64(0.0);
    float64x2_t a1 = vdupq_n_f64(0.0);
    size_t j = 0;
    for (; j < vec4; j += 4) {
      a0 = vfmaq_f64(a0, vld1q_f64(row + j), vld1q_f64(x + j));
      a1 = vfmaq_f64(a1, vld1q_f64(row + j + 2), vld1q_f64(x + j + 2));
    }
    for (; j < vec2; j += 2) a0 = vfmaq_f64(a0, vld1q_f64(row + j), vld1q_f64(x + j));
    double acc = vaddvq_f64(vaddq_f64(a0, a1));
    for (; j < cols; ++j) acc += row[j] * x[j];
    y[r] = b ? b[r] + acc : acc;
  }
}

void matvec_t_acc(const double* W, const double* dy, double* gx, size_t rows, size_t cols) {
  size_t vec = cols & ~size_t(1);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    float64x2_t d = vdupq_n_f64(dy[r]);
    size_t j = 0;
    for (; j < vec; j += 2)
      vst1q_f64(gx + j, vfmaq_f64(vld1q_f64(gx + j), vld1q_f64(row + j), d));
    for (; j < cols; ++j) gx[j] += row[j] * dy[r];
  }
}

void ger_acc(const double* dy, const double* x, double* G, size_t rows, size_t cols) {
  size_t vec = cols & ~size_t(1);
  for (size_t r = 0; r < rows; ++r) {
    float64x2_t d = vdupq_n_f64(dy[r]);
    double* row = G + r * cols;
    size_t j = 0;
    for (; j < vec; j += 2)
      vst1q_f64(row + j, vfmaq_f64(vld1q_f64(row + j), d, vld1q_f64(x + j)));
    for (; j < cols; ++j) row[j] += dy[r] * x[j];
  }
}

void axpy(double a, const double* x, double* y, size_t n) {
  float64x2_t av = vdupq_n_f64(a);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  size_t vec4 = n & ~size_t(3);
  size_t vec2 = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec4; i += 4) {
    a0 = vfmaq_f64(a0, vld1q_f64(a + i), vld1q_f64(b + i));
    a1 = vfmaq_f64(a1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i < vec2; i += 2) a0 = vfmaq_f64(a0, vld1q_f64(a + i), vld1q_f64(b + i));
  double acc = vaddvq_f64(vaddq_f64(a0, a1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_sq(const double* x, size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    a0 = vfmaq_f64(a0, v, v);
  }
  double acc = vaddvq_f64(a0);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double max_abs(const double* x, size_t n) {
  float64x2_t mv = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) mv = vmaxq_f64(mv, vabsq_f64(vld1q_f64(x + i)));
  double m = vmaxvq_f64(mv);
  for (; i < n; ++i) {
    double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

void relu(const double* x, double* y, size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) vst1q_f64(y + i, vmaxq_f64(zero, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void film_relu(const double* pre, const double* gamma, const double* beta, double* y, size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) {
    float64x2_t v = vaddq_f64(vmulq_f64(vld1q_f64(gamma + i), vld1q_f64(pre + i)),
                              vld1q_f64(beta + i));
    vst1q_f64(y + i, vmaxq_f64(zero, v));
  }
  for (; i < n; ++i) {
    double v = gamma[i] * pre[i] + beta[i];
    y[i] = v > 0.0 ? v : 0.0;
  }
}

void film_relu_bwd(const double* dh, const double* pre, const double* gamma, const double* beta,
                   double* dpre, double* dgamma, double* dbeta, size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) {
    float64x2_t g = vld1q_f64(gamma + i);
    float64x2_t p = vld1q_f64(pre + i);
    float64x2_t v = vaddq_f64(vmulq_f64(g, p), vld1q_f64(beta + i));
    uint64x2_t mask = vcgtq_f64(v, zero);
    float64x2_t d = masked(mask, vld1q_f64(dh + i));
    vst1q_f64(dpre + i, vmulq_f64(d, g));
    vst1q_f64(dgamma + i, vfmaq_f64(vld1q_f64(dgamma + i), d, p));
    vst1q_f64(dbeta + i, vaddq_f64(vld1q_f64(dbeta + i), d));
  }
  for (; i < n; ++i) {
    double v = gamma[i] * pre[i] + beta[i];
    if (v > 0.0) {
      dpre[i] = dh[i] * gamma[i];
      dgamma[i] += dh[i] * pre[i];
      dbeta[i] += dh[i];
    } else {
      dpre[i] = 0.0;
    }
  }
}

void relu_bwd(const double* dh, const double* pre, double* dpre, size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) {
    uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), zero);
    vst1q_f64(dpre + i, masked(mask, vld1q_f64(dh + i)));
  }
  for (; i < n; ++i) dpre[i] = pre[i] > 0.0 ? dh[i] : 0.0;
}

void adam_update(double* p, const double* g, double* m, double* v, size_t n, double lr,
                 double beta1, double beta2, double eps, double inv_bc1, double inv_bc2) {
  float64x2_t b1 = vdupq_n_f64(beta1);
  float64x2_t b2 = vdupq_n_f64(beta2);
  float64x2_t omb1 = vdupq_n_f64(1.0 - beta1);
  float64x2_t omb2 = vdupq_n_f64(1.0 - beta2);
  float64x2_t lrv = vdupq_n_f64(lr);
  float64x2_t epsv = vdupq_n_f64(eps);
  float64x2_t bc1 = vdupq_n_f64(inv_bc1);
  float64x2_t bc2 = vdupq_n_f64(inv_bc2);
  size_t vec = n & ~size_t(1);
  size_t i = 0;
  for (; i < vec; i += 2) {
    float64x2_t gi = vld1q_f64(g + i);
    float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, gi));
    float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)),
                               vmulq_f64(omb2, vmulq_f64(gi, gi)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    float64x2_t step = vdivq_f64(vmulq_f64(lrv, vmulq_f64(mi, bc1)),
                                 vaddq_f64(vsqrtq_f64(vmulq_f64(vi, bc2)), epsv));
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
  }
  for (; i < n; ++i) {
    double gi = g[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
    v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
    p[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const Ops& neon_ops() {
  static const Ops table = {matvec,  matvec_t_acc, ger_acc,  axpy,      dot,
                            sum_sq,  max_abs,      relu,     film_relu, film_relu_bwd,
                            relu_bwd, adam_update};
  return table;
}

}  // namespace mmw::kernels

#endif
