// SPDX-License-Identifier: Apache-2.0
#include "mmw/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace mmw::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void matvec(const double* W, const double* x, const double* b, double* y, size_t rows,
            size_t cols) {
  size_t vec8 = cols & ~size_t(7);
  size_t vec4 = cols & ~size_t(3);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    size_t j = 0;
    for (; j < vec8; j += 8) {
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(x + j + 4), a1);
    }
    for (; j < vec4; j += 4)
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), a0);
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; j < cols; ++j) acc += row[j] * x[j];
    y[r] = b ? b[r] + acc : acc;
  }
}

void matvec_t_acc(const double* W, const double* dy, double* gx, size_t rows, size_t cols) {
  size_t vec = cols & ~size_t(3);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    __m256d d = _mm256_set1_pd(dy[r]);
    size_t j = 0;
    for (; j < vec; j += 4) {
      __m256d g = _mm256_loadu_pd(gx + j);
      g = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), d, g);
      _mm256_storeu_pd(gx + j, g);
    }
    for (; j < cols; ++j) gx[j] += row[j] * dy[r];
  }
}

void ger_acc(const double* dy, const double* x, double* G, size_t rows, size_t cols) {
  size_t vec = cols & ~size_t(3);
  for (size_t r = 0; r < rows; ++r) {
    __m256d d = _mm256_set1_pd(dy[r]);
    double* row = G + r * cols;
    size_t j = 0;
    for (; j < vec; j += 4) {
      __m256d g = _mm256_loadu_pd(row + j);
      g = _mm256_fmadd_pd(d, _mm256_loadu_pd(x + j), g);
      _mm256_storeu_pd(row + j, g);
    }
    for (; j < cols; ++j) row[j] += dy[r] * x[j];
  }
}

void axpy(double a, const double* x, double* y, size_t n) {
  __m256d av = _mm256_set1_pd(a);
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, v);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  size_t vec8 = n & ~size_t(7);
  size_t vec4 = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec8; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), a1);
  }
  for (; i < vec4; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), a0);
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_sq(const double* x, size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    a0 = _mm256_fmadd_pd(v, v, a0);
  }
  double acc = hsum(a0);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double max_abs(const double* x, size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d mv = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4)
    mv = _mm256_max_pd(mv, _mm256_and_pd(_mm256_loadu_pd(x + i), absmask));
  __m128d lo = _mm256_castpd256_pd128(mv);
  __m128d hi = _mm256_extractf128_pd(mv, 1);
  lo = _mm_max_pd(lo, hi);
  double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) {
    double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

void relu(const double* x, double* y, size_t n) {
  __m256d zero = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void film_relu(const double* pre, const double* gamma, const double* beta, double* y, size_t n) {
  __m256d zero = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(gamma + i), _mm256_loadu_pd(pre + i)),
                              _mm256_loadu_pd(beta + i));
    _mm256_storeu_pd(y + i, _mm256_max_pd(zero, v));
  }
  for (; i < n; ++i) {
    double v = gamma[i] * pre[i] + beta[i];
    y[i] = v > 0.0 ? v : 0.0;
  }
}

void film_relu_bwd(const double* dh, const double* pre, const double* gamma, const double* beta,
                   double* dpre, double* dgamma, double* dbeta, size_t n) {
  __m256d zero = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d g = _mm256_loadu_pd(gamma + i);
    __m256d p = _mm256_loadu_pd(pre + i);
    __m256d v = _mm256_add_pd(_mm256_mul_pd(g, p), _mm256_loadu_pd(beta + i));
    __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    __m256d d = _mm256_and_pd(_mm256_loadu_pd(dh + i), mask);
    _mm256_storeu_pd(dpre + i, _mm256_mul_pd(d, g));
    _mm256_storeu_pd(dgamma + i, _mm256_add_pd(_mm256_loadu_pd(dgamma + i), _mm256_mul_pd(d, p)));
    _mm256_storeu_pd(dbeta + i, _mm256_add_pd(_mm256_loadu_pd(dbeta + i), d));
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
  __m256d zero = _mm256_setzero_pd();
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dpre + i, _mm256_and_pd(_mm256_loadu_pd(dh + i), mask));
  }
  for (; i < n; ++i) dpre[i] = pre[i] > 0.0 ? dh[i] : 0.0;
}

void adam_update(double* p, const double* g, double* m, double* v, size_t n, double lr,
                 double beta1, double beta2, double eps, double inv_bc1, double inv_bc2) {
  __m256d b1 = _mm256_set1_pd(beta1);
  __m256d b2 = _mm256_set1_pd(beta2);
  __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
  __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
  __m256d lrv = _mm256_set1_pd(lr);
  __m256d epsv = _mm256_set1_pd(eps);
  __m256d bc1 = _mm256_set1_pd(inv_bc1);
  __m256d bc2 = _mm256_set1_pd(inv_bc2);
  size_t vec = n & ~size_t(3);
  size_t i = 0;
  for (; i < vec; i += 4) {
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mi, bc1)),
                                 _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, bc2)), epsv));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    double gi = g[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
    v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
    p[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table = {matvec,  matvec_t_acc, ger_acc,  axpy,      dot,
                            sum_sq,  max_abs,      relu,     film_relu, film_relu_bwd,
                            relu_bwd, adam_update};
  return table;
}

}  // namespace mmw::kernels

#endif
