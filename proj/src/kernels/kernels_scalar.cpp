// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "mmw/kernels.hpp"

namespace mmw::kernels {
namespace {

void matvec(const double* W, const double* x, const double* b, double* y, size_t rows,
            size_t cols) {
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    double acc = 0.0;
    for (size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[r] = b ? b[r] + acc : acc;
  }
}

void matvec_t_acc(const double* W, const double* dy, double* gx, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    double d = dy[r];
    for (size_t j = 0; j < cols; ++j) gx[j] += row[j] * d;
  }
}

void ger_acc(const double* dy, const double* x, double* G, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) {
    double d = dy[r];
    double* row = G + r * cols;
    for (size_t j = 0; j < cols; ++j) row[j] += d * x[j];
  }
}

void axpy(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_sq(const double* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double max_abs(const double* x, size_t n) {
  double m = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

void relu(const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void film_relu(const double* pre, const double* gamma, const double* beta, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double v = gamma[i] * pre[i] + beta[i];
    y[i] = v > 0.0 ? v : 0.0;
  }
}

void film_relu_bwd(const double* dh, const double* pre, const double* gamma, const double* beta,
                   double* dpre, double* dgamma, double* dbeta, size_t n) {
  for (size_t i = 0; i < n; ++i) {
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
  for (size_t i = 0; i < n; ++i) dpre[i] = pre[i] > 0.0 ? dh[i] : 0.0;
}

void adam_update(double* p, const double* g, double* m, double* v, size_t n, double lr,
                 double beta1, double beta2, double eps, double inv_bc1, double inv_bc2) {
  for (size_t i = 0; i < n; ++i) {
    double gi = g[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
    v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
    double mhat = m[i] * inv_bc1;
    double vhat = v[i] * inv_bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {matvec,  matvec_t_acc, ger_acc,  axpy,     dot,
                            sum_sq,  max_abs,      relu,     film_relu, film_relu_bwd,
                            relu_bwd, adam_update};
  return table;
}

}  // namespace mmw::kernels
