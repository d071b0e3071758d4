// SPDX-License-Identifier: Apache-2.0
#include "mmw/common.hpp"
#include "mmw/kernels.hpp"

namespace mmw::kernels {
namespace {

Backend detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
#if defined(__aarch64__)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

Backend& current() {
  static Backend b = detect_best();
  return b;
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current(); }

void set_backend(Backend b) {
  if (!backend_available(b)) fail(Err::InvalidArgument, "kernel backend not available on this cpu");
  current() = b;
}

void reset_backend() { current() = detect_best(); }

const Ops& ops() {
  switch (current()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return avx2_ops();
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return neon_ops();
#endif
    default:
      return scalar_ops();
  }
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

}  // namespace mmw::kernels
