// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mmw {

enum class Err {
  BadMagic,
  VersionMismatch,
  TruncatedPayload,
  DimOverflow,
  InvalidDims,
  LengthMismatch,
  NonFinite,
  InvalidArgument,
  IoFailure,
  BeyondRange,
  BadPlane,
  ParseError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::BadMagic: return "bad magic";
    case Err::VersionMismatch: return "version mismatch";
    case Err::TruncatedPayload: return "truncated payload";
    case Err::DimOverflow: return "dimension overflow";
    case Err::InvalidDims: return "invalid dimensions";
    case Err::LengthMismatch: return "length mismatch";
    case Err::NonFinite: return "non-finite value";
    case Err::InvalidArgument: return "invalid argument";
    case Err::IoFailure: return "i/o failure";
    case Err::BeyondRange: return "beyond unambiguous range";
    case Err::BadPlane: return "plane unavailable";
    case Err::ParseError: return "parse error";
  }
  return "unknown";
}

class MmwError : public std::runtime_error {
 public:
  MmwError(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw MmwError(code, what); }

// Little-endian scalar i/o. Files are byte-identical across platforms.
inline void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) fail(Err::TruncatedPayload, "u32 field");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

inline void put_f32(std::ostream& os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}

inline float get_f32(std::istream& is) {
  uint32_t u = get_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

inline void put_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u32(os, static_cast<uint32_t>(u));
  put_u32(os, static_cast<uint32_t>(u >> 32));
}

inline double get_f64(std::istream& is) {
  uint64_t lo = get_u32(is);
  uint64_t hi = get_u32(is);
  uint64_t u = lo | hi << 32;
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void put_magic(std::ostream& os, const char m[4]) { os.write(m, 4); }

inline void expect_magic(std::istream& is, const char m[4], const char* what) {
  char b[4];
  if (!is.read(b, 4)) fail(Err::TruncatedPayload, what);
  if (std::memcmp(b, m, 4) != 0) fail(Err::BadMagic, what);
}

}  // namespace mmw
