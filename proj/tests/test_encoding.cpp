#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <mmw/encoding.hpp>

using namespace mmw;

TEST_SUITE("encoding") {

TEST_CASE("output dimensions") {
  EncodingConfig cfg;
  CHECK(cfg.output_dim() == 51);
  cfg.input_dim = 4;
  CHECK(cfg.output_dim() == 68);
  cfg.frequencies = 4;
  CHECK(cfg.output_dim() == 36);
}

TEST_CASE("zero coordinates") {
  EncodingConfig cfg{2, 3};
  std::vector<double> zeros(cfg.input_dim, 0.0);
  std::vector<double> out(cfg.output_dim());
  positional_encode(cfg, zeros, out);
  // Passthrough block, then alternating cos/sin blocks.
  for (uint32_t f = 0; f < cfg.frequencies; ++f) {
    for (uint32_t i = 0; i < cfg.input_dim; ++i) {
      CHECK(out[i] == 0.0);
      CHECK(out[cfg.input_dim * (1 + 2 * f) + i] == 1.0);
      CHECK(out[cfg.input_dim * (2 + 2 * f) + i] == 0.0);
    }
  }
}

TEST_CASE("octave layout matches the closed form") {
  EncodingConfig cfg{3, 5};
  std::vector<double> x = {0.13, -0.71, 0.42};
  std::vector<double> out(cfg.output_dim());
  positional_encode(cfg, x, out);
  for (uint32_t i = 0; i < 3; ++i) CHECK(out[i] == x[i]);
  for (uint32_t f = 0; f < cfg.frequencies; ++f) {
    const double w = std::numbers::pi * double(1u << f);
    for (uint32_t i = 0; i < 3; ++i) {
      CHECK(out[3 * (1 + 2 * f) + i] == doctest::Approx(std::cos(w * x[i])).epsilon(1e-15));
      CHECK(out[3 * (2 + 2 * f) + i] == doctest::Approx(std::sin(w * x[i])).epsilon(1e-15));
    }
  }
}

TEST_CASE("cos/sin pairs stay on the unit circle") {
  EncodingConfig cfg{3, 8};
  std::vector<double> x = {0.987, -0.321, 0.5};
  std::vector<double> out(cfg.output_dim());
  positional_encode(cfg, x, out);
  for (uint32_t f = 0; f < cfg.frequencies; ++f) {
    for (uint32_t i = 0; i < 3; ++i) {
      const double c = out[3 * (1 + 2 * f) + i];
      const double s = out[3 * (2 + 2 * f) + i];
      CHECK(c * c + s * s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("encoding is reused verbatim across calls") {
  EncodingConfig cfg{3, 8};
  std::vector<double> x = {0.25, 0.75, -0.125};
  std::vector<double> a(cfg.output_dim()), b(cfg.output_dim());
  positional_encode(cfg, x, a);
  positional_encode(cfg, x, b);
  CHECK(a == b);
}

}  // TEST_SUITE
