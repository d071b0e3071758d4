#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include <mmw/common.hpp>
#include <mmw/rng.hpp>
#include <mmw/ssim.hpp>

using namespace mmw;

namespace {

std::vector<double> random_plane(size_t rows, size_t cols, uint64_t seed, double scale) {
  std::vector<double> p(rows * cols);
  auto g = make_rng(seed, "test.ssim");
  for (double& v : p) v = scale * gaussian(g);
  return p;
}

}  // namespace

TEST_SUITE("ssim") {

TEST_CASE("identical planes score exactly one") {
  auto x = random_plane(16, 20, 1, 3.0);
  CHECK(ssim_plane(x.data(), x.data(), 16, 20, 6.0) == 1.0);

  std::vector<double> zeros(16 * 20, 0.0);
  CHECK(ssim_plane(zeros.data(), zeros.data(), 16, 20, 1.0) == 1.0);
}

TEST_CASE("uniform planes match the closed form") {
  const double c1 = 0.6, c2 = 0.4, L = 1.0;
  std::vector<double> x(14 * 14, c1), y(14 * 14, c2);
  const double C1 = 0.01 * 0.01 * L * L;
  const double want = (2.0 * c1 * c2 + C1) / (c1 * c1 + c2 * c2 + C1);
  CHECK(ssim_plane(x.data(), y.data(), 14, 14, L) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("anti-correlated structure scores negative") {
  size_t n = 16;
  std::vector<double> x(n * n), y(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      x[i * n + j] = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      y[i * n + j] = -x[i * n + j];
    }
  CHECK(ssim_plane(x.data(), y.data(), n, n, 2.0) < 0.0);
}

TEST_CASE("score is symmetric in its arguments") {
  auto x = random_plane(15, 17, 2, 1.0);
  auto y = random_plane(15, 17, 3, 1.0);
  CHECK(ssim_plane(x.data(), y.data(), 15, 17, 4.0) == ssim_plane(y.data(), x.data(), 15, 17, 4.0));
}

TEST_CASE("jointly rescaling planes and dynamic range changes nothing") {
  auto x = random_plane(13, 13, 4, 1.0);
  auto y = random_plane(13, 13, 5, 1.0);
  std::vector<double> x2(x), y2(y);
  for (double& v : x2) v *= 2.0;
  for (double& v : y2) v *= 2.0;
  CHECK(ssim_plane(x.data(), y.data(), 13, 13, 4.0) ==
        ssim_plane(x2.data(), y2.data(), 13, 13, 8.0));
}

TEST_CASE("planes below the window size are rejected") {
  std::vector<double> x(10 * 12, 0.0);
  int code = -1;
  try {
    ssim_plane(x.data(), x.data(), 10, 12, 1.0);
  } catch (const MmwError& e) {
    code = static_cast<int>(e.code());
  }
  CHECK(code == static_cast<int>(Err::InvalidDims));
}

TEST_CASE("gradient matches central finite differences") {
  const size_t rows = 16, cols = 16;
  auto x = random_plane(rows, cols, 6, 1.0);
  auto y = random_plane(rows, cols, 7, 1.0);
  const double L = 4.0;

  std::vector<double> gx;
  const double value = ssim_plane_grad(x.data(), y.data(), rows, cols, L, gx);
  CHECK(value == ssim_plane(x.data(), y.data(), rows, cols, L));
  REQUIRE(gx.size() == rows * cols);

  auto pick = make_rng(8, "test.ssim.pick");
  const double h = 1e-6;
  for (int probe = 0; probe < 24; ++probe) {
    size_t j = uniform_index(pick, rows * cols);
    double keep = x[j];
    x[j] = keep + h;
    double vp = ssim_plane(x.data(), y.data(), rows, cols, L);
    x[j] = keep - h;
    double vm = ssim_plane(x.data(), y.data(), rows, cols, L);
    x[j] = keep;
    double fd = (vp - vm) / (2.0 * h);
    double denom = std::max({std::abs(gx[j]), std::abs(fd), 1e-9});
    CHECK(std::abs(gx[j] - fd) / denom < 1e-5);
  }
}

}  // TEST_SUITE
