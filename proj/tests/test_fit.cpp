#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <mmw/common.hpp>
#include <mmw/fit.hpp>
#include <mmw/radar.hpp>
#include <mmw/rng.hpp>

#include "test_util.hpp"

using namespace mmw;

namespace {

int code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const MmwError& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

// Cube big enough for the SSIM window and the feature stack: 20 x 16 planes.
ComplexCube loss_cube(uint64_t seed) {
  RadarConfig cfg;
  cfg.samples_per_chirp = 20;
  cfg.chirps_per_frame = 16;
  cfg.antennas = AntennaLayout{2, 2};
  Scene scene;
  scene.reflectors.push_back({{0.1, 0.45, 0.02}, 1.0});
  scene.reflectors.push_back({{-0.15, 0.6, -0.05}, 0.7});
  Trajectory traj;
  traj.frames = 2;
  return simulate(scene, traj, cfg, seed);
}

InrArch loss_arch(uint32_t frames) {
  InrArch arch;
  arch.frequencies = 2;
  arch.width = 8;
  arch.hidden_layers = 2;
  arch.frames = frames;
  return arch;
}

InrDense random_dense(const InrArch& arch, uint64_t seed) {
  InrParams p = make_params(arch);
  auto g = make_rng(seed, "test.fit.net");
  for (float& v : p.theta) v = float(0.3 * gaussian(g));
  return to_dense(p);
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("energy sampler follows the bin energies") {
  std::vector<double> energy = {400.0, 300.0, 200.0, 100.0, 0.0, 0.0, 0.0, 0.0};
  EnergySampler sampler(energy);
  auto g = make_rng(1, "test.fit.sampler");
  std::vector<size_t> hits(energy.size(), 0);
  const size_t draws = 100000;
  for (size_t i = 0; i < draws; ++i) ++hits[sampler.draw(g)];
  CHECK(hits[4] + hits[5] + hits[6] + hits[7] == 0);
  for (size_t b = 0; b < 4; ++b) {
    double expect = energy[b] / 1000.0;
    CHECK(double(hits[b]) / double(draws) == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("zero total energy falls back to uniform") {
  EnergySampler sampler(std::vector<double>(5, 0.0));
  auto g = make_rng(2, "test.fit.sampler");
  std::vector<size_t> hits(5, 0);
  for (size_t i = 0; i < 50000; ++i) ++hits[sampler.draw(g)];
  for (size_t b = 0; b < 5; ++b)
    CHECK(double(hits[b]) / 50000.0 == doctest::Approx(0.2).epsilon(0.1));

  CHECK(code_of([] {
          EnergySampler s{std::vector<double>{}};
          auto rng = make_rng(0, "test.fit.empty");
          s.draw(rng);
        }) == static_cast<int>(Err::InvalidArgument));
  CHECK(code_of([] { EnergySampler s{std::vector<double>{1.0, -0.5}}; }) ==
        static_cast<int>(Err::InvalidArgument));
}

TEST_CASE("range energy sums magnitudes per bin") {
  ComplexCube cube = ComplexCube::zeros(Dims{1, 3, 2, 1});
  cube.at(0, 0, 0, 0) = {3.0f, 4.0f};
  cube.at(0, 1, 0, 0) = {1.0f, 0.0f};
  cube.at(0, 1, 1, 0) = {0.0f, 2.0f};
  auto energy = range_energy(cube);
  REQUIRE(energy.size() == 3);
  CHECK(energy[0] == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(energy[1] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(energy[2] == 0.0);
}

TEST_CASE("fit target normalizes by the peak magnitude") {
  ComplexCube cube = loss_cube(3);
  FitTarget target = FitTarget::build(cube);
  CHECK(target.scale == doctest::Approx(cube.peak_magnitude()).epsilon(1e-12));
  CHECK(target.norm_peak == doctest::Approx(1.0).epsilon(1e-12));
  double peak = 0.0;
  for (const auto& v : target.values) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));

  FitTarget shared = FitTarget::build_scaled(cube, 2.0 * target.scale);
  CHECK(shared.norm_peak == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(code_of([&] { FitTarget::build_scaled(cube, 0.0); }) ==
        static_cast<int>(Err::InvalidArgument));
}

TEST_CASE("config validation") {
  Dims dims{2, 20, 16, 4};
  FitConfig cfg;
  cfg.batch = 256;
  validate_fit_config(dims, cfg);

  FitConfig bad = cfg;
  bad.epochs = 0;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.batch = 0;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.batch = uint32_t(dims.cells()) + 1;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.lambda_mse = -0.1;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.lambda_ssim = bad.lambda_mse = bad.lambda_perceptual = 0.0;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.energy_fraction = 1.5;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.planes_per_epoch = 0;
  CHECK(code_of([&] { validate_fit_config(dims, bad); }) ==
        static_cast<int>(Err::InvalidArgument));

  // Planes too small for the SSIM window or the feature stack.
  CHECK(code_of([&] { validate_fit_config(Dims{2, 8, 8, 4}, cfg); }) ==
        static_cast<int>(Err::InvalidDims));
}

TEST_CASE("zeroed loss terms report zero and cost nothing") {
  ComplexCube cube = loss_cube(4);
  FitTarget target = FitTarget::build(cube);
  InrDense dense = random_dense(loss_arch(cube.dims().frames), 5);

  FitConfig cfg;
  cfg.batch = 128;
  cfg.lambda_ssim = 0.0;
  cfg.lambda_mse = 1.0;
  cfg.lambda_perceptual = 0.0;
  validate_fit_config(cube.dims(), cfg);

  InstanceLoss a = instance_loss_grad(dense, target, cfg, nullptr, 11, 0);
  CHECK(a.loss.ssim == 0.0);
  CHECK(a.loss.perceptual == 0.0);
  CHECK(a.loss.mse > 0.0);
  CHECK(a.loss.total == doctest::Approx(a.loss.mse).epsilon(1e-15));

  // The perceptual seed only matters when the perceptual term is active.
  PerceptualExtractor px(99);
  InstanceLoss b = instance_loss_grad(dense, target, cfg, &px, 11, 0);
  CHECK(a.loss.total == b.loss.total);
  CHECK(a.grad.theta == b.grad.theta);
  CHECK(a.grad.modulations == b.grad.modulations);

  FitConfig with_perc = cfg;
  with_perc.lambda_perceptual = 0.5;
  CHECK(code_of([&] { instance_loss_grad(dense, target, with_perc, nullptr, 11, 0); }) ==
        static_cast<int>(Err::InvalidArgument));
  InstanceLoss c = instance_loss_grad(dense, target, with_perc, &px, 11, 0);
  CHECK(c.loss.perceptual > 0.0);
}

TEST_CASE("loss and gradient are deterministic in (seed, epoch)") {
  ComplexCube cube = loss_cube(6);
  FitTarget target = FitTarget::build(cube);
  InrDense dense = random_dense(loss_arch(cube.dims().frames), 7);
  PerceptualExtractor px(0);

  FitConfig cfg;
  cfg.batch = 128;
  validate_fit_config(cube.dims(), cfg);

  InstanceLoss a = instance_loss_grad(dense, target, cfg, &px, 21, 3);
  InstanceLoss b = instance_loss_grad(dense, target, cfg, &px, 21, 3);
  CHECK(a.loss.total == b.loss.total);
  CHECK(a.grad.theta == b.grad.theta);
  CHECK(a.grad.modulations == b.grad.modulations);

  InstanceLoss c = instance_loss_grad(dense, target, cfg, &px, 21, 4);
  CHECK(a.loss.total != c.loss.total);
}

TEST_CASE("theta initialization is seeded and bounded by fan-in") {
  InrArch arch = loss_arch(3);
  std::vector<double> t1, t2, t3;
  init_theta(arch, 5, t1);
  init_theta(arch, 5, t2);
  init_theta(arch, 6, t3);
  CHECK(t1 == t2);
  CHECK(t1 != t3);
  REQUIRE(t1.size() == arch.param_count().theta);

  for (const auto& s : arch.layers()) {
    const double bound = std::sqrt(1.0 / double(s.cols));
    for (size_t i = 0; i < s.rows * s.cols + s.rows; ++i) {
      double v = t1[s.w_offset + i];
      CHECK(std::abs(v) <= bound);
    }
  }
}

TEST_CASE("a short fit reduces the loss and is reproducible") {
  ComplexCube cube = loss_cube(8);
  InrArch arch = loss_arch(cube.dims().frames);

  FitConfig cfg;
  cfg.epochs = 40;
  cfg.batch = 256;
  cfg.adam.lr = 3e-3;
  cfg.lambda_ssim = 0.0;
  cfg.lambda_mse = 1.0;
  cfg.lambda_perceptual = 0.0;
  cfg.seed = 9;

  auto [params, report] = fit_instance(cube, arch, cfg);
  REQUIRE(report.losses.size() == cfg.epochs);
  CHECK(report.losses.back().total < report.losses.front().total);
  CHECK(report.final_psnr_db > 0.0);
  CHECK(report.final_mse > 0.0);
  CHECK(report.scale == doctest::Approx(double(cube.peak_magnitude())).epsilon(1e-6));

  auto [params2, report2] = fit_instance(cube, arch, cfg);
  CHECK(params2.theta == params.theta);
  CHECK(params2.modulations == params.modulations);
  CHECK(report2.losses.back().total == report.losses.back().total);

  // The folded-in scale makes sampled values live on the raw cube's scale.
  SamplePlan grid;
  SampleResult s = sample(params, grid, cube.dims());
  double raw_peak = cube.peak_magnitude();
  double fit_peak = s.cube.peak_magnitude();
  CHECK(fit_peak > 0.1 * raw_peak);
  CHECK(fit_peak < 10.0 * raw_peak);

  CHECK(code_of([&] { fit_instance(cube, loss_arch(cube.dims().frames + 1), cfg); }) ==
        static_cast<int>(Err::LengthMismatch));
}

TEST_CASE("fit report csv") {
  auto dir = mmwtest::temp_dir("fitcsv");
  FitReport report;
  report.losses.push_back({0.5, 0.25, 0.125, 0.0625});
  report.losses.push_back({0.25, 0.125, 0.0625, 0.03125});
  report.final_cssim = 0.75;
  report.final_psnr_db = 20.0;
  report.final_mse = 0.01;
  report.scale = 2.0;
  report.wall_seconds = 1.5;

  auto path = dir / "report.csv";
  fit_report_write_csv(report, path);
  std::ifstream is(path);
  std::string line;
  REQUIRE(bool(std::getline(is, line)));
  CHECK(line == "epoch,total,mse,ssim,perceptual");
  REQUIRE(bool(std::getline(is, line)));
  CHECK(line.substr(0, 2) == "0,");
  REQUIRE(bool(std::getline(is, line)));
  CHECK(line.substr(0, 2) == "1,");
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
