// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "mmw/common.hpp"
#include "mmw/radar.hpp"
#include "mmw/threading.hpp"
#include "test_util.hpp"

using namespace mmw;
using namespace mmwtest;

namespace {

RadarConfig small_cfg() {
  RadarConfig cfg;
  cfg.samples_per_chirp = 32;
  cfg.chirps_per_frame = 16;
  cfg.antennas = {4, 4};
  return cfg;
}

// Position at a given range bin and azimuth/elevation angle (degrees).
std::array<double, 3> place(const RadarConfig& cfg, double range_bin, double az_deg,
                            double el_deg) {
  double r = range_bin * cfg.range_resolution();
  double az = az_deg * std::numbers::pi / 180.0;
  double el = el_deg * std::numbers::pi / 180.0;
  return {r * std::sin(az) * std::cos(el), r * std::cos(az) * std::cos(el), r * std::sin(el)};
}

uint32_t argmax_range(const ComplexCube& cube, uint32_t frame) {
  const Dims& d = cube.dims();
  uint32_t best = 0;
  double best_v = -1.0;
  for (uint32_t r = 0; r < d.range; ++r) {
    double acc = 0.0;
    for (uint32_t dd = 0; dd < d.doppler; ++dd)
      for (uint32_t a = 0; a < d.antennas; ++a) acc += std::abs(cube.at(frame, r, dd, a));
    if (acc > best_v) {
      best_v = acc;
      best = r;
    }
  }
  return best;
}

uint32_t argmax_doppler(const ComplexCube& cube, uint32_t frame, uint32_t r) {
  const Dims& d = cube.dims();
  uint32_t best = 0;
  double best_v = -1.0;
  for (uint32_t dd = 0; dd < d.doppler; ++dd) {
    double acc = 0.0;
    for (uint32_t a = 0; a < d.antennas; ++a) acc += std::abs(cube.at(frame, r, dd, a));
    if (acc > best_v) {
      best_v = acc;
      best = dd;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("config arithmetic") {
  RadarConfig cfg;
  CHECK(cfg.range_resolution() == doctest::Approx(0.0439578).epsilon(1e-4));
  CHECK(cfg.unambiguous_range() == doctest::Approx(64 * cfg.range_resolution()));
  CHECK(cfg.velocity_resolution() == doctest::Approx(0.593) .epsilon(1e-3));
  CHECK_NOTHROW(cfg.validate());
  cfg.chirps_per_frame = 15;
  CHECK_THROWS_AS(cfg.validate(), MmwError);
}

TEST_CASE("validation errors") {
  Scene scene;
  scene.reflectors.push_back({{0.0, 10.0, 0.0}, 1.0});  // outside default room (y max 6)
  CHECK_THROWS_AS(scene.validate(), MmwError);
  scene.reflectors.clear();
  scene.noise_sigma = -1.0;
  CHECK_THROWS_AS(scene.validate(), MmwError);

  Trajectory traj;
  traj.frames = 3;
  traj.tracks.push_back({1.0, {{0, 1, 0}, {0, 1, 0}}});  // 2 positions, 3 frames
  CHECK_THROWS_AS(traj.validate(), MmwError);
}

TEST_CASE("static scene renders identical frames, deterministically") {
  auto cfg = small_cfg();
  Scene scene;
  scene.reflectors.push_back({{0.2, 0.8, 0.1}, 1.0});
  scene.reflectors.push_back({{-0.3, 1.0, -0.1}, 0.7});
  Trajectory traj;
  traj.frames = 3;

  auto a = simulate(scene, traj, cfg, 0);
  auto b = simulate(scene, traj, cfg, 0);
  CHECK(cubes_bitwise_equal(a, b));
  CHECK((a.dims() == Dims{3, 32, 16, 8}));
  for (uint32_t f = 1; f < 3; ++f)
    for (uint32_t r = 0; r < 32; ++r)
      for (uint32_t d = 0; d < 16; ++d)
        for (uint32_t an = 0; an < 8; ++an) CHECK(a.at(f, r, d, an) == a.at(0, r, d, an));
}

TEST_CASE("thread count does not change the bytes") {
  auto cfg = small_cfg();
  Scene scene;
  scene.noise_sigma = 0.5;
  scene.reflectors.push_back({{0.2, 0.9, 0.0}, 1.0});
  Trajectory traj;
  traj.frames = 4;

  set_max_threads(1);
  auto a = simulate(scene, traj, cfg, 9);
  set_max_threads(4);
  auto b = simulate(scene, traj, cfg, 9);
  set_max_threads(0);
  CHECK(cubes_bitwise_equal(a, b));

  // Distinct seeds must decorrelate the noise.
  auto c = simulate(scene, traj, cfg, 10);
  CHECK(!cubes_bitwise_equal(a, c));
}

TEST_CASE("range peak sits on the round-trip bin") {
  auto cfg = small_cfg();
  for (double bin : {5.0, 13.0, 20.5, 27.0}) {
    Scene scene;
    scene.reflectors.push_back({place(cfg, bin, 8.0, -3.0), 1.0});
    Trajectory traj;
    traj.frames = 1;
    auto cube = simulate(scene, traj, cfg, 0);
    auto peak = argmax_range(cube, 0);
    CHECK(std::abs(double(peak) - bin) <= 1.0);
  }
}

TEST_CASE("static targets land on the doppler center, closing targets above it") {
  auto cfg = small_cfg();
  Scene scene;
  scene.reflectors.push_back({place(cfg, 20.0, 0.0, 0.0), 1.0});
  Trajectory traj;
  traj.frames = 2;
  auto cube = simulate(scene, traj, cfg, 0);
  CHECK(argmax_doppler(cube, 0, argmax_range(cube, 0)) == cfg.chirps_per_frame / 2);

  // A track closing at exactly two doppler bins of radial speed.
  double v = 2.0 * cfg.velocity_resolution();
  double dt = cfg.frame_interval_s();
  Track tr;
  tr.amplitude = 1.0;
  double y0 = 1.2;
  for (uint32_t f = 0; f < 4; ++f) tr.positions.push_back({0.0, y0 - v * dt * f, 0.0});
  Trajectory moving;
  moving.frames = 4;
  moving.tracks.push_back(tr);
  Scene empty;
  auto mc = simulate(empty, moving, cfg, 0);
  uint32_t dbin = argmax_doppler(mc, 0, argmax_range(mc, 0));
  CHECK(std::abs(int(dbin) - int(cfg.chirps_per_frame / 2 + 2)) <= 1);
}

TEST_CASE("azimuth phase progression matches the steering angle") {
  auto cfg = small_cfg();
  double az_deg = 17.0;
  Scene scene;
  scene.reflectors.push_back({place(cfg, 14.0, az_deg, 5.0), 1.0});
  Trajectory traj;
  traj.frames = 1;
  auto cube = simulate(scene, traj, cfg, 0);
  uint32_t r = argmax_range(cube, 0);
  uint32_t d = cfg.chirps_per_frame / 2;
  double want = std::numbers::pi * cfg.element_spacing *
                std::sin(az_deg * std::numbers::pi / 180.0);
  for (uint32_t a = 0; a + 1 < cfg.antennas.azimuth; ++a) {
    std::complex<double> z0(cube.at(0, r, d, a).real(), cube.at(0, r, d, a).imag());
    std::complex<double> z1(cube.at(0, r, d, a + 1).real(), cube.at(0, r, d, a + 1).imag());
    CHECK(std::arg(z1 * std::conj(z0)) == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("superposition: two reflectors equal the sum of singles") {
  auto cfg = small_cfg();
  Scene s1, s2, both;
  s1.reflectors.push_back({place(cfg, 10.0, 5.0, 2.0), 1.0});
  s2.reflectors.push_back({place(cfg, 22.0, -12.0, -4.0), 0.6});
  both.reflectors = {s1.reflectors[0], s2.reflectors[0]};
  Trajectory traj;
  traj.frames = 1;
  auto c1 = simulate(s1, traj, cfg, 0);
  auto c2 = simulate(s2, traj, cfg, 0);
  auto cb = simulate(both, traj, cfg, 0);
  double peak = cb.peak_magnitude();
  for (size_t i = 0; i < cb.data().size(); ++i) {
    std::complex<double> want =
        std::complex<double>(c1.data()[i].real(), c1.data()[i].imag()) +
        std::complex<double>(c2.data()[i].real(), c2.data()[i].imag());
    std::complex<double> got(cb.data()[i].real(), cb.data()[i].imag());
    CHECK(std::abs(got - want) <= 1e-3 * peak);
  }
}

TEST_CASE("amplitude scales the cube linearly") {
  auto cfg = small_cfg();
  Scene a, b;
  a.reflectors.push_back({place(cfg, 15.0, 3.0, 1.0), 0.5});
  b.reflectors.push_back({place(cfg, 15.0, 3.0, 1.0), 1.0});
  Trajectory traj;
  traj.frames = 1;
  auto ca = simulate(a, traj, cfg, 0);
  auto cb = simulate(b, traj, cfg, 0);
  double peak = cb.peak_magnitude();
  for (size_t i = 0; i < ca.data().size(); ++i) {
    CHECK(std::abs(2.0 * double(ca.data()[i].real()) - cb.data()[i].real()) <= 1e-5 * peak);
    CHECK(std::abs(2.0 * double(ca.data()[i].imag()) - cb.data()[i].imag()) <= 1e-5 * peak);
  }
}

TEST_CASE("out-of-span and degenerate scatterers are refused") {
  auto cfg = small_cfg();
  Scene scene;
  scene.reflectors.push_back({{0.0, cfg.unambiguous_range() + 0.1, 0.0}, 1.0});
  Trajectory traj;
  traj.frames = 1;
  try {
    simulate(scene, traj, cfg, 0);
    CHECK(false);
  } catch (const MmwError& e) {
    CHECK(e.code() == Err::BeyondRange);
  }

  Scene origin;
  origin.reflectors.push_back({{0.0, 0.0, 0.0}, 1.0});
  CHECK_THROWS_AS(simulate(origin, traj, cfg, 0), MmwError);
}

TEST_CASE("noise power tracks sigma") {
  auto cfg = small_cfg();
  Scene scene;
  scene.noise_sigma = 1.0;
  Trajectory traj;
  traj.frames = 2;
  auto cube = simulate(scene, traj, cfg, 3);
  // DFT over R then D multiplies white-noise power by R*D. Average |z|^2
  // should be near sigma^2 * R * D.
  double acc = 0.0;
  for (const auto& z : cube.data()) acc += double(z.real()) * z.real() + double(z.imag()) * z.imag();
  acc /= double(cube.data().size());
  double want = 1.0 * cfg.samples_per_chirp * cfg.chirps_per_frame;
  CHECK(acc == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("activity programs are deterministic and shaped as advertised") {
  ActivityParams p;
  p.center = {0.0, 2.0, 0.0};
  p.tracks = 6;
  auto still = activity_program(Activity::Still, p, 5, 1);
  CHECK(still.frames == 5);
  CHECK(still.tracks.size() == 6);
  CHECK((still.tracks[0].positions[0] == p.center));
  for (const auto& tr : still.tracks)
    for (uint32_t f = 1; f < 5; ++f) CHECK(tr.positions[f] == tr.positions[0]);

  auto again = activity_program(Activity::Still, p, 5, 1);
  for (size_t k = 0; k < 6; ++k) CHECK(again.tracks[k].positions == still.tracks[k].positions);
  auto other = activity_program(Activity::Still, p, 5, 2);
  bool all_same = true;
  for (size_t k = 1; k < 6; ++k)
    if (other.tracks[k].positions != still.tracks[k].positions) all_same = false;
  CHECK(!all_same);

  // Walk translates the anchor track by velocity * t exactly.
  p.velocity = {0.0, -0.5, 0.0};
  p.frame_interval_s = 0.1;
  auto walk = activity_program(Activity::Walk, p, 4, 1);
  for (uint32_t f = 0; f < 4; ++f) {
    CHECK(walk.tracks[0].positions[f][1] ==
          doctest::Approx(2.0 - 0.5 * 0.1 * f).epsilon(1e-12));
  }

  // Wave moves only the trailing third of the cluster.
  p.frequency_hz = 2.0;
  auto wave = activity_program(Activity::Wave, p, 6, 1);
  uint32_t moving = std::max(1u, p.tracks / 3);
  for (uint32_t k = 0; k < p.tracks - moving; ++k)
    for (uint32_t f = 1; f < 6; ++f)
      CHECK(wave.tracks[k].positions[f] == wave.tracks[k].positions[0]);
  bool some_moved = false;
  for (uint32_t k = p.tracks - moving; k < p.tracks; ++k)
    for (uint32_t f = 1; f < 6; ++f)
      if (wave.tracks[k].positions[f] != wave.tracks[k].positions[0]) some_moved = true;
  CHECK(some_moved);

  CHECK(activity_from_name("jump") == Activity::Jump);
  CHECK(activity_name(Activity::Walk) == "walk");
  CHECK_THROWS_AS(activity_from_name("swim"), MmwError);
}

TEST_CASE("json codecs roundtrip") {
  auto dir = temp_dir("sim-json");
  Scene scene;
  scene.noise_sigma = 0.25;
  scene.reflectors.push_back({{0.1, 1.0, -0.2}, 0.9});
  scene_write(scene, dir / "scene.json");
  auto scene2 = scene_read(dir / "scene.json");
  CHECK(scene2.noise_sigma == scene.noise_sigma);
  REQUIRE(scene2.reflectors.size() == 1);
  CHECK(scene2.reflectors[0].position == scene.reflectors[0].position);
  CHECK(scene2.reflectors[0].amplitude == scene.reflectors[0].amplitude);

  Trajectory traj;
  traj.frames = 2;
  traj.tracks.push_back({0.8, {{0, 1, 0}, {0, 1.1, 0}}});
  trajectory_write(traj, dir / "traj.json");
  auto traj2 = trajectory_read(dir / "traj.json");
  CHECK(traj2.frames == 2);
  REQUIRE(traj2.tracks.size() == 1);
  CHECK(traj2.tracks[0].positions == traj.tracks[0].positions);

  auto cfg = small_cfg();
  radar_config_write(cfg, dir / "radar.json");
  auto cfg2 = radar_config_read(dir / "radar.json");
  CHECK(cfg2.samples_per_chirp == 32);
  CHECK((cfg2.antennas == AntennaLayout{4, 4}));

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(scene_read(dir / "bad.json"), MmwError);
  CHECK_THROWS_AS(trajectory_read(dir / "bad.json"), MmwError);
  CHECK_THROWS_AS(radar_config_read(dir / "bad.json"), MmwError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory programs parse from json") {
  auto dir = temp_dir("sim-prog");
  std::ofstream(dir / "prog.json")
      << R"({"frames": 4, "program": {"name": "walk", "seed": 3, "center": [0.0, 2.0, 0.0],)"
      << R"( "tracks": 4, "velocity": [0.0, -0.4, 0.0], "frame_interval_s": 0.1}})";
  auto traj = trajectory_read(dir / "prog.json");
  CHECK(traj.frames == 4);
  CHECK(traj.tracks.size() == 4);
  CHECK(traj.tracks[0].positions[3][1] == doctest::Approx(2.0 - 0.4 * 0.3).epsilon(1e-12));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
