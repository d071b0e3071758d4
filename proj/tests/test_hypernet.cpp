#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include <mmw/common.hpp>
#include <mmw/hypernet.hpp>
#include <mmw/metrics.hpp>
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

// Everything small: the tests exercise wiring, not capacity.
HyperConfig tiny_config(uint32_t frames) {
  HyperConfig cfg;
  cfg.raster_grid = 8;
  cfg.env_latent = 6;
  cfg.pose_dmodel = 6;
  cfg.trunk_width = 10;
  cfg.tracks = 2;
  cfg.arch.frequencies = 2;
  cfg.arch.width = 8;
  cfg.arch.hidden_layers = 2;
  cfg.arch.frames = frames;
  return cfg;
}

RadarConfig tiny_radar() {
  RadarConfig cfg;
  cfg.samples_per_chirp = 20;
  cfg.chirps_per_frame = 16;
  cfg.antennas = AntennaLayout{2, 2};
  return cfg;
}

Scene tiny_scene(double x) {
  Scene scene;
  scene.reflectors.push_back({{x, 0.5, 0.0}, 1.0});
  return scene;
}

Trajectory tiny_trajectory(uint32_t frames, uint32_t tracks, uint64_t seed) {
  Trajectory traj;
  traj.frames = frames;
  auto g = make_rng(seed, "test.hyper.traj");
  for (uint32_t k = 0; k < tracks; ++k) {
    Track tr;
    tr.amplitude = 0.8;
    for (uint32_t f = 0; f < frames; ++f)
      tr.positions.push_back({uniform(g, -0.3, 0.3), uniform(g, 0.4, 0.7), 0.0});
    traj.tracks.push_back(tr);
  }
  return traj;
}

}  // namespace

TEST_SUITE("hypernet") {

TEST_CASE("layout segments tile the weight vector") {
  HyperConfig cfg = tiny_config(3);
  HyperLayout lay(cfg);
  const MatSeg* segs[] = {&lay.c1, &lay.c2,         &lay.fc, &lay.embed,      &lay.q,      &lay.k,
                          &lay.v,  &lay.t1,         &lay.t2, &lay.theta_head, &lay.mod_head};
  size_t expect = 0;
  for (const MatSeg* m : segs) {
    CHECK(m->w_off == expect);
    CHECK(m->b_off == m->w_off + m->rows * m->cols);
    expect = m->end();
  }
  CHECK(expect == lay.total);
  CHECK(lay.theta_head.rows == cfg.arch.param_count().theta);
  CHECK(lay.mod_head.rows == size_t(cfg.arch.hidden_layers) * 2 * cfg.arch.width);
  CHECK(lay.embed.cols == 3 * cfg.tracks);
}

TEST_CASE("config validation bounds") {
  HyperConfig cfg = tiny_config(2);
  cfg.validate();
  HyperConfig bad = cfg;
  bad.raster_grid = 2;
  CHECK(code_of([&] { bad.validate(); }) == static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.env_latent = 0;
  CHECK(code_of([&] { bad.validate(); }) == static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.trunk_width = 0;
  CHECK(code_of([&] { bad.validate(); }) == static_cast<int>(Err::InvalidArgument));
  bad = cfg;
  bad.tracks = 0;
  CHECK(code_of([&] { bad.validate(); }) == static_cast<int>(Err::InvalidArgument));
}

TEST_CASE("rasterize accumulates amplitude at scene positions") {
  Scene scene;  // room x in [-3, 3], y in [0, 6]
  scene.reflectors.push_back({{0.0, 3.0, 0.0}, 1.0});
  scene.reflectors.push_back({{0.0, 3.0, 0.5}, 0.5});   // same (x, y) cell
  scene.reflectors.push_back({{-3.0, 0.0, 0.0}, 2.0});  // low corner
  scene.reflectors.push_back({{2.999, 5.999, 0.0}, 0.25});

  SceneRaster raster = rasterize(scene, 8);
  REQUIRE(raster.cells.size() == 64);
  CHECK(raster.cells[4 * 8 + 4] == 1.5);
  CHECK(raster.cells[0] == 2.0);
  CHECK(raster.cells[7 * 8 + 7] == 0.25);
  double total = 0.0;
  for (double c : raster.cells) total += c;
  CHECK(total == doctest::Approx(3.75).epsilon(1e-12));
}

TEST_CASE("initialization is seeded and keeps head weights small") {
  HyperConfig cfg = tiny_config(3);
  Dims dims{3, 20, 16, 4};
  HyperNetWeights a = hyper_init(cfg, dims, 7);
  HyperNetWeights b = hyper_init(cfg, dims, 7);
  HyperNetWeights c = hyper_init(cfg, dims, 8);
  CHECK(a.w == b.w);
  CHECK(a.w != c.w);
  CHECK(a.output_scale == 1.0);

  HyperLayout lay(cfg);
  auto max_abs_in = [&](const MatSeg& m) {
    double peak = 0.0;
    for (size_t i = m.w_off; i < m.w_off + m.rows * m.cols; ++i)
      peak = std::max(peak, std::abs(a.w[i]));
    return peak;
  };
  CHECK(max_abs_in(lay.t1) <= std::sqrt(1.0 / double(lay.t1.cols)));
  CHECK(max_abs_in(lay.theta_head) <= 0.1 * std::sqrt(1.0 / double(lay.theta_head.cols)));
  CHECK(max_abs_in(lay.mod_head) <= 0.1 * std::sqrt(1.0 / double(lay.mod_head.cols)));

  CHECK(code_of([&] { hyper_init(cfg, Dims{4, 20, 16, 4}, 7); }) ==
        static_cast<int>(Err::InvalidDims));
}

TEST_CASE("zero weights generate the identity network") {
  HyperConfig cfg = tiny_config(2);
  Dims dims{2, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 1);
  std::fill(w.w.begin(), w.w.end(), 0.0);

  HyperForward cache;
  InrDense dense = hyper_forward(w, tiny_scene(0.2), tiny_trajectory(2, cfg.tracks, 3), cache);
  for (double v : dense.theta) CHECK(v == 0.0);
  for (uint32_t f = 0; f < 2; ++f)
    for (uint32_t l = 0; l < cfg.arch.hidden_layers; ++l) {
      const double* gamma = dense.modulations.data() + cfg.arch.mod_offset(f, l);
      for (uint32_t i = 0; i < cfg.arch.width; ++i) {
        CHECK(gamma[i] == 1.0);
        CHECK(gamma[cfg.arch.width + i] == 0.0);
      }
    }
}

TEST_CASE("forward pass is deterministic and attention rows are normalized") {
  HyperConfig cfg = tiny_config(4);
  Dims dims{4, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 5);
  Scene scene = tiny_scene(-0.4);
  Trajectory traj = tiny_trajectory(4, cfg.tracks, 6);

  HyperForward c1, c2;
  InrDense d1 = hyper_forward(w, scene, traj, c1);
  InrDense d2 = hyper_forward(w, scene, traj, c2);
  CHECK(d1.theta == d2.theta);
  CHECK(d1.modulations == d2.modulations);

  REQUIRE(c1.alpha.size() == 16);
  for (uint32_t row = 0; row < 4; ++row) {
    double sum = 0.0;
    for (uint32_t col = 0; col < 4; ++col) sum += c1.alpha[row * 4 + col];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  // A different scene or trajectory must reach the generated parameters.
  HyperForward c3;
  InrDense d3 = hyper_forward(w, tiny_scene(0.8), traj, c3);
  CHECK(d1.theta != d3.theta);
  HyperForward c4;
  InrDense d4 = hyper_forward(w, scene, tiny_trajectory(4, cfg.tracks, 7), c4);
  CHECK(d1.theta != d4.theta);

  CHECK(code_of([&] {
          HyperForward c;
          hyper_forward(w, scene, tiny_trajectory(3, cfg.tracks, 6), c);
        }) == static_cast<int>(Err::InvalidDims));
  CHECK(code_of([&] {
          HyperForward c;
          hyper_forward(w, scene, tiny_trajectory(4, cfg.tracks + 1, 6), c);
        }) == static_cast<int>(Err::InvalidDims));
}

TEST_CASE("gradient matches central finite differences through the whole chain") {
  HyperConfig cfg = tiny_config(2);
  Dims dims{2, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 11);
  Scene scene = tiny_scene(0.3);
  Trajectory traj = tiny_trajectory(2, cfg.tracks, 12);

  // Objective: fixed random linear functional of the generated parameters.
  auto counts = cfg.arch.param_count();
  std::vector<double> gt(counts.theta), gm(counts.modulation);
  auto g = make_rng(13, "test.hyper.obj");
  for (double& v : gt) v = gaussian(g);
  for (double& v : gm) v = gaussian(g);
  auto objective = [&](const HyperNetWeights& weights) {
    HyperForward cache;
    InrDense dense = hyper_forward(weights, scene, traj, cache);
    double L = 0.0;
    for (size_t i = 0; i < gt.size(); ++i) L += gt[i] * dense.theta[i];
    for (size_t i = 0; i < gm.size(); ++i) L += gm[i] * dense.modulations[i];
    return L;
  };

  HyperForward cache;
  hyper_forward(w, scene, traj, cache);
  InrGradient dparams = InrGradient::zeros(cfg.arch);
  dparams.theta = gt;
  dparams.modulations = gm;
  std::vector<double> grad_w(w.w.size(), 0.0);
  hyper_backward(w, cache, dparams, grad_w);

  auto pick = make_rng(14, "test.hyper.pick");
  const double h = 1e-5;
  for (int probe = 0; probe < 60; ++probe) {
    size_t j = uniform_index(pick, w.w.size());
    double keep = w.w[j];
    w.w[j] = keep + h;
    double Lp = objective(w);
    w.w[j] = keep - h;
    double Lm = objective(w);
    w.w[j] = keep;
    double fd = (Lp - Lm) / (2.0 * h);
    double denom = std::max({std::abs(grad_w[j]), std::abs(fd), 1e-8});
    CHECK(std::abs(grad_w[j] - fd) / denom < 1e-4);
  }

  std::vector<double> short_buf(w.w.size() - 1, 0.0);
  CHECK(code_of([&] { hyper_backward(w, cache, dparams, short_buf); }) ==
        static_cast<int>(Err::LengthMismatch));
}

TEST_CASE("generated parameters fold the output scale") {
  HyperConfig cfg = tiny_config(2);
  Dims dims{2, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 15);
  w.output_scale = 3.0;
  Scene scene = tiny_scene(-0.2);
  Trajectory traj = tiny_trajectory(2, cfg.tracks, 16);

  HyperForward cache;
  InrDense unscaled = hyper_forward(w, scene, traj, cache);
  InrParams generated = hyper_generate(w, scene, traj);
  InrDense folded = to_dense(generated);

  InrScratch scratch;
  const double spatial[3] = {0.3, 0.7, 0.5};
  for (uint32_t f = 0; f < 2; ++f) {
    std::complex<double> raw = inr_forward(unscaled, spatial, f, scratch);
    std::complex<double> scaled = inr_forward(folded, spatial, f, scratch);
    CHECK(scaled.real() == doctest::Approx(3.0 * raw.real()).epsilon(1e-5));
    CHECK(scaled.imag() == doctest::Approx(3.0 * raw.imag()).epsilon(1e-5));
  }

  SamplePlan grid;
  SampleResult via_params = sample(generated, grid, dims);
  SampleResult direct = generate_signal(w, scene, traj, grid);
  CHECK(mmwtest::cubes_bitwise_equal(via_params.cube, direct.cube));
  CHECK(direct.points_emitted == dims.cells());
}

TEST_CASE("weights file round-trips bitwise") {
  auto dir = mmwtest::temp_dir("hyper");
  HyperConfig cfg = tiny_config(3);
  Dims dims{3, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 17);
  w.output_scale = 2.5;

  auto path = dir / "net.mmwh";
  hyper_write(w, path);
  HyperNetWeights r = hyper_read(path);
  CHECK(r.cfg.raster_grid == cfg.raster_grid);
  CHECK(r.cfg.env_latent == cfg.env_latent);
  CHECK(r.cfg.pose_dmodel == cfg.pose_dmodel);
  CHECK(r.cfg.trunk_width == cfg.trunk_width);
  CHECK(r.cfg.tracks == cfg.tracks);
  CHECK(r.cfg.arch.frames == cfg.arch.frames);
  CHECK((r.base_dims == dims));
  CHECK(r.output_scale == 2.5);
  REQUIRE(r.w.size() == w.w.size());
  // Storage is float32; the first read is already on the f32 lattice.
  for (size_t i = 0; i < w.w.size(); ++i) CHECK(r.w[i] == double(float(w.w[i])));

  auto path2 = dir / "net2.mmwh";
  hyper_write(r, path2);
  CHECK(mmwtest::read_file_bytes(path) == mmwtest::read_file_bytes(path2));
  std::filesystem::remove_all(dir);
}

TEST_CASE("weights reader rejects damaged files") {
  auto dir = mmwtest::temp_dir("hyperbad");
  HyperConfig cfg = tiny_config(2);
  Dims dims{2, 20, 16, 4};
  HyperNetWeights w = hyper_init(cfg, dims, 18);
  auto path = dir / "net.mmwh";
  hyper_write(w, path);
  auto bytes = mmwtest::read_file_bytes(path);

  auto patched = [&](size_t off, char v) {
    auto copy = bytes;
    copy[off] = v;
    auto bad = dir / "bad.mmwh";
    std::ofstream os(bad, std::ios::binary);
    os.write(copy.data(), std::streamsize(copy.size()));
    os.close();
    return bad;
  };

  CHECK(code_of([&] { hyper_read(patched(0, 'Z')); }) == static_cast<int>(Err::BadMagic));
  CHECK(code_of([&] { hyper_read(patched(4, 9)); }) == static_cast<int>(Err::VersionMismatch));
  CHECK(code_of([&] { hyper_read(patched(28, 7)); }) == static_cast<int>(Err::ParseError));
  {
    auto bad = dir / "short.mmwh";
    std::ofstream os(bad, std::ios::binary);
    os.write(bytes.data(), std::streamsize(bytes.size() - 2));
  }
  CHECK(code_of([&] { hyper_read(dir / "short.mmwh"); }) ==
        static_cast<int>(Err::TruncatedPayload));
  CHECK(code_of([&] { hyper_read(dir / "absent.mmwh"); }) == static_cast<int>(Err::IoFailure));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a short training run is deterministic and sets the output scale") {
  RadarConfig radar = tiny_radar();
  HyperConfig cfg = tiny_config(2);
  Dims base{2, radar.samples_per_chirp, radar.chirps_per_frame, radar.antennas.total()};

  std::vector<DatasetItem> dataset;
  for (int i = 0; i < 2; ++i) {
    Scene scene = tiny_scene(i == 0 ? 0.25 : -0.35);
    Trajectory traj = tiny_trajectory(2, cfg.tracks, 20 + uint64_t(i));
    ComplexCube cube = simulate(scene, traj, radar, 30 + uint64_t(i));
    dataset.push_back({std::move(scene), std::move(traj), std::move(cube)});
  }

  HyperTrainConfig tc;
  tc.epochs = 4;
  tc.batch = 128;
  tc.lambda_ssim = 0.0;
  tc.lambda_mse = 1.0;
  tc.lambda_perceptual = 0.0;
  tc.seed = 21;
  tc.adam.lr = 1e-3;

  HyperNetWeights w1 = hyper_init(cfg, base, 22);
  HyperTrainReport r1 = hyper_train(w1, dataset, tc);
  REQUIRE(r1.losses.size() == tc.epochs);

  HyperNetWeights w2 = hyper_init(cfg, base, 22);
  HyperTrainReport r2 = hyper_train(w2, dataset, tc);
  CHECK(w1.w == w2.w);
  CHECK(r1.losses.back().total == r2.losses.back().total);

  double peak = 0.0;
  for (const auto& item : dataset) peak = std::max(peak, double(item.cube.peak_magnitude()));
  CHECK(w1.output_scale == doctest::Approx(peak).epsilon(1e-12));

  CHECK(code_of([&] {
          std::vector<DatasetItem> empty;
          hyper_train(w1, empty, tc);
        }) == static_cast<int>(Err::InvalidArgument));
}

TEST_CASE("dataset manifest loading") {
  auto dir = mmwtest::temp_dir("dataset");
  RadarConfig radar = tiny_radar();
  Scene scene = tiny_scene(0.1);
  Trajectory traj = tiny_trajectory(2, 2, 40);
  ComplexCube cube = simulate(scene, traj, radar, 41);

  scene_write(scene, dir / "scene.json");
  trajectory_write(traj, dir / "traj.json");
  cube_write(cube, dir / "cube.mmwc");
  {
    std::ofstream os(dir / "manifest.json");
    os << "{\"items\":[{\"scene\":\"scene.json\",\"trajectory\":\"traj.json\","
          "\"cube\":\"cube.mmwc\"}]}\n";
  }

  auto items = dataset_read(dir / "manifest.json");
  REQUIRE(items.size() == 1);
  CHECK(items[0].scene.reflectors.size() == scene.reflectors.size());
  CHECK(items[0].trajectory.frames == traj.frames);
  CHECK(mmwtest::cubes_bitwise_equal(items[0].cube, cube));

  {
    std::ofstream os(dir / "empty.json");
    os << "{\"items\":[]}\n";
  }
  CHECK(code_of([&] { dataset_read(dir / "empty.json"); }) == static_cast<int>(Err::ParseError));
  {
    std::ofstream os(dir / "nokey.json");
    os << "{\"items\":[{\"scene\":\"scene.json\"}]}\n";
  }
  CHECK(code_of([&] { dataset_read(dir / "nokey.json"); }) == static_cast<int>(Err::ParseError));
  {
    std::ofstream os(dir / "garbage.json");
    os << "not json\n";
  }
  CHECK(code_of([&] { dataset_read(dir / "garbage.json"); }) == static_cast<int>(Err::ParseError));
  CHECK(code_of([&] { dataset_read(dir / "absent.json"); }) == static_cast<int>(Err::IoFailure));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
