// SPDX-License-Identifier: Apache-2.0
#include "mmw/radar.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "mmw/common.hpp"
#include "mmw/fft.hpp"
#include "mmw/rng.hpp"
#include "mmw/threading.hpp"

namespace mmw {

void RadarConfig::validate() const {
  if (carrier_hz <= 0 || bandwidth_hz <= 0 || chirp_interval_s <= 0 || frame_rate_hz <= 0 ||
      element_spacing <= 0)
    fail(Err::InvalidArgument, "radar config scalars must be positive");
  if (samples_per_chirp < 2 || chirps_per_frame < 2)
    fail(Err::InvalidDims, "need at least 2 samples per chirp and 2 chirps per frame");
  if (chirps_per_frame % 2 != 0)
    fail(Err::InvalidDims, "chirps_per_frame must be even for a centered doppler axis");
  if (antennas.total() < 1) fail(Err::InvalidDims, "antenna array is empty");
}

void Scene::validate() const {
  for (int i = 0; i < 3; ++i)
    if (!(room_min[i] < room_max[i])) fail(Err::InvalidArgument, "room extent is degenerate");
  if (noise_sigma < 0) fail(Err::InvalidArgument, "noise_sigma must be >= 0");
  for (const auto& ref : reflectors) {
    if (ref.amplitude < 0) fail(Err::InvalidArgument, "reflector amplitude must be >= 0");
    for (int i = 0; i < 3; ++i)
      if (ref.position[i] < room_min[i] || ref.position[i] > room_max[i])
        fail(Err::InvalidArgument, "reflector outside the room extent");
  }
}

void Trajectory::validate() const {
  if (frames < 1) fail(Err::InvalidDims, "trajectory needs at least one frame");
  for (const auto& track : tracks) {
    if (track.positions.size() != frames)
      fail(Err::LengthMismatch, "track length does not match trajectory frame count");
    if (track.amplitude < 0) fail(Err::InvalidArgument, "track amplitude must be >= 0");
  }
}

Activity activity_from_name(const std::string& name) {
  if (name == "still") return Activity::Still;
  if (name == "wave") return Activity::Wave;
  if (name == "walk") return Activity::Walk;
  if (name == "jump") return Activity::Jump;
  fail(Err::InvalidArgument, "unknown activity '" + name + "'");
}

std::string activity_name(Activity a) {
  switch (a) {
    case Activity::Still: return "still";
    case Activity::Wave: return "wave";
    case Activity::Walk: return "walk";
    case Activity::Jump: return "jump";
  }
  return "?";
}

Trajectory activity_program(Activity activity, const ActivityParams& p, uint32_t frames,
                            uint64_t seed) {
  if (frames < 1) fail(Err::InvalidDims, "activity program needs at least one frame");
  if (p.tracks < 1) fail(Err::InvalidArgument, "activity program needs at least one track");
  if (p.frame_interval_s <= 0) fail(Err::InvalidArgument, "frame interval must be positive");

  uint32_t K = p.tracks;
  std::vector<std::array<double, 3>> base(K);
  base[0] = p.center;
  for (uint32_t i = 1; i < K; ++i) {
    auto g = make_rng(seed, "cluster", i);
    for (int ax = 0; ax < 3; ++ax) base[i][ax] = p.center[ax] + uniform(g, -p.spread, p.spread);
  }

  uint32_t moving = activity == Activity::Wave ? std::max(1u, K / 3) : K / 3;
  uint32_t first_moving = K - moving;

  std::array<double, 3> dir{0.0, 0.0, 0.0};
  if (activity == Activity::Walk) {
    double speed = std::sqrt(p.velocity[0] * p.velocity[0] + p.velocity[1] * p.velocity[1] +
                             p.velocity[2] * p.velocity[2]);
    if (speed > 0)
      for (int ax = 0; ax < 3; ++ax) dir[ax] = p.velocity[ax] / speed;
  }

  Trajectory traj;
  traj.frames = frames;
  traj.tracks.resize(K);
  for (uint32_t i = 0; i < K; ++i) {
    traj.tracks[i].amplitude = p.track_amplitude;
    traj.tracks[i].positions.resize(frames);
    for (uint32_t f = 0; f < frames; ++f) {
      double t = f * p.frame_interval_s;
      std::array<double, 3> pos = base[i];
      double osc = p.amplitude * std::sin(2.0 * std::numbers::pi * p.frequency_hz * t);
      switch (activity) {
        case Activity::Still:
          break;
        case Activity::Wave:
          if (i >= first_moving) pos[0] += osc;
          break;
        case Activity::Jump:
          pos[2] += std::fabs(osc);
          break;
        case Activity::Walk:
          for (int ax = 0; ax < 3; ++ax) pos[ax] += p.velocity[ax] * t;
          if (i >= first_moving)
            for (int ax = 0; ax < 3; ++ax) pos[ax] += dir[ax] * osc;
          break;
      }
      traj.tracks[i].positions[f] = pos;
    }
  }
  return traj;
}

namespace {

struct Scatterer {
  std::array<double, 3> position;
  double amplitude;
  double radial_velocity;  // m/s, positive toward the radar
};

void render_frame(std::vector<std::complex<double>>& raw, const std::vector<Scatterer>& scatterers,
                  const RadarConfig& cfg) {
  uint32_t R = cfg.samples_per_chirp;
  uint32_t D = cfg.chirps_per_frame;
  uint32_t A = cfg.antennas.total();
  double Tc = cfg.chirp_interval_s;
  double Ts = Tc / R;
  double slope = cfg.bandwidth_hz / Tc;

  std::vector<std::complex<double>> fast(R), slow(D), ant(A);
  for (const auto& s : scatterers) {
    double range = std::sqrt(s.position[0] * s.position[0] + s.position[1] * s.position[1] +
                             s.position[2] * s.position[2]);
    if (range <= 0.0) fail(Err::InvalidArgument, "scatterer at the radar origin");
    if (range >= cfg.unambiguous_range())
      fail(Err::BeyondRange, "scatterer at " + std::to_string(range) + " m");
    double sin_az = std::sin(std::atan2(s.position[0], s.position[1]));
    double sin_el = s.position[2] / range;

    double f_beat = 2.0 * slope * range / kSpeedOfLight;
    double f_dopp = 2.0 * s.radial_velocity * cfg.carrier_hz / kSpeedOfLight;

    for (uint32_t n = 0; n < R; ++n) {
      double ph = 2.0 * std::numbers::pi * f_beat * n * Ts;
      fast[n] = {std::cos(ph), std::sin(ph)};
    }
    for (uint32_t ci = 0; ci < D; ++ci) {
      double ph = 2.0 * std::numbers::pi * f_dopp * ci * Tc;
      slow[ci] = {std::cos(ph), std::sin(ph)};
    }
    for (uint32_t a = 0; a < A; ++a) {
      bool az = a < cfg.antennas.azimuth;
      double m = az ? a : a - cfg.antennas.azimuth;
      double ph = std::numbers::pi * cfg.element_spacing * m * (az ? sin_az : sin_el);
      ant[a] = {std::cos(ph), std::sin(ph)};
    }
    for (uint32_t n = 0; n < R; ++n)
      for (uint32_t ci = 0; ci < D; ++ci) {
        std::complex<double> base = s.amplitude * fast[n] * slow[ci];
        std::complex<double>* cell = raw.data() + (size_t(n) * D + ci) * A;
        for (uint32_t a = 0; a < A; ++a) cell[a] += base * ant[a];
      }
  }
}

}  // namespace

ComplexCube simulate(const Scene& scene, const Trajectory& traj, const RadarConfig& cfg,
                     uint64_t seed) {
  cfg.validate();
  scene.validate();
  traj.validate();

  uint32_t T = traj.frames;
  uint32_t R = cfg.samples_per_chirp;
  uint32_t D = cfg.chirps_per_frame;
  uint32_t A = cfg.antennas.total();
  Dims dims{T, R, D, A};
  validate_dims(dims);

  double dt = cfg.frame_interval_s();
  // Radial velocity from the range finite difference; last frame reuses the
  // previous delta. Positive when the target closes in.
  auto track_range = [](const Track& tr, uint32_t f) {
    const auto& p = tr.positions[f];
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  };
  std::vector<std::vector<double>> vel(traj.tracks.size());
  for (size_t k = 0; k < traj.tracks.size(); ++k) {
    vel[k].resize(T, 0.0);
    if (T >= 2) {
      for (uint32_t f = 0; f + 1 < T; ++f)
        vel[k][f] = -(track_range(traj.tracks[k], f + 1) - track_range(traj.tracks[k], f)) / dt;
      vel[k][T - 1] = vel[k][T - 2];
    }
  }

  std::vector<std::complex<float>> out(dims.cells());

  parallel_for(T, [&](size_t f) {
    std::vector<Scatterer> scatterers;
    scatterers.reserve(scene.reflectors.size() + traj.tracks.size());
    for (const auto& ref : scene.reflectors) scatterers.push_back({ref.position, ref.amplitude, 0.0});
    for (size_t k = 0; k < traj.tracks.size(); ++k)
      scatterers.push_back(
          {traj.tracks[k].positions[f], traj.tracks[k].amplitude, vel[k][uint32_t(f)]});

    std::vector<std::complex<double>> raw(size_t(R) * D * A, {0.0, 0.0});
    render_frame(raw, scatterers, cfg);

    if (scene.noise_sigma > 0.0) {
      auto g = make_rng(seed, "noise", f);
      double comp_sigma = scene.noise_sigma / std::numbers::sqrt2;
      for (auto& z : raw) {
        double re = comp_sigma * gaussian(g);
        double im = comp_sigma * gaussian(g);
        z += std::complex<double>(re, im);
      }
    }

    // Range FFT along fast time (unshifted), then a centered doppler FFT.
    std::vector<std::complex<double>> line(std::max(R, D));
    for (uint32_t ci = 0; ci < D; ++ci)
      for (uint32_t a = 0; a < A; ++a) {
        for (uint32_t n = 0; n < R; ++n) line[n] = raw[(size_t(n) * D + ci) * A + a];
        dft(line.data(), R);
        for (uint32_t n = 0; n < R; ++n) raw[(size_t(n) * D + ci) * A + a] = line[n];
      }
    for (uint32_t r = 0; r < R; ++r)
      for (uint32_t a = 0; a < A; ++a) {
        for (uint32_t ci = 0; ci < D; ++ci) line[ci] = raw[(size_t(r) * D + ci) * A + a];
        dft(line.data(), D);
        fftshift(line.data(), D);
        for (uint32_t ci = 0; ci < D; ++ci) raw[(size_t(r) * D + ci) * A + a] = line[ci];
      }

    size_t offset = size_t(f) * R * D * A;
    for (size_t i = 0; i < raw.size(); ++i)
      out[offset + i] = {static_cast<float>(raw[i].real()), static_cast<float>(raw[i].imag())};
  });

  return ComplexCube(dims, std::move(out));
}

}  // namespace mmw
