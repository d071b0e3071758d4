// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmw/antenna.hpp"
#include "mmw/cube.hpp"

namespace mmw {

inline constexpr double kSpeedOfLight = 299792458.0;

// Sawtooth FMCW front end. Chirps occupy the full repetition interval, so the
// ADC period is chirp_interval_s / samples_per_chirp.
struct RadarConfig {
  double carrier_hz = 79e9;
  double bandwidth_hz = 3.41e9;
  uint32_t samples_per_chirp = 64;   // range bins
  uint32_t chirps_per_frame = 32;    // doppler bins
  double chirp_interval_s = 100e-6;
  double frame_rate_hz = 10.0;
  AntennaLayout antennas{8, 4};
  double element_spacing = 1.0;      // in half wavelengths

  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth_hz); }
  double unambiguous_range() const { return samples_per_chirp * range_resolution(); }
  double frame_interval_s() const { return 1.0 / frame_rate_hz; }
  // Doppler bin width in m/s: one cycle across the frame's chirps.
  double velocity_resolution() const {
    return kSpeedOfLight / (2.0 * carrier_hz * chirp_interval_s * chirps_per_frame);
  }
  void validate() const;
};

struct Reflector {
  std::array<double, 3> position{};  // x right, y boresight, z up (meters)
  double amplitude = 1.0;
};

struct Scene {
  std::array<double, 3> room_min{-3.0, 0.0, -1.5};
  std::array<double, 3> room_max{3.0, 6.0, 1.5};
  double noise_sigma = 0.0;
  std::vector<Reflector> reflectors;
  void validate() const;
};

// One moving scatterer: a position per frame plus a reflectivity.
struct Track {
  double amplitude = 1.0;
  std::vector<std::array<double, 3>> positions;
};

struct Trajectory {
  uint32_t frames = 0;
  std::vector<Track> tracks;  // may be empty (static or empty scene)
  void validate() const;      // every track must span exactly `frames`
};

enum class Activity { Still, Wave, Walk, Jump };
Activity activity_from_name(const std::string& name);
std::string activity_name(Activity a);

struct ActivityParams {
  std::array<double, 3> center{0.0, 2.0, 0.0};
  uint32_t tracks = 6;
  double spread = 0.4;            // cluster half-extent around center
  double amplitude = 0.3;         // oscillation amplitude (wave/jump/limbs)
  double frequency_hz = 1.0;
  std::array<double, 3> velocity{0.0, -1.0, 0.0};  // walk only
  double track_amplitude = 1.0;   // reflectivity of each track
  double frame_interval_s = 0.1;
};

// Deterministic scatterer-cluster generator. Track 0 sits at the center;
// the rest are seeded offsets within +-spread. Wave oscillates the last
// max(1, K/3) tracks laterally, jump bounces every track vertically, walk
// translates the cluster and swings the last K/3 tracks along the heading.
Trajectory activity_program(Activity activity, const ActivityParams& params, uint32_t frames,
                            uint64_t seed);

// Renders (frames, samples_per_chirp, chirps_per_frame, antennas) after the
// range FFT (no shift) and doppler FFT (zero-centered). Track radial velocity
// is the per-frame finite difference of range; approaching targets land above
// the doppler center. Complex noise has E|n|^2 = noise_sigma^2. Throws
// MmwError(BeyondRange) when a scatterer reaches the unambiguous span.
ComplexCube simulate(const Scene& scene, const Trajectory& traj, const RadarConfig& cfg,
                     uint64_t seed);

struct PointCloud {
  std::vector<std::array<double, 3>> points;
};

// Thresholded peaks of the angle-angle-range volume V(r, az, el) =
// max_doppler |AzDFT| * |ElDFT| (both zero-padded to angle_bins, shifted).
// Cells within threshold_db of the volume peak become Cartesian points.
// An all-zero cube yields an empty cloud.
PointCloud extract_pointcloud(const ComplexCube& cube, uint32_t frame, double threshold_db,
                              const RadarConfig& cfg, uint32_t angle_bins = 32);

// JSON codecs. Readers throw MmwError(ParseError) on malformed input and
// run validate() on the result.
Scene scene_read(const std::filesystem::path& path);
void scene_write(const Scene& scene, const std::filesystem::path& path);
Trajectory trajectory_read(const std::filesystem::path& path);
void trajectory_write(const Trajectory& traj, const std::filesystem::path& path);
RadarConfig radar_config_read(const std::filesystem::path& path);
void radar_config_write(const RadarConfig& cfg, const std::filesystem::path& path);

}  // namespace mmw
