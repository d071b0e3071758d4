// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include <json.hpp>

#include "mmw/common.hpp"
#include "mmw/radar.hpp"

namespace mmw {
namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Err::IoFailure, "open for read: " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(Err::ParseError, path.string() + ": " + e.what());
  }
}

void save_json(const json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  os << j.dump(2) << "\n";
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

std::array<double, 3> vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) fail(Err::ParseError, std::string(what) + " must be [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Scene scene_read(const std::filesystem::path& path) {
  json j = load_json(path);
  Scene scene;
  try {
    if (j.contains("room")) {
      scene.room_min = vec3(j["room"].at("min"), "room.min");
      scene.room_max = vec3(j["room"].at("max"), "room.max");
    }
    scene.noise_sigma = j.value("noise_sigma", 0.0);
    for (const auto& r : j.value("reflectors", json::array())) {
      Reflector ref;
      ref.position = vec3(r.at("position"), "reflector.position");
      ref.amplitude = r.value("amplitude", 1.0);
      scene.reflectors.push_back(ref);
    }
  } catch (const json::exception& e) {
    fail(Err::ParseError, path.string() + ": " + e.what());
  }
  scene.validate();
  return scene;
}

void scene_write(const Scene& scene, const std::filesystem::path& path) {
  json j;
  j["room"]["min"] = scene.room_min;
  j["room"]["max"] = scene.room_max;
  j["noise_sigma"] = scene.noise_sigma;
  j["reflectors"] = json::array();
  for (const auto& r : scene.reflectors)
    j["reflectors"].push_back({{"position", r.position}, {"amplitude", r.amplitude}});
  save_json(j, path);
}

Trajectory trajectory_read(const std::filesystem::path& path) {
  json j = load_json(path);
  Trajectory traj;
  try {
    traj.frames = j.at("frames").get<uint32_t>();
    if (j.contains("program")) {
      const json& p = j["program"];
      ActivityParams params;
      if (p.contains("center")) params.center = vec3(p["center"], "program.center");
      params.tracks = p.value("tracks", params.tracks);
      params.spread = p.value("spread", params.spread);
      params.amplitude = p.value("amplitude", params.amplitude);
      params.frequency_hz = p.value("frequency_hz", params.frequency_hz);
      if (p.contains("velocity")) params.velocity = vec3(p["velocity"], "program.velocity");
      params.track_amplitude = p.value("track_amplitude", params.track_amplitude);
      params.frame_interval_s = p.value("frame_interval_s", params.frame_interval_s);
      return activity_program(activity_from_name(p.at("name").get<std::string>()), params,
                              traj.frames, p.value("seed", uint64_t(0)));
    }
    for (const auto& t : j.value("tracks", json::array())) {
      Track track;
      track.amplitude = t.value("amplitude", 1.0);
      for (const auto& pos : t.at("positions")) track.positions.push_back(vec3(pos, "position"));
      traj.tracks.push_back(std::move(track));
    }
  } catch (const json::exception& e) {
    fail(Err::ParseError, path.string() + ": " + e.what());
  }
  traj.validate();
  return traj;
}

void trajectory_write(const Trajectory& traj, const std::filesystem::path& path) {
  json j;
  j["frames"] = traj.frames;
  j["tracks"] = json::array();
  for (const auto& t : traj.tracks) {
    json jt;
    jt["amplitude"] = t.amplitude;
    jt["positions"] = t.positions;
    j["tracks"].push_back(std::move(jt));
  }
  save_json(j, path);
}

RadarConfig radar_config_read(const std::filesystem::path& path) {
  json j = load_json(path);
  RadarConfig cfg;
  try {
    cfg.carrier_hz = j.value("carrier_hz", cfg.carrier_hz);
    cfg.bandwidth_hz = j.value("bandwidth_hz", cfg.bandwidth_hz);
    cfg.samples_per_chirp = j.value("samples_per_chirp", cfg.samples_per_chirp);
    cfg.chirps_per_frame = j.value("chirps_per_frame", cfg.chirps_per_frame);
    cfg.chirp_interval_s = j.value("chirp_interval_s", cfg.chirp_interval_s);
    cfg.frame_rate_hz = j.value("frame_rate_hz", cfg.frame_rate_hz);
    cfg.antennas.azimuth = j.value("azimuth_antennas", cfg.antennas.azimuth);
    cfg.antennas.elevation = j.value("elevation_antennas", cfg.antennas.elevation);
    cfg.element_spacing = j.value("element_spacing", cfg.element_spacing);
  } catch (const json::exception& e) {
    fail(Err::ParseError, path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

void radar_config_write(const RadarConfig& cfg, const std::filesystem::path& path) {
  json j;
  j["carrier_hz"] = cfg.carrier_hz;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["samples_per_chirp"] = cfg.samples_per_chirp;
  j["chirps_per_frame"] = cfg.chirps_per_frame;
  j["chirp_interval_s"] = cfg.chirp_interval_s;
  j["frame_rate_hz"] = cfg.frame_rate_hz;
  j["azimuth_antennas"] = cfg.antennas.azimuth;
  j["elevation_antennas"] = cfg.antennas.elevation;
  j["element_spacing"] = cfg.element_spacing;
  save_json(j, path);
}

}  // namespace mmw
