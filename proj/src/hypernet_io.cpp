// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mmw/common.hpp"
#include "mmw/hypernet.hpp"

namespace mmw {

namespace {
constexpr char kMagic[4] = {'M', 'M', 'W', 'H'};
constexpr uint32_t kVersion = 1;
}  // namespace

void hyper_write(const HyperNetWeights& weights, const std::filesystem::path& path) {
  weights.cfg.validate();
  validate_dims(weights.base_dims);
  HyperLayout lay(weights.cfg);
  if (weights.w.size() != lay.total) fail(Err::LengthMismatch, "hypernet weight vector size");
  if (!std::isfinite(weights.output_scale) || weights.output_scale <= 0.0)
    fail(Err::InvalidArgument, "output_scale must be finite and positive");
  for (double v : weights.w)
    if (!std::isfinite(v)) fail(Err::NonFinite, "hypernet weights");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  put_magic(os, kMagic);
  put_u32(os, kVersion);
  put_u32(os, weights.cfg.raster_grid);
  put_u32(os, weights.cfg.env_latent);
  put_u32(os, weights.cfg.pose_dmodel);
  put_u32(os, weights.cfg.trunk_width);
  put_u32(os, weights.cfg.tracks);
  put_u32(os, static_cast<uint32_t>(weights.cfg.arch.variant));
  put_u32(os, weights.cfg.arch.frequencies);
  put_u32(os, weights.cfg.arch.width);
  put_u32(os, weights.cfg.arch.hidden_layers);
  put_u32(os, weights.cfg.arch.frames);
  put_u32(os, weights.base_dims.range);
  put_u32(os, weights.base_dims.doppler);
  put_u32(os, weights.base_dims.antennas);
  put_f64(os, weights.output_scale);
  put_u32(os, static_cast<uint32_t>(weights.w.size()));
  for (double v : weights.w) put_f32(os, static_cast<float>(v));
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

HyperNetWeights hyper_read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Err::IoFailure, "open for read: " + path.string());
  expect_magic(is, kMagic, "hypernet file");
  if (get_u32(is) != kVersion) fail(Err::VersionMismatch, "hypernet file");
  HyperNetWeights w;
  w.cfg.raster_grid = get_u32(is);
  w.cfg.env_latent = get_u32(is);
  w.cfg.pose_dmodel = get_u32(is);
  w.cfg.trunk_width = get_u32(is);
  w.cfg.tracks = get_u32(is);
  uint32_t variant = get_u32(is);
  if (variant > 1) fail(Err::ParseError, "unknown network variant");
  w.cfg.arch.variant = static_cast<InrVariant>(variant);
  w.cfg.arch.frequencies = get_u32(is);
  w.cfg.arch.width = get_u32(is);
  w.cfg.arch.hidden_layers = get_u32(is);
  w.cfg.arch.frames = get_u32(is);
  w.base_dims.frames = w.cfg.arch.frames;
  w.base_dims.range = get_u32(is);
  w.base_dims.doppler = get_u32(is);
  w.base_dims.antennas = get_u32(is);
  w.cfg.validate();
  validate_dims(w.base_dims);
  w.output_scale = get_f64(is);
  if (!std::isfinite(w.output_scale) || w.output_scale <= 0.0)
    fail(Err::ParseError, "output_scale must be finite and positive");
  HyperLayout lay(w.cfg);
  uint32_t count = get_u32(is);
  if (count != lay.total) fail(Err::LengthMismatch, "hypernet payload count");
  w.w.resize(count);
  for (auto& v : w.w) {
    v = get_f32(is);
    if (!std::isfinite(v)) fail(Err::NonFinite, "hypernet weights");
  }
  if (is.peek() != std::char_traits<char>::eof())
    fail(Err::LengthMismatch, "hypernet payload size");
  return w;
}

std::vector<DatasetItem> dataset_read(const std::filesystem::path& manifest) {
  std::ifstream is(manifest);
  if (!is) fail(Err::IoFailure, "open for read: " + manifest.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Err::ParseError, std::string("dataset manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    fail(Err::ParseError, "dataset manifest must hold an items array");
  auto dir = manifest.parent_path();
  auto resolve = [&dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : dir / path;
  };
  std::vector<DatasetItem> items;
  for (const auto& entry : j["items"]) {
    if (!entry.is_object() || !entry.contains("scene") || !entry.contains("trajectory") ||
        !entry.contains("cube"))
      fail(Err::ParseError, "dataset item needs scene, trajectory, and cube paths");
    items.push_back({scene_read(resolve(entry["scene"].get<std::string>())),
                     trajectory_read(resolve(entry["trajectory"].get<std::string>())),
                     cube_read(resolve(entry["cube"].get<std::string>()))});
  }
  if (items.empty()) fail(Err::ParseError, "dataset manifest holds no items");
  return items;
}

}  // namespace mmw
