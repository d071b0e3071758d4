// SPDX-License-Identifier: Apache-2.0
// Single entry point: simulate radar cubes, fit and sample continuous
// representations, score them, and drive the amortized generator.
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmw/common.hpp"
#include "mmw/fit.hpp"
#include "mmw/hypernet.hpp"
#include "mmw/inr.hpp"
#include "mmw/kernels.hpp"
#include "mmw/metrics.hpp"
#include "mmw/radar.hpp"
#include "mmw/spectrogram.hpp"
#include "mmw/threading.hpp"

namespace {

mmw::Dims parse_dims(const std::string& text) {
  mmw::Dims dims;
  uint32_t* slot[4] = {&dims.frames, &dims.range, &dims.doppler, &dims.antennas};
  size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    size_t comma = i < 3 ? text.find(',', pos) : text.size();
    if (comma == std::string::npos) mmw::fail(mmw::Err::InvalidArgument, "--dims wants T,R,D,A");
    try {
      *slot[i] = static_cast<uint32_t>(std::stoul(text.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      mmw::fail(mmw::Err::InvalidArgument, "--dims wants T,R,D,A");
    }
    pos = comma + 1;
  }
  mmw::validate_dims(dims);
  return dims;
}

void parse_factors(const std::string& text, mmw::SamplePlan& plan) {
  uint32_t* slot[3] = {&plan.factor_r, &plan.factor_d, &plan.factor_a};
  size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    size_t comma = i < 2 ? text.find(',', pos) : text.size();
    if (comma == std::string::npos)
      mmw::fail(mmw::Err::InvalidArgument, "--factors wants n_r,n_d,n_a");
    try {
      *slot[i] = static_cast<uint32_t>(std::stoul(text.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      mmw::fail(mmw::Err::InvalidArgument, "--factors wants n_r,n_d,n_a");
    }
    pos = comma + 1;
  }
}

struct ArchFlags {
  std::string variant = "modulated";
  uint32_t frequencies = 8;
  uint32_t width = 32;
  uint32_t layers = 4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--variant", variant, "Network variant: modulated | base")
        ->check(CLI::IsMember({"modulated", "base"}));
    cmd->add_option("--frequencies", frequencies, "Encoding octaves per axis");
    cmd->add_option("--width", width, "Hidden width");
    cmd->add_option("--layers", layers, "Hidden layer count");
  }
  mmw::InrArch arch(uint32_t frames) const {
    mmw::InrArch a;
    a.variant = variant == "base" ? mmw::InrVariant::Base : mmw::InrVariant::Modulated;
    a.frequencies = frequencies;
    a.width = width;
    a.hidden_layers = layers;
    a.frames = frames;
    return a;
  }
};

struct LossFlags {
  uint32_t batch = 16384;
  double lr = 1e-4;
  double lambda_ssim = 0.5;
  double lambda_mse = 0.3;
  double lambda_perceptual = 0.2;
  double energy_fraction = 0.5;
  uint32_t planes = 2;
  uint64_t perceptual_seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--batch", batch, "Scattered coordinates per step");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--lambda-ssim", lambda_ssim, "Structural loss weight");
    cmd->add_option("--lambda-mse", lambda_mse, "Pointwise loss weight");
    cmd->add_option("--lambda-perceptual", lambda_perceptual, "Feature loss weight");
    cmd->add_option("--energy-fraction", energy_fraction,
                    "Share of the batch drawn by range energy");
    cmd->add_option("--planes", planes, "Whole range-doppler planes per step");
    cmd->add_option("--perceptual-seed", perceptual_seed, "Feature extractor seed");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmweaver: continuous radar-cube representations"};
  app.require_subcommand(1);
  app.fallthrough();

  uint64_t seed = 0;
  unsigned threads = 0;
  bool verbose = false;
  app.add_option("--seed", seed, "Master seed (default 0)");
  app.add_option("--threads", threads, "Worker cap, 0 = hardware");
  app.add_flag("--verbose", verbose, "Chatty progress on stderr");

  auto note = [&verbose](const std::string& line) {
    if (verbose) std::cerr << line << "\n";
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Render a radar cube for a scene and trajectory");
  std::string sim_scene, sim_traj, sim_config, sim_out;
  sim->add_option("--scene", sim_scene, "Scene JSON")->required();
  sim->add_option("--traj,--trajectory", sim_traj, "Trajectory JSON")->required();
  sim->add_option("--config", sim_config, "Radar config JSON (defaults when omitted)");
  sim->add_option("--out", sim_out, "Output cube path")->required();
  sim->callback([&] {
    mmw::set_max_threads(threads);
    mmw::Scene scene = mmw::scene_read(sim_scene);
    mmw::Trajectory traj = mmw::trajectory_read(sim_traj);
    mmw::RadarConfig cfg;
    if (!sim_config.empty()) cfg = mmw::radar_config_read(sim_config);
    mmw::ComplexCube cube = mmw::simulate(scene, traj, cfg, seed);
    mmw::cube_write(cube, sim_out);
    note("simulate: wrote " + sim_out);
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a network to one cube");
  std::string fit_cube, fit_out, fit_report;
  uint32_t fit_epochs = 500;
  ArchFlags fit_arch;
  LossFlags fit_loss;
  fit->add_option("--cube", fit_cube, "Target cube")->required();
  fit->add_option("--out", fit_out, "Output params path")->required();
  fit->add_option("--report", fit_report, "Per-epoch loss CSV");
  fit->add_option("--epochs", fit_epochs, "Optimizer steps");
  fit_arch.attach(fit);
  fit_loss.attach(fit);
  fit->callback([&] {
    mmw::set_max_threads(threads);
    mmw::ComplexCube cube = mmw::cube_read(fit_cube);
    mmw::FitConfig cfg;
    cfg.epochs = fit_epochs;
    cfg.adam.lr = fit_loss.lr;
    cfg.batch = fit_loss.batch;
    cfg.lambda_ssim = fit_loss.lambda_ssim;
    cfg.lambda_mse = fit_loss.lambda_mse;
    cfg.lambda_perceptual = fit_loss.lambda_perceptual;
    cfg.energy_fraction = fit_loss.energy_fraction;
    cfg.planes_per_epoch = fit_loss.planes;
    cfg.seed = seed;
    cfg.perceptual_seed = fit_loss.perceptual_seed;
    auto [params, report] = mmw::fit_instance(cube, fit_arch.arch(cube.dims().frames), cfg);
    mmw::params_write(params, fit_out);
    if (!fit_report.empty()) mmw::fit_report_write_csv(report, fit_report);
    std::printf("cssim=%.4f psnr_db=%.2f mse=%.6g wall_s=%.1f\n", report.final_cssim,
                report.final_psnr_db, report.final_mse, report.wall_seconds);
  });

  // sample
  auto* smp = app.add_subcommand("sample", "Evaluate fitted params on a coordinate plan");
  std::string smp_params, smp_out, smp_mode = "grid", smp_factors, smp_dims;
  uint32_t smp_radius = 0;
  smp->add_option("--params", smp_params, "Fitted params file")->required();
  smp->add_option("--out", smp_out, "Output cube path")->required();
  smp->add_option("--dims", smp_dims, "Base grid T,R,D,A")->required();
  smp->add_option("--mode", smp_mode, "grid | super | augment")
      ->check(CLI::IsMember({"grid", "super", "augment"}));
  smp->add_option("--factors", smp_factors, "Upsampling n_r,n_d,n_a (super)");
  smp->add_option("--radius", smp_radius, "Jitter radius 0..7 (augment)");
  smp->callback([&] {
    mmw::set_max_threads(threads);
    mmw::InrParams params = mmw::params_read(smp_params);
    mmw::SamplePlan plan;
    plan.seed = seed;
    plan.radius = smp_radius;
    if (smp_mode == "super") plan.mode = mmw::SamplePlan::Mode::SuperRes;
    if (smp_mode == "augment") plan.mode = mmw::SamplePlan::Mode::Augment;
    if (!smp_factors.empty()) parse_factors(smp_factors, plan);
    mmw::SampleResult result = mmw::sample(params, plan, parse_dims(smp_dims));
    mmw::cube_write(result.cube, smp_out);
    std::printf("points=%zu nominal=%zu\n", result.points_emitted, result.points_nominal);
  });

  // metrics
  auto* met = app.add_subcommand("metrics", "Score one cube against another");
  std::string met_a, met_b, met_out, met_config;
  double pc_threshold = 0.0;
  uint32_t met_frame = 0;
  bool met_joint = false;
  met->add_option("--a", met_a, "Candidate cube")->required();
  met->add_option("--b", met_b, "Reference cube")->required();
  auto* pc_opt =
      met->add_option("--pc-threshold", pc_threshold, "Also compare point clouds, floor in dB");
  met->add_option("--frame", met_frame, "Frame for the point-cloud comparison");
  met->add_option("--config", met_config, "Radar config JSON for point geometry");
  met->add_flag("--joint", met_joint, "Symmetric dynamic range for cssim");
  met->add_option("--out", met_out, "Write metric,value CSV");
  met->callback([&] {
    mmw::set_max_threads(threads);
    mmw::ComplexCube a = mmw::cube_read(met_a);
    mmw::ComplexCube b = mmw::cube_read(met_b);
    auto convention = met_joint ? mmw::DynRange::Joint : mmw::DynRange::Reference;
    double cs = mmw::cssim(a, b, convention);
    double psnr = mmw::psnr_db(a, b);
    double mse = mmw::cube_mse(a, b);
    std::string lines = "cssim," + std::to_string(cs) + "\npsnr_db," + std::to_string(psnr) +
                        "\nmse," + std::to_string(mse) + "\n";
    std::printf("cssim=%.4f psnr_db=%.2f mse=%.6g", cs, psnr, mse);
    if (pc_opt->count() > 0) {
      mmw::RadarConfig cfg;
      if (!met_config.empty()) cfg = mmw::radar_config_read(met_config);
      auto pa = mmw::extract_pointcloud(a, met_frame, pc_threshold, cfg);
      auto pb = mmw::extract_pointcloud(b, met_frame, pc_threshold, cfg);
      double h = mmw::hausdorff(pa, pb);
      lines += "hausdorff," + std::to_string(h) + "\n";
      std::printf(" hausdorff=%.4f", h);
    }
    std::printf("\n");
    if (!met_out.empty()) {
      std::ofstream os(met_out);
      if (!os) mmw::fail(mmw::Err::IoFailure, "open for write: " + met_out);
      os << "metric,value\n" << lines;
    }
  });

  // hyper-train
  auto* htr = app.add_subcommand("hyper-train", "Train the parameter generator on a dataset");
  std::string htr_dataset, htr_out, htr_report;
  uint32_t htr_epochs = 1000;
  uint32_t htr_raster = 32, htr_env = 64, htr_pose = 64, htr_trunk = 256;
  ArchFlags htr_arch;
  LossFlags htr_loss;
  htr->add_option("--dataset", htr_dataset, "Manifest JSON")->required();
  htr->add_option("--out", htr_out, "Output weights path")->required();
  htr->add_option("--report", htr_report, "Per-epoch loss CSV");
  htr->add_option("--epochs", htr_epochs, "Dataset passes");
  htr->add_option("--raster-grid", htr_raster, "Scene raster resolution");
  htr->add_option("--env-latent", htr_env, "Scene embedding size");
  htr->add_option("--pose-dim", htr_pose, "Pose embedding size");
  htr->add_option("--trunk", htr_trunk, "Trunk width");
  htr_arch.attach(htr);
  htr_loss.attach(htr);
  htr->callback([&] {
    mmw::set_max_threads(threads);
    auto dataset = mmw::dataset_read(htr_dataset);
    mmw::HyperConfig hcfg;
    hcfg.raster_grid = htr_raster;
    hcfg.env_latent = htr_env;
    hcfg.pose_dmodel = htr_pose;
    hcfg.trunk_width = htr_trunk;
    hcfg.tracks = static_cast<uint32_t>(dataset.front().trajectory.tracks.size());
    hcfg.arch = htr_arch.arch(dataset.front().cube.dims().frames);
    mmw::HyperNetWeights weights =
        mmw::hyper_init(hcfg, dataset.front().cube.dims(), seed);
    mmw::HyperTrainConfig tcfg;
    tcfg.epochs = htr_epochs;
    tcfg.adam.lr = htr_loss.lr;
    tcfg.batch = htr_loss.batch;
    tcfg.lambda_ssim = htr_loss.lambda_ssim;
    tcfg.lambda_mse = htr_loss.lambda_mse;
    tcfg.lambda_perceptual = htr_loss.lambda_perceptual;
    tcfg.energy_fraction = htr_loss.energy_fraction;
    tcfg.planes_per_epoch = htr_loss.planes;
    tcfg.seed = seed;
    tcfg.perceptual_seed = htr_loss.perceptual_seed;
    auto report = mmw::hyper_train(weights, dataset, tcfg);
    mmw::hyper_write(weights, htr_out);
    if (!htr_report.empty()) {
      std::ofstream os(htr_report);
      if (!os) mmw::fail(mmw::Err::IoFailure, "open for write: " + htr_report);
      os << "epoch,total,mse,ssim,perceptual\n";
      char buf[160];
      for (size_t i = 0; i < report.losses.size(); ++i) {
        const auto& l = report.losses[i];
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", i, l.total, l.mse, l.ssim,
                      l.perceptual);
        os << buf;
      }
    }
    double last = report.losses.empty() ? 0.0 : report.losses.back().total;
    std::printf("items=%zu epochs=%u final_loss=%.6g wall_s=%.1f\n", dataset.size(), htr_epochs,
                last, report.wall_seconds);
  });

  // hyper-gen
  auto* hgn = app.add_subcommand("hyper-gen", "Generate a cube from scene and trajectory");
  std::string hgn_weights, hgn_scene, hgn_traj, hgn_out, hgn_params, hgn_mode = "grid",
                                                            hgn_factors;
  uint32_t hgn_radius = 0;
  hgn->add_option("--weights", hgn_weights, "Trained weights file")->required();
  hgn->add_option("--scene", hgn_scene, "Scene JSON")->required();
  hgn->add_option("--traj,--trajectory", hgn_traj, "Trajectory JSON")->required();
  hgn->add_option("--out", hgn_out, "Output cube path")->required();
  hgn->add_option("--params-out", hgn_params, "Also save the generated params");
  hgn->add_option("--mode", hgn_mode, "grid | super | augment")
      ->check(CLI::IsMember({"grid", "super", "augment"}));
  hgn->add_option("--factors", hgn_factors, "Upsampling n_r,n_d,n_a (super)");
  hgn->add_option("--radius", hgn_radius, "Jitter radius 0..7 (augment)");
  hgn->callback([&] {
    mmw::set_max_threads(threads);
    mmw::HyperNetWeights weights = mmw::hyper_read(hgn_weights);
    mmw::Scene scene = mmw::scene_read(hgn_scene);
    mmw::Trajectory traj = mmw::trajectory_read(hgn_traj);
    mmw::SamplePlan plan;
    plan.seed = seed;
    plan.radius = hgn_radius;
    if (hgn_mode == "super") plan.mode = mmw::SamplePlan::Mode::SuperRes;
    if (hgn_mode == "augment") plan.mode = mmw::SamplePlan::Mode::Augment;
    if (!hgn_factors.empty()) parse_factors(hgn_factors, plan);
    if (!hgn_params.empty())
      mmw::params_write(mmw::hyper_generate(weights, scene, traj), hgn_params);
    mmw::SampleResult result = mmw::generate_signal(weights, scene, traj, plan);
    mmw::cube_write(result.cube, hgn_out);
    std::printf("points=%zu nominal=%zu\n", result.points_emitted, result.points_nominal);
  });

  // export-spectrogram
  auto* exs = app.add_subcommand("export-spectrogram", "Project a cube frame to an image");
  std::string exs_cube, exs_plane = "rd", exs_out, exs_csv;
  uint32_t exs_frame = 0, exs_az = 8, exs_el = 4, exs_bins = 32;
  exs->add_option("--cube", exs_cube, "Input cube")->required();
  exs->add_option("--plane", exs_plane, "rd | ra | re")
      ->check(CLI::IsMember({"rd", "ra", "re"}));
  exs->add_option("--frame", exs_frame, "Frame index");
  exs->add_option("--azimuth", exs_az, "Azimuth elements in the layout");
  exs->add_option("--elevation", exs_el, "Elevation elements in the layout");
  exs->add_option("--angle-bins", exs_bins, "Angle DFT size (ra/re)");
  exs->add_option("--out", exs_out, "Output PGM path")->required();
  exs->add_option("--csv", exs_csv, "Also write raw magnitudes CSV");
  exs->callback([&] {
    mmw::set_max_threads(threads);
    mmw::ComplexCube cube = mmw::cube_read(exs_cube);
    auto plane = mmw::project_spectrogram(cube, mmw::plane_kind_from_name(exs_plane), exs_frame,
                                          {exs_az, exs_el}, exs_bins);
    mmw::write_pgm(plane, exs_out);
    if (!exs_csv.empty()) mmw::write_csv(plane, exs_csv);
    note("export-spectrogram: wrote " + exs_out);
  });

  // info
  auto* info = app.add_subcommand("info", "Compression accounting for params against a grid");
  std::string info_params, info_dims, info_cube;
  info->add_option("--params", info_params, "Params file")->required();
  info->add_option("--dims", info_dims, "Grid T,R,D,A the ratio is quoted against");
  info->add_option("--cube", info_cube, "Take the grid from this cube instead");
  info->callback([&] {
    mmw::InrParams params = mmw::params_read(info_params);
    mmw::Dims dims;
    if (!info_dims.empty()) {
      dims = parse_dims(info_dims);
    } else if (!info_cube.empty()) {
      dims = mmw::cube_read(info_cube).dims();
    } else {
      mmw::fail(mmw::Err::InvalidArgument, "info needs --dims or --cube");
    }
    size_t total = params.arch.param_count().total();
    std::printf("points=%zu params=%zu ratio=%.2f\n", dims.scalars(), total,
                mmw::compression_ratio(dims, total));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const mmw::MmwError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
