// SPDX-License-Identifier: Apache-2.0
#include "mmw/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "mmw/common.hpp"
#include "mmw/metrics.hpp"
#include "mmw/rng.hpp"

namespace mmw {

EnergySampler::EnergySampler(const std::vector<double>& energy) {
  cdf_.resize(energy.size());
  double acc = 0.0;
  for (size_t i = 0; i < energy.size(); ++i) {
    if (energy[i] < 0.0) fail(Err::InvalidArgument, "negative bin energy");
    acc += energy[i];
    cdf_[i] = acc;
  }
  total_ = acc;
}

uint32_t EnergySampler::draw(std::mt19937_64& g) const {
  if (cdf_.empty()) fail(Err::InvalidArgument, "empty sampler");
  if (total_ <= 0.0) return static_cast<uint32_t>(uniform_index(g, cdf_.size()));
  double u = uniform01(g) * total_;
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<uint32_t>(it - cdf_.begin());
}

std::vector<double> range_energy(const ComplexCube& cube) {
  const Dims& d = cube.dims();
  std::vector<double> energy(d.range, 0.0);
  for (uint32_t t = 0; t < d.frames; ++t)
    for (uint32_t r = 0; r < d.range; ++r) {
      double acc = 0.0;
      for (uint32_t dd = 0; dd < d.doppler; ++dd)
        for (uint32_t a = 0; a < d.antennas; ++a) {
          const auto& z = cube.at(t, r, dd, a);
          acc += double(z.real()) * z.real() + double(z.imag()) * z.imag();
        }
      energy[r] += acc;
    }
  return energy;
}

FitTarget FitTarget::build(const ComplexCube& cube) {
  double peak = cube.peak_magnitude();
  return build_scaled(cube, peak > 0.0 ? peak : 1.0);
}

FitTarget FitTarget::build_scaled(const ComplexCube& cube, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    fail(Err::InvalidArgument, "normalization scale must be finite and positive");
  FitTarget target{cube.dims(), {}, scale, cube.peak_magnitude() / scale,
                   GridSpec::from_dims(cube.dims()), EnergySampler(range_energy(cube))};
  target.values.resize(cube.data().size());
  double inv = 1.0 / scale;
  const auto& raw = cube.data();
  for (size_t i = 0; i < raw.size(); ++i)
    target.values[i] = {double(raw[i].real()) * inv, double(raw[i].imag()) * inv};
  return target;
}

namespace {

struct PlaneRef {
  uint32_t frame, antenna;
};

// planes_per_epoch distinct (frame, antenna) picks, partial Fisher-Yates.
std::vector<PlaneRef> choose_planes(const Dims& dims, uint32_t want, std::mt19937_64& g) {
  size_t total = size_t(dims.frames) * dims.antennas;
  size_t k = std::min<size_t>(want, total);
  std::vector<uint32_t> ids(total);
  for (size_t i = 0; i < total; ++i) ids[i] = static_cast<uint32_t>(i);
  std::vector<PlaneRef> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + uniform_index(g, total - i);
    std::swap(ids[i], ids[j]);
    out.push_back({ids[i] / dims.antennas, ids[i] % dims.antennas});
  }
  return out;
}


}  // namespace

void validate_fit_config(const Dims& dims, const FitConfig& cfg) {
  if (cfg.epochs < 1) fail(Err::InvalidArgument, "epochs must be >= 1");
  if (cfg.batch < 1 || cfg.batch > dims.cells())
    fail(Err::InvalidArgument, "batch must be in [1, cube cell count]");
  if (cfg.lambda_ssim < 0 || cfg.lambda_mse < 0 || cfg.lambda_perceptual < 0)
    fail(Err::InvalidArgument, "loss weights must be >= 0");
  if (cfg.lambda_ssim + cfg.lambda_mse + cfg.lambda_perceptual <= 0)
    fail(Err::InvalidArgument, "at least one loss weight must be positive");
  if (cfg.energy_fraction < 0 || cfg.energy_fraction > 1)
    fail(Err::InvalidArgument, "energy_fraction must be in [0, 1]");
  bool planes = cfg.lambda_ssim > 0 || cfg.lambda_perceptual > 0;
  if (planes) {
    if (cfg.planes_per_epoch < 1) fail(Err::InvalidArgument, "planes_per_epoch must be >= 1");
    if (dims.range < uint32_t(cfg.ssim.window) || dims.doppler < uint32_t(cfg.ssim.window))
      fail(Err::InvalidDims, "range-doppler plane smaller than the comparison window");
    if (cfg.lambda_perceptual > 0 && (dims.range < 16 || dims.doppler < 16))
      fail(Err::InvalidDims, "range-doppler plane smaller than the feature stack input");
  }
}

InstanceLoss instance_loss_grad(const InrDense& dense, const FitTarget& target,
                                const FitConfig& cfg, const PerceptualExtractor* perceptual,
                                uint64_t seed, uint32_t epoch) {
  const Dims& dims = target.dims;
  const GridSpec& grid = target.grid;
  bool want_ssim = cfg.lambda_ssim > 0;
  bool want_perc = cfg.lambda_perceptual > 0;
  bool want_mse = cfg.lambda_mse > 0;
  if (want_perc && perceptual == nullptr) fail(Err::InvalidArgument, "missing feature extractor");

  InstanceLoss result{{}, InrGradient::zeros(dense.arch)};

  // Scattered batch: energy-weighted range bins for the first slice of the
  // batch, uniform cells for the rest.
  CoordBatch batch;
  std::vector<size_t> batch_cells;
  if (want_mse) {
    auto g = make_rng(seed, "batch", epoch);
    size_t n_energy = static_cast<size_t>(std::llround(cfg.energy_fraction * cfg.batch));
    n_energy = std::min<size_t>(n_energy, cfg.batch);
    batch.coords.reserve(3 * cfg.batch);
    batch.frames.reserve(cfg.batch);
    batch_cells.reserve(cfg.batch);
    for (size_t i = 0; i < cfg.batch; ++i) {
      uint32_t t, r, d, a;
      if (i < n_energy) {
        r = target.sampler.draw(g);
        t = static_cast<uint32_t>(uniform_index(g, dims.frames));
        d = static_cast<uint32_t>(uniform_index(g, dims.doppler));
        a = static_cast<uint32_t>(uniform_index(g, dims.antennas));
      } else {
        size_t flat = uniform_index(g, dims.cells());
        a = static_cast<uint32_t>(flat % dims.antennas);
        flat /= dims.antennas;
        d = static_cast<uint32_t>(flat % dims.doppler);
        flat /= dims.doppler;
        r = static_cast<uint32_t>(flat % dims.range);
        t = static_cast<uint32_t>(flat / dims.range);
      }
      batch.push(grid.r[r], grid.d[d], grid.a[a], t);
      batch_cells.push_back(((size_t(t) * dims.range + r) * dims.doppler + d) * dims.antennas + a);
    }
  }

  std::vector<PlaneRef> planes;
  if (want_ssim || want_perc) {
    auto g = make_rng(seed, "planes", epoch);
    planes = choose_planes(dims, cfg.planes_per_epoch, g);
  }

  // MSE term over the scattered batch.
  if (want_mse) {
    std::vector<std::complex<double>> pred;
    inr_forward_batch(dense, batch, pred);
    double inv_n = 1.0 / double(batch.size());
    double acc = 0.0;
    std::vector<std::complex<double>> adj(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
      std::complex<double> diff = pred[i] - target.values[batch_cells[i]];
      acc += diff.real() * diff.real() + diff.imag() * diff.imag();
      adj[i] = {cfg.lambda_mse * diff.real() * inv_n, cfg.lambda_mse * diff.imag() * inv_n};
    }
    result.loss.mse = acc * 0.5 * inv_n;
    inr_backward_batch(dense, batch, adj, result.grad);
  }

  // Structural terms over whole range-doppler planes.
  if (!planes.empty()) {
    size_t rows = dims.range, cols = dims.doppler, cells = rows * cols;
    double inv_planes = 1.0 / double(planes.size());
    std::vector<double> pr(cells), pi(cells), tr(cells), ti(cells);
    std::vector<double> grad_re(cells), grad_im(cells), gx;
    std::vector<double> pm, tm, gm;
    double ssim_acc = 0.0, perc_acc = 0.0;

    for (const auto& plane : planes) {
      CoordBatch pb;
      pb.coords.reserve(3 * cells);
      pb.frames.reserve(cells);
      for (uint32_t r = 0; r < rows; ++r)
        for (uint32_t d = 0; d < cols; ++d)
          pb.push(grid.r[r], grid.d[d], grid.a[plane.antenna], plane.frame);
      std::vector<std::complex<double>> pred;
      inr_forward_batch(dense, pb, pred);
      for (size_t i = 0; i < cells; ++i) {
        pr[i] = pred[i].real();
        pi[i] = pred[i].imag();
        uint32_t r = static_cast<uint32_t>(i / cols);
        uint32_t d = static_cast<uint32_t>(i % cols);
        const auto& z = target.at(plane.frame, r, d, plane.antenna);
        tr[i] = z.real();
        ti[i] = z.imag();
      }
      std::fill(grad_re.begin(), grad_re.end(), 0.0);
      std::fill(grad_im.begin(), grad_im.end(), 0.0);

      if (want_ssim) {
        double s_re = ssim_plane_grad(pr.data(), tr.data(), rows, cols, target.norm_peak, gx,
                                      cfg.ssim);
        // d(1 - mean cssim)/dx = -0.5 * dssim/dx / planes
        double w = -0.5 * cfg.lambda_ssim * inv_planes;
        for (size_t i = 0; i < cells; ++i) grad_re[i] += w * gx[i];
        double s_im = ssim_plane_grad(pi.data(), ti.data(), rows, cols, target.norm_peak, gx,
                                      cfg.ssim);
        for (size_t i = 0; i < cells; ++i) grad_im[i] += w * gx[i];
        ssim_acc += 0.5 * (s_re + s_im);
      }

      if (want_perc) {
        pm.resize(cells);
        tm.resize(cells);
        for (size_t i = 0; i < cells; ++i) {
          pm[i] = std::hypot(pr[i], pi[i]);
          tm[i] = std::hypot(tr[i], ti[i]);
        }
        perc_acc += perceptual->l1_feature_loss(pm.data(), tm.data(), rows, cols, &gm);
        double w = cfg.lambda_perceptual * inv_planes;
        for (size_t i = 0; i < cells; ++i) {
          if (pm[i] <= 0.0) continue;  // |z| has no gradient at the origin
          grad_re[i] += w * gm[i] * pr[i] / pm[i];
          grad_im[i] += w * gm[i] * pi[i] / pm[i];
        }
      }

      std::vector<std::complex<double>> adj(cells);
      for (size_t i = 0; i < cells; ++i) adj[i] = {grad_re[i], grad_im[i]};
      inr_backward_batch(dense, pb, adj, result.grad);
    }

    if (want_ssim) result.loss.ssim = 1.0 - ssim_acc * inv_planes;
    if (want_perc) result.loss.perceptual = perc_acc * inv_planes;
  }

  result.loss.total = 0.0;
  if (want_ssim) result.loss.total += cfg.lambda_ssim * result.loss.ssim;
  if (want_mse) result.loss.total += cfg.lambda_mse * result.loss.mse;
  if (want_perc) result.loss.total += cfg.lambda_perceptual * result.loss.perceptual;
  return result;
}

void init_theta(const InrArch& arch, uint64_t seed, std::vector<double>& theta) {
  auto counts = arch.param_count();
  theta.assign(counts.theta, 0.0);
  auto g = make_rng(seed, "init");
  for (const auto& s : arch.layers()) {
    double lim = std::sqrt(1.0 / double(s.cols));
    for (size_t i = 0; i < s.rows * s.cols; ++i) theta[s.w_offset + i] = uniform(g, -lim, lim);
    for (size_t i = 0; i < s.rows; ++i) theta[s.b_offset + i] = uniform(g, -lim, lim);
  }
}

std::pair<InrParams, FitReport> fit_instance(const ComplexCube& cube, const InrArch& arch,
                                             const FitConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  arch.validate();
  if (arch.frames != cube.dims().frames)
    fail(Err::LengthMismatch, "network frame count does not match cube");
  validate_fit_config(cube.dims(), cfg);

  FitTarget target = FitTarget::build(cube);

  InrDense dense;
  dense.arch = arch;
  init_theta(arch, cfg.seed, dense.theta);
  auto counts = arch.param_count();
  dense.modulations.assign(counts.modulation, 0.0);
  for (uint32_t f = 0; f < arch.frames && arch.variant == InrVariant::Modulated; ++f)
    for (uint32_t l = 0; l < arch.hidden_layers; ++l) {
      double* gamma = dense.modulations.data() + arch.mod_offset(f, l);
      for (uint32_t i = 0; i < arch.width; ++i) gamma[i] = 1.0;
    }

  std::unique_ptr<PerceptualExtractor> perceptual;
  if (cfg.lambda_perceptual > 0)
    perceptual = std::make_unique<PerceptualExtractor>(cfg.perceptual_seed);

  AdamState theta_state(dense.theta.size());
  AdamState mod_state(dense.modulations.size());

  FitReport report;
  report.losses.reserve(cfg.epochs);
  report.scale = target.scale;

  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    InstanceLoss step = instance_loss_grad(dense, target, cfg, perceptual.get(), cfg.seed, epoch);
    if (!std::isfinite(step.loss.total))
      fail(Err::NonFinite, "loss diverged at epoch " + std::to_string(epoch));
    report.losses.push_back(step.loss);
    adam_step(dense.theta, step.grad.theta, theta_state, cfg.adam);
    adam_step(dense.modulations, step.grad.modulations, mod_state, cfg.adam);
  }

  // Fold the target normalization into the linear output layer so the
  // serialized parameters reproduce raw-scale values.
  auto shapes = arch.layers();
  const auto& out = shapes.back();
  for (size_t i = 0; i < out.rows * out.cols + out.rows; ++i)
    dense.theta[out.w_offset + i] *= target.scale;

  InrParams params = to_params(dense);
  SamplePlan grid_plan;
  SampleResult res = sample(params, grid_plan, cube.dims());
  report.final_cssim = cssim(res.cube, cube);
  report.final_psnr_db = psnr_db(res.cube, cube);
  report.final_mse = cube_mse(res.cube, cube);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

void fit_report_write_csv(const FitReport& report, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  os << "epoch,total,mse,ssim,perceptual\n";
  char buf[160];
  for (size_t i = 0; i < report.losses.size(); ++i) {
    const auto& l = report.losses[i];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", i, l.total, l.mse, l.ssim,
                  l.perceptual);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# scale=%.9g cssim=%.6f psnr_db=%.4f mse=%.9g seconds=%.3f\n",
                report.scale, report.final_cssim, report.final_psnr_db, report.final_mse,
                report.wall_seconds);
  os << buf;
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

}  // namespace mmw
