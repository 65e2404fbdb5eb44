#include "sparseg/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparseg/distance.hpp"
#include "sparseg/errors.hpp"
#include "sparseg/parallel.hpp"
#include "sparseg/shape_prior.hpp"

namespace sparseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Snap to multiples of 2^-24 so that 1 - g is exact in float.
inline float snap_unit(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(std::round(v * 16777216.0) / 16777216.0);
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

struct Derivatives {
  double x, y, z, xx, yy, zz, xy, xz, yz;
};

inline Derivatives derivatives_at(const Volume3D& phi, int x, int y, int z) {
  auto p = [&](int xi, int yi, int zi) -> double {
    return phi.at(clampi(xi, 0, phi.nx - 1), clampi(yi, 0, phi.ny - 1),
                  clampi(zi, 0, phi.nz - 1));
  };
  Derivatives d;
  const double c = p(x, y, z);
  d.x = (p(x + 1, y, z) - p(x - 1, y, z)) / (2 * phi.sx);
  d.y = (p(x, y + 1, z) - p(x, y - 1, z)) / (2 * phi.sy);
  d.z = (p(x, y, z + 1) - p(x, y, z - 1)) / (2 * phi.sz);
  d.xx = (p(x + 1, y, z) - 2 * c + p(x - 1, y, z)) / (phi.sx * phi.sx);
  d.yy = (p(x, y + 1, z) - 2 * c + p(x, y - 1, z)) / (phi.sy * phi.sy);
  d.zz = (p(x, y, z + 1) - 2 * c + p(x, y, z - 1)) / (phi.sz * phi.sz);
  d.xy = (p(x + 1, y + 1, z) + p(x - 1, y - 1, z) - p(x + 1, y - 1, z) -
          p(x - 1, y + 1, z)) / (4 * phi.sx * phi.sy);
  d.xz = (p(x + 1, y, z + 1) + p(x - 1, y, z - 1) - p(x + 1, y, z - 1) -
          p(x - 1, y, z + 1)) / (4 * phi.sx * phi.sz);
  d.yz = (p(x, y + 1, z + 1) + p(x, y - 1, z - 1) - p(x, y + 1, z - 1) -
          p(x, y - 1, z + 1)) / (4 * phi.sy * phi.sz);
  return d;
}

// Mean curvature div(grad phi / |grad phi|), clamped to the grid scale.
inline double curvature_at(const Volume3D& phi, int x, int y, int z) {
  const Derivatives d = derivatives_at(phi, x, y, z);
  const double g2 = d.x * d.x + d.y * d.y + d.z * d.z;
  if (g2 < 1e-12) return 0.0;
  const double num = d.xx * (d.y * d.y + d.z * d.z) +
                     d.yy * (d.x * d.x + d.z * d.z) +
                     d.zz * (d.x * d.x + d.y * d.y) -
                     2.0 * (d.x * d.y * d.xy + d.x * d.z * d.xz + d.y * d.z * d.yz);
  const double kappa = num / (g2 * std::sqrt(g2));
  const double cap = 1.0 / phi.min_spacing();
  return std::clamp(kappa, -cap, cap);
}

void check_data_term(const Volume3D& phi, const DataTermField& data) {
  if (!phi.same_geometry(data.g) || !phi.same_geometry(data.g_complement))
    throw GeometryError("evolve_step: data term geometry mismatch");
}

}  // namespace

double heaviside(double p, double eps) {
  if (eps <= 0) throw ParamError("heaviside: eps must be positive");
  return 0.5 * (1.0 + (2.0 / kPi) * std::atan(p / eps));
}

double heaviside_delta(double p, double eps) {
  if (eps <= 0) throw ParamError("heaviside_delta: eps must be positive");
  return eps / (kPi * (eps * eps + p * p));
}

DataTermField DataTermField::balanced(const Volume3D& geometry_like) {
  DataTermField f;
  f.g = geometry_like;
  std::fill(f.g.data.begin(), f.g.data.end(), 0.5f);
  f.g_complement = f.g;
  return f;
}

DataTermField build_data_term(const Volume3D& global_norm,
                              const Volume3D& shape_norm) {
  if (!global_norm.same_geometry(shape_norm))
    throw GeometryError("build_data_term: field geometry mismatch");
  DataTermField f;
  f.g = global_norm;
  f.g_complement = global_norm;
  for (std::size_t i = 0; i < f.g.data.size(); ++i) {
    const double a = global_norm.data[i];
    const double b = shape_norm.data[i];
    if (!std::isfinite(a) || !std::isfinite(b))
      throw NumericError("build_data_term: non-finite residual field");
    const float g = snap_unit(a * b);
    f.g.data[i] = g;
    f.g_complement.data[i] = 1.0f - g;
  }
  return f;
}

GlobalResidual global_residual(const FeatureMatrix& features,
                               const Dictionary& d_liver,
                               const Dictionary& d_nonliver, int t0) {
  if (d_liver.rows() != features.values.rows() ||
      d_nonliver.rows() != features.values.rows())
    throw ShapeError("global_residual: dictionary rows do not match features");

  const int cols = static_cast<int>(features.values.cols());
  GlobalResidual gr;
  gr.liver.resize(cols);
  gr.nonliver.resize(cols);
  gr.liver_codes.resize(cols);
  gr.nonliver_codes.resize(cols);

  parallel_for(cols, [&](int j) {
    const Eigen::VectorXd y = features.values.col(j);
    gr.liver_codes[j] = omp(d_liver, y, t0, 0.0);
    gr.liver(j) = (y - reconstruct(d_liver, gr.liver_codes[j])).squaredNorm();
    gr.nonliver_codes[j] = omp(d_nonliver, y, t0, 0.0);
    gr.nonliver(j) = (y - reconstruct(d_nonliver, gr.nonliver_codes[j])).squaredNorm();
  });
  return gr;
}

Eigen::ArrayXd normalize_residual_field(const Eigen::ArrayXd& residuals) {
  const double mx = residuals.maxCoeff();
  if (mx < 1e-12) return Eigen::ArrayXd::Zero(residuals.size());
  return residuals / mx;
}

LevelSetState evolve_step(const LevelSetState& state, const DataTermField& data,
                          double dt) {
  const Volume3D& phi = state.phi;
  check_data_term(phi, data);
  if (dt <= 0) throw ParamError("evolve_step: dt must be positive");
  const double minsp = phi.min_spacing();
  if (state.lambda > 0 &&
      dt > 0.5 * minsp * minsp / state.lambda * (1.0 + 1e-12))
    throw ParamError("evolve_step: dt violates the stability bound");

  LevelSetState next = state;
  parallel_for(phi.nz, [&](int z) {
    for (int y = 0; y < phi.ny; ++y)
      for (int x = 0; x < phi.nx; ++x) {
        const std::size_t i = phi.index(x, y, z);
        const double p = phi.data[i];
        const double delta = heaviside_delta(p, state.epsilon);
        const double force = -static_cast<double>(data.g.data[i]) +
                             static_cast<double>(data.g_complement.data[i]) +
                             state.lambda * curvature_at(phi, x, y, z);
        next.phi.data[i] = static_cast<float>(p + dt * delta * force);
      }
  });
  next.iteration = state.iteration + 1;
  next.energy_trace.push_back(
      level_set_energy(next.phi, data, state.epsilon, state.lambda) +
      state.lambda * state.alpha_l1);
  return next;
}

LevelSetState reinitialize(const LevelSetState& state) {
  const Mask3D interior = mask_from_phi(state.phi);
  if (interior.empty())
    throw DegenerateStateError("reinitialize: empty interior");
  LevelSetState next = state;
  next.phi = signed_distance(interior);
  return next;
}

Mask3D mask_from_phi(const Volume3D& phi) {
  Mask3D m = Mask3D::like(phi);
  for (std::size_t i = 0; i < phi.data.size(); ++i)
    m.data[i] = phi.data[i] >= 0.0f;
  return m;
}

double discrete_perimeter(const Volume3D& phi, double eps) {
  double sum = 0;
  for (int z = 0; z < phi.nz; ++z)
    for (int y = 0; y < phi.ny; ++y)
      for (int x = 0; x < phi.nx; ++x) {
        const Derivatives d = derivatives_at(phi, x, y, z);
        const double gn = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
        sum += heaviside_delta(phi.at(x, y, z), eps) * gn;
      }
  return sum * phi.voxel_volume();
}

double level_set_energy(const Volume3D& phi, const DataTermField& data,
                        double eps, double lambda) {
  double e = 0;
  for (int z = 0; z < phi.nz; ++z)
    for (int y = 0; y < phi.ny; ++y)
      for (int x = 0; x < phi.nx; ++x) {
        const std::size_t i = phi.index(x, y, z);
        const double p = phi.data[i];
        const double h = heaviside(p, eps);
        e += h * data.g.data[i] + (1.0 - h) * data.g_complement.data[i];
        const Derivatives d = derivatives_at(phi, x, y, z);
        e += lambda * heaviside_delta(p, eps) *
             std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
      }
  return e * phi.voxel_volume();
}

std::string TraceTable::to_csv() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "# lambda %.6g\n", lambda);
  os << buf;
  std::snprintf(buf, sizeof(buf), "# dt %.6g\n# epsilon %.6g\n", dt, epsilon);
  os << buf;
  os << "# inner_steps " << inner_steps << "\n# reinit_every " << reinit_every
     << "\n# max_outer " << max_outer << "\n";
  os << "outer,inner,energy,interior_voxels,after_reinit\n";
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.0f,%d\n", r.outer, r.inner,
                  r.energy, r.interior_voxels, r.after_reinit);
    os << buf;
  }
  return os.str();
}

namespace {

// Shape ROI used for patch extraction during segmentation: the bounding box
// of the component the localizer picked, so the patch grid stays fixed
// while the interior evolves. Falls back to three times the seed box.
VoxelBox shape_roi(const Volume3D& vol, const SeedRegion& seed,
                   const PipelineConfig& cfg) {
  const IntensityMode mode =
      cfg.gray_mode ? IntensityMode::Gray8 : IntensityMode::Hounsfield;
  try {
    const Mask3D thresh = threshold_liver(vol, mode);
    Mask3D half = thresh;
    const int split = vol.nx / 2;
    for (int z = 0; z < vol.nz; ++z)
      for (int y = 0; y < vol.ny; ++y)
        for (int x = 0; x < vol.nx; ++x) {
          const bool keep = cfg.flip_lr ? x > split : x < split;
          if (!keep) half.at(x, y, z) = 0;
        }
    const ComponentLabels cl = connected_components(half, Connectivity::TwentySix);
    if (cl.count > 0) {
      int best = 1;
      for (int k = 2; k <= cl.count; ++k)
        if (cl.sizes[k - 1] > cl.sizes[best - 1]) best = k;
      return bounding_box(component_mask(half, cl, best));
    }
  } catch (const Error&) {
    // fall through to the seed-derived box
  }
  VoxelBox b = seed.box;
  const int gx = b.width(), gy = b.height(), gz = b.depth();
  b.x0 = std::max(0, b.x0 - gx); b.x1 = std::min(vol.nx, b.x1 + gx);
  b.y0 = std::max(0, b.y0 - gy); b.y1 = std::min(vol.ny, b.y1 + gy);
  b.z0 = std::max(0, b.z0 - gz); b.z1 = std::min(vol.nz, b.z1 + gz);
  return b;
}

Eigen::ArrayXd weight_against_previous(const Eigen::MatrixXd& signals,
                                       const Dictionary& dict,
                                       const std::vector<SparseCode>& prev) {
  const int cols = static_cast<int>(signals.cols());
  Eigen::ArrayXd w(cols);
  for (int j = 0; j < cols; ++j)
    w(j) = (signals.col(j) - reconstruct(dict, prev[j])).squaredNorm();
  return normalize_residual_field(w);
}

}  // namespace

SegmentationResult run_segmentation(const Volume3D& vol, const SeedRegion& seed,
                                    const Dictionary& d_liver,
                                    const Dictionary& d_nonliver,
                                    const Dictionary& d_shape,
                                    const PipelineConfig& config) {
  config.validate();
  if (d_liver.rows() != kFeatureCount || d_nonliver.rows() != kFeatureCount)
    throw ShapeError("run_segmentation: feature dictionaries must have 42 rows");
  if (d_shape.rows() != kPatchRows)
    throw ShapeError("run_segmentation: shape dictionary must have 256 rows");

  const Mask3D seed_mask = seed_box_mask(vol, seed);
  if (seed_mask.empty())
    throw LocalizationError("run_segmentation: empty seed region");

  const double minsp = vol.min_spacing();
  const double dt = config.dt > 0
                        ? config.dt
                        : 0.4 * minsp * minsp / std::max(config.lambda, 1.0);

  FeatureOptions fopts;
  fopts.window_center = config.window_center;
  fopts.window_width = config.window_width;
  fopts.levels = config.glcm_levels;
  fopts.assume_8bit = config.gray_mode;

  const VoxelBox roi = shape_roi(vol, seed, config);

  SegmentationResult result;
  result.trace.lambda = config.lambda;
  result.trace.dt = dt;
  result.trace.epsilon = config.epsilon;
  result.trace.inner_steps = config.inner_steps;
  result.trace.reinit_every = config.reinit_every;
  result.trace.max_outer = config.max_outer;

  LevelSetState state;
  state.phi = signed_distance(seed_mask);
  state.epsilon = config.epsilon;
  state.lambda = config.lambda;

  std::vector<SparseCode> prev_liver_codes;
  std::vector<SparseCode> prev_alpha;
  double prev_volume = -1;
  int stable_outers = 0;

  auto record = [&](int outer, int inner, double energy, int after_reinit) {
    TraceRow row;
    row.outer = outer;
    row.inner = inner;
    row.energy = energy;
    row.interior_voxels = static_cast<double>(mask_from_phi(state.phi).count());
    row.after_reinit = after_reinit;
    result.trace.rows.push_back(row);
  };

  int outer = 0;
  for (outer = 1; outer <= config.max_outer; ++outer) {
    const Mask3D interior = mask_from_phi(state.phi);
    if (interior.empty())
      throw DivergenceError("run_segmentation: interior vanished",
                            result.trace.to_csv());

    // (1) features and shape occupancy of the current interior
    const FeatureMatrix vf = build_feature_matrix(vol, interior, fopts);
    const PatchMatrix vt = extract_patch_matrix(interior, roi);

    // (2) sparse codes, re-weighted by the previous iteration's residuals
    GlobalResidual gr = global_residual(vf, d_liver, d_nonliver, config.sparsity);
    Eigen::ArrayXd weighted_liver = gr.liver;
    if (!prev_liver_codes.empty()) {
      const Eigen::ArrayXd w1 =
          weight_against_previous(vf.values, d_liver, prev_liver_codes);
      weighted_liver *= w1;
    }
    ShapeEnergy se = shape_energy(vt, d_shape, config.lambda, config.l1_max_iter,
                                  config.l1_tol);
    Eigen::ArrayXd weighted_shape = se.column_residuals;
    if (!prev_alpha.empty()) {
      const Eigen::ArrayXd w2 =
          weight_against_previous(vt.values, d_shape, prev_alpha);
      weighted_shape *= w2;
    }
    prev_liver_codes = gr.liver_codes;
    prev_alpha = se.alpha;

    // Interior already consistent with both dictionaries: nothing to drive.
    if (gr.liver.maxCoeff() < 1e-12 && se.column_residuals.maxCoeff() < 1e-12) {
      result.converged = true;
      break;
    }

    // (3) voxel fields and the data term
    const Eigen::ArrayXd a_field = normalize_residual_field(weighted_liver);
    const PatchMatrix recon = reconstruct_shape(d_shape, se.alpha);

    Volume3D global_field(vol.nx, vol.ny, vol.nz, {vol.sx, vol.sy, vol.sz});
    global_field.ox = vol.ox; global_field.oy = vol.oy; global_field.oz = vol.oz;
    Volume3D shape_field = global_field;
    parallel_for(vol.nz, [&](int z) {
      const double az = a_field(vf.column_of_z(z));
      for (int y = 0; y < vol.ny; ++y)
        for (int x = 0; x < vol.nx; ++x) {
          const std::size_t i = vol.index(x, y, z);
          global_field.data[i] = static_cast<float>(az);
          double s = 1.0;
          if (roi.contains(x, y, z))
            s = 1.0 - sample_patch_grid(recon, roi, x, y, z);
          shape_field.data[i] = static_cast<float>(std::clamp(s, 0.0, 1.0));
        }
    });
    const DataTermField data = build_data_term(global_field, shape_field);

    state.alpha_l1 = se.column_l1.sum();
    record(outer, 0, level_set_energy(state.phi, data, state.epsilon,
                                      state.lambda) +
                         state.lambda * state.alpha_l1, 0);

    // (4) inner descent
    try {
      for (int step = 1; step <= config.inner_steps; ++step) {
        state = evolve_step(state, data, dt);
        record(outer, step, state.energy_trace.back(), 0);
        if (step % config.reinit_every == 0) {
          state = reinitialize(state);
          record(outer, step, level_set_energy(state.phi, data, state.epsilon,
                                               state.lambda) +
                                  state.lambda * state.alpha_l1, 1);
        }
      }
      state = reinitialize(state);
    } catch (const DegenerateStateError&) {
      throw DivergenceError("run_segmentation: interior vanished during descent",
                            result.trace.to_csv());
    }

    const double vol_now = static_cast<double>(mask_from_phi(state.phi).count());
    if (vol_now == 0)
      throw DivergenceError("run_segmentation: interior vanished",
                            result.trace.to_csv());
    if (prev_volume > 0 &&
        std::abs(vol_now - prev_volume) / prev_volume < 0.001) {
      if (++stable_outers >= 2) {
        result.converged = true;
        prev_volume = vol_now;
        break;
      }
    } else {
      stable_outers = 0;
    }
    prev_volume = vol_now;
  }

  result.outer_iterations = std::min(outer, config.max_outer);
  result.mask = mask_from_phi(state.phi);
  return result;
}

}  // namespace sparseg
