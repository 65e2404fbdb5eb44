#include "sparseg/shape_prior.hpp"

#include <algorithm>
#include <cmath>

#include "sparseg/errors.hpp"
#include "sparseg/parallel.hpp"

namespace sparseg {
namespace {

// Trilinear sample of the binary mask at a continuous voxel-center
// coordinate, clamped at the volume edges.
double sample_mask(const Mask3D& m, double x, double y, double z) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int z0 = static_cast<int>(std::floor(z));
  const double fx = x - x0, fy = y - y0, fz = z - z0;

  auto v = [&](int xi, int yi, int zi) -> double {
    xi = std::clamp(xi, 0, m.nx - 1);
    yi = std::clamp(yi, 0, m.ny - 1);
    zi = std::clamp(zi, 0, m.nz - 1);
    return m.at(xi, yi, zi) ? 1.0 : 0.0;
  };
  const double c00 = v(x0, y0, z0) * (1 - fx) + v(x0 + 1, y0, z0) * fx;
  const double c10 = v(x0, y0 + 1, z0) * (1 - fx) + v(x0 + 1, y0 + 1, z0) * fx;
  const double c01 = v(x0, y0, z0 + 1) * (1 - fx) + v(x0 + 1, y0, z0 + 1) * fx;
  const double c11 = v(x0, y0 + 1, z0 + 1) * (1 - fx) + v(x0 + 1, y0 + 1, z0 + 1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return c0 * (1 - fz) + c1 * fz;
}

}  // namespace

PatchMatrix extract_patch_matrix(const Mask3D& mask, const VoxelBox& box) {
  if (box.empty()) throw EmptyInputError("extract_patch_matrix: empty box");
  PatchMatrix pm;
  pm.values.resize(kPatchRows, kPatchPlanes);

  const double wx = static_cast<double>(box.width());
  const double wy = static_cast<double>(box.height());
  const double wz = static_cast<double>(box.depth());
  // sample coordinates stay inside the box so edge cells do not bleed into
  // the surrounding background
  auto inside = [](double v, int lo, int hi) {
    return std::clamp(v, static_cast<double>(lo), static_cast<double>(hi - 1));
  };
  for (int k = 0; k < kPatchPlanes; ++k) {
    const double z = inside(box.z0 + (k + 0.5) * wz / kPatchPlanes - 0.5,
                            box.z0, box.z1);
    for (int j = 0; j < kPatchW; ++j) {
      const double y = inside(box.y0 + (j + 0.5) * wy / kPatchW - 0.5,
                              box.y0, box.y1);
      for (int i = 0; i < kPatchW; ++i) {
        const double x = inside(box.x0 + (i + 0.5) * wx / kPatchW - 0.5,
                                box.x0, box.x1);
        pm.values(j * kPatchW + i, k) = sample_mask(mask, x, y, z);
      }
    }
  }
  return pm;
}

PatchMatrix extract_patch_matrix(const Mask3D& mask) {
  return extract_patch_matrix(mask, bounding_box(mask));
}

double sample_patch_grid(const PatchMatrix& pm, const VoxelBox& box,
                         double x, double y, double z) {
  // continuous cell coordinates of the voxel inside the box grid
  const double u = (x - box.x0 + 0.5) * kPatchW / box.width() - 0.5;
  const double v = (y - box.y0 + 0.5) * kPatchW / box.height() - 0.5;
  const double w = (z - box.z0 + 0.5) * kPatchPlanes / box.depth() - 0.5;

  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const int w0 = static_cast<int>(std::floor(w));
  const double fu = u - u0, fv = v - v0, fw = w - w0;

  auto cell = [&](int ui, int vi, int wi) -> double {
    ui = std::clamp(ui, 0, kPatchW - 1);
    vi = std::clamp(vi, 0, kPatchW - 1);
    wi = std::clamp(wi, 0, kPatchPlanes - 1);
    return pm.values(vi * kPatchW + ui, wi);
  };
  const double c00 = cell(u0, v0, w0) * (1 - fu) + cell(u0 + 1, v0, w0) * fu;
  const double c10 = cell(u0, v0 + 1, w0) * (1 - fu) + cell(u0 + 1, v0 + 1, w0) * fu;
  const double c01 = cell(u0, v0, w0 + 1) * (1 - fu) + cell(u0 + 1, v0, w0 + 1) * fu;
  const double c11 = cell(u0, v0 + 1, w0 + 1) * (1 - fu) + cell(u0 + 1, v0 + 1, w0 + 1) * fu;
  const double c0 = c00 * (1 - fv) + c10 * fv;
  const double c1 = c01 * (1 - fv) + c11 * fv;
  return c0 * (1 - fw) + c1 * fw;
}

KsvdResult train_shape_dictionary(const std::vector<Mask3D>& masks, int k_s,
                                  int t0, int iters, std::uint64_t seed) {
  if (masks.empty()) throw EmptyInputError("train_shape_dictionary: no masks");
  Eigen::MatrixXd Y(kPatchRows, kPatchPlanes * masks.size());
  for (std::size_t m = 0; m < masks.size(); ++m) {
    const PatchMatrix pm = extract_patch_matrix(masks[m]);
    Y.middleCols(static_cast<int>(m) * kPatchPlanes, kPatchPlanes) = pm.values;
  }
  return ksvd(Y, k_s, t0, iters, seed);
}

ShapeEnergy shape_energy(const PatchMatrix& v_t, const Dictionary& d_s,
                         double lambda, int max_iter, double tol) {
  if (d_s.atoms.rows() != kPatchRows)
    throw ShapeError("shape_energy: dictionary rows must be 256");

  const int cols = static_cast<int>(v_t.values.cols());
  ShapeEnergy se;
  se.alpha.resize(cols);
  se.column_residuals.resize(cols);
  se.column_l1.resize(cols);

  parallel_for(cols, [&](int j) {
    const Eigen::VectorXd y = v_t.values.col(j);
    se.alpha[j] = solve_l1(d_s, y, lambda, max_iter, tol);
    se.column_residuals(j) = (y - reconstruct(d_s, se.alpha[j])).squaredNorm();
    se.column_l1(j) = se.alpha[j].l1_norm();
  });
  se.e_shape = se.column_residuals.sum() + lambda * se.column_l1.sum();
  return se;
}

PatchMatrix reconstruct_shape(const Dictionary& d_s,
                              const std::vector<SparseCode>& alpha) {
  if (d_s.atoms.rows() != kPatchRows)
    throw ShapeError("reconstruct_shape: dictionary rows must be 256");
  PatchMatrix pm;
  pm.values.resize(kPatchRows, static_cast<int>(alpha.size()));
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    Eigen::VectorXd col = reconstruct(d_s, alpha[j]);
    for (int i = 0; i < kPatchRows; ++i)
      pm.values(i, static_cast<int>(j)) = std::clamp(col(i), 0.0, 1.0);
  }
  return pm;
}

}  // namespace sparseg
