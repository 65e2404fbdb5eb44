#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sparseg/morphology.hpp"
#include "sparseg/sparse.hpp"
#include "sparseg/volume.hpp"

namespace sparseg {

inline constexpr int kPatchW = 16;                      // in-plane patch size
inline constexpr int kPatchPlanes = 160;                // columns
inline constexpr int kPatchRows = kPatchW * kPatchW;    // 256

// Soft occupancy of a mask resampled onto a 16 x 16 x 160 grid. Column j is
// axial plane j of the grid, flattened x-fastest; all values lie in [0,1].
struct PatchMatrix {
  Eigen::MatrixXd values;  // 256 x 160
};

// Resamples the given box of the mask (trilinear, voxel-center aligned).
PatchMatrix extract_patch_matrix(const Mask3D& mask, const VoxelBox& box);
// Same, over the mask's tight bounding box; rigid translations of the mask
// therefore produce identical matrices.
PatchMatrix extract_patch_matrix(const Mask3D& mask);

// Soft-occupancy sample of the patch grid at voxel (x,y,z), trilinear over
// the grid cells, clamped at the edges. Used to map reconstructed shapes
// back onto the volume.
double sample_patch_grid(const PatchMatrix& pm, const VoxelBox& box,
                         double x, double y, double z);

// Trains the shape dictionary D_s (256 rows) on the patch matrices of the
// training masks, one column per plane per mask.
KsvdResult train_shape_dictionary(const std::vector<Mask3D>& masks, int k_s,
                                  int t0, int iters, std::uint64_t seed);

struct ShapeEnergy {
  std::vector<SparseCode> alpha;   // one code per column
  Eigen::ArrayXd column_residuals; // ||v_j - D a_j||^2 per column
  Eigen::ArrayXd column_l1;        // ||a_j||_1 per column
  double e_shape = 0;              // summed objective
};

// Solves min_a ||v_j - D_s a||_2^2 + lambda ||a||_1 per column.
ShapeEnergy shape_energy(const PatchMatrix& v_t, const Dictionary& d_s,
                         double lambda, int max_iter = 500, double tol = 1e-10);

// Columnwise D_s * alpha, clamped to [0,1].
PatchMatrix reconstruct_shape(const Dictionary& d_s,
                              const std::vector<SparseCode>& alpha);

}  // namespace sparseg
