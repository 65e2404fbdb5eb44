#pragma once

#include <cstdint>
#include <vector>

#include "sparseg/volume.hpp"

namespace sparseg {

// Exact squared Euclidean distance (in mm^2, anisotropic spacing respected)
// from every voxel to the nearest feature voxel. Feature voxels are those
// with feature[i] != 0. If there are no feature voxels every entry is +inf.
// Felzenszwalb-Huttenlocher lower-envelope scan per axis; the result is the
// exact minimum over all feature voxels.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature,
                                               int nx, int ny, int nz,
                                               double sx, double sy, double sz);

// Signed distance field of a mask interior: positive inside, negative
// outside, in mm, with half a voxel (0.5 * min spacing) subtracted so the
// zero crossing sits between the boundary voxel pair. The sign of the
// result matches the mask exactly (> 0 inside, < 0 outside).
Volume3D signed_distance(const Mask3D& interior);

}  // namespace sparseg
