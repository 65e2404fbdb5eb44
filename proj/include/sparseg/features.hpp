#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sparseg/volume.hpp"

namespace sparseg {

// Co-occurrence offsets at distance 1, angle measured from +x toward +y
// within an axial slice: 0 -> (1,0), 45 -> (1,1), 90 -> (0,1), 135 -> (-1,1).
// Pairs are directed (p, p+offset); no symmetric accumulation.
enum class GlcmOffset { Deg0, Deg45, Deg90, Deg135 };

std::array<int, 2> glcm_offset_vector(GlcmOffset o);

struct GlcmMatrix {
  int levels = 0;
  GlcmOffset offset = GlcmOffset::Deg0;
  std::vector<std::uint64_t> counts;  // levels x levels, row-major [i*levels+j]
  std::uint64_t total_pairs = 0;

  std::uint64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * levels + j]; }
};

// Counts in-mask voxel pairs (p, p+offset) within each axial slice of
// [z0, z1). Gray values are quantized into `levels` bins over [lo, hi).
GlcmMatrix glcm(const Volume3D& vol, const Mask3D& mask, int z0, int z1,
                GlcmOffset offset, int levels, double lo, double hi);

// The nine texture features, in this fixed order. p = counts / total,
// indices i (row) and j (column) are 0-based bin numbers, mu_r/mu_c the
// marginal means and sigma_r/sigma_c the marginal standard deviations:
//   0 entropy              -sum p ln p
//   1 energy                sum p^2
//   2 contrast              sum (i-j)^2 p
//   3 homogeneity           sum p / (1 + |i-j|)
//   4 sum mean              sum i p
//   5 correlation           sum (i-mu_r)(j-mu_c) p / (sigma_r sigma_c)
//   6 maximum probability   max p
//   7 inverse diff moment   sum p / (1 + (i-j)^2)
//   8 cluster tendency      sum (i + j - mu_r - mu_c)^2 p
// Correlation is defined as 0 when either marginal is degenerate.
std::array<double, 9> haralick(const GlcmMatrix& g);

struct VolumeProperties {
  double volume_mm3 = 0;
  double surface_mm2 = 0;     // exposed voxel faces
  long euler = 0;             // V - E + F - C of the cubical complex
  double major_axis_mm = 0;   // 4*sqrt(largest covariance eigenvalue)
  double minor_axis_mm = 0;   // 4*sqrt(smallest covariance eigenvalue)
};

VolumeProperties volume_properties(const Mask3D& mask);

inline constexpr int kFeatureCount = 42;   // 9 features x 4 offsets + mean + 5 props
inline constexpr int kFeatureColumns = 160;

struct FeatureOptions {
  double window_center = 50.0;  // HU display window used before quantization
  double window_width = 350.0;
  int levels = 32;
  bool assume_8bit = false;     // input already windowed to [0,255]
};

// Region feature matrix: 160 columns, one per axial slab of the mask's
// z-extent. Rows 0..35 are the 9 GLCM features for offsets 0/45/90/135,
// row 36 the mean raw intensity inside the slab, rows 37..41 the whole-mask
// volume properties (replicated across columns).
struct FeatureMatrix {
  Eigen::MatrixXd values;                          // 42 x 160
  std::vector<std::pair<int, int>> slab_ranges;    // inclusive z range per column
  int z_min = 0, z_max = 0;                        // mask extent the slabs map

  // Which column covers absolute slice z (clamped to the mapped extent).
  int column_of_z(int z) const;
};

FeatureMatrix build_feature_matrix(const Volume3D& vol, const Mask3D& mask,
                                   const FeatureOptions& opts = {});

// Names of the 42 rows, in order; used by the export sidecar.
const std::vector<std::string>& feature_row_names();

// Flat binary export (row-major 64-bit floats) plus a .txt sidecar naming
// the row order and the slab extent.
void save_feature_matrix(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix load_feature_matrix(const std::string& path);

}  // namespace sparseg
