#pragma once

#include <array>
#include <string>

#include "sparseg/morphology.hpp"
#include "sparseg/volume.hpp"

namespace sparseg {

enum class IntensityMode { Hounsfield, Gray8 };

// 16^3 seed box around the detected liver centroid, clamped to the volume.
struct SeedRegion {
  std::array<double, 3> center{};
  VoxelBox box;
};

inline constexpr int kSeedBoxSize = 16;

struct LocalizationOptions {
  IntensityMode mode = IntensityMode::Hounsfield;
  bool flip_lr = false;  // patient-right at high x instead of low x
};

// Liver-band threshold ([+40,+60] HU, or gray [125,155] in 8-bit mode)
// followed by one pass of 3x3x3 majority smoothing.
Mask3D threshold_liver(const Volume3D& vol, IntensityMode mode);

// Splits the thresholded mask at the mid-x plane (the plane itself belongs
// to the non-selected half), takes the largest 26-connected component on
// the patient-right half and returns its centroid with the seed box.
// Throws LocalizationError if the right half is empty.
SeedRegion localize(const Volume3D& vol, const LocalizationOptions& opts = {});

// Fallback: largest component over the whole thresholded volume.
SeedRegion localize_whole_volume(const Volume3D& vol,
                                 const LocalizationOptions& opts = {});

// Filled seed-box mask on the volume's grid.
Mask3D seed_box_mask(const Volume3D& vol, const SeedRegion& seed);

// "center x y z; box x0 y0 z0 x1 y1 z1"
std::string format_seed(const SeedRegion& seed);

}  // namespace sparseg
