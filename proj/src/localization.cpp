#include "sparseg/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sparseg/errors.hpp"

namespace sparseg {
namespace {

SeedRegion seed_from_centroid(const Volume3D& vol, const std::array<double, 3>& c) {
  SeedRegion seed;
  seed.center = c;
  const int half = kSeedBoxSize / 2;
  const int cx = static_cast<int>(std::lround(c[0]));
  const int cy = static_cast<int>(std::lround(c[1]));
  const int cz = static_cast<int>(std::lround(c[2]));
  seed.box.x0 = std::max(0, cx - half);
  seed.box.y0 = std::max(0, cy - half);
  seed.box.z0 = std::max(0, cz - half);
  seed.box.x1 = std::min(vol.nx, cx + half);
  seed.box.y1 = std::min(vol.ny, cy + half);
  seed.box.z1 = std::min(vol.nz, cz + half);
  return seed;
}

SeedRegion seed_of_largest(const Volume3D& vol, const Mask3D& mask,
                           const char* what) {
  const ComponentLabels cl = connected_components(mask, Connectivity::TwentySix);
  if (cl.count == 0) throw LocalizationError(what);
  int best = 1;
  for (int k = 2; k <= cl.count; ++k)
    if (cl.sizes[k - 1] > cl.sizes[best - 1]) best = k;
  return seed_from_centroid(vol, centroid(component_mask(mask, cl, best)));
}

}  // namespace

Mask3D threshold_liver(const Volume3D& vol, IntensityMode mode) {
  const double lo = mode == IntensityMode::Hounsfield ? 40.0 : 125.0;
  const double hi = mode == IntensityMode::Hounsfield ? 60.0 : 155.0;

  Mask3D band = Mask3D::like(vol);
  for (std::size_t i = 0; i < vol.data.size(); ++i)
    band.data[i] = vol.data[i] >= lo && vol.data[i] <= hi;

  // one pass of 3^3 majority smoothing
  Mask3D out = Mask3D::like(vol);
  for (int z = 0; z < vol.nz; ++z)
    for (int y = 0; y < vol.ny; ++y)
      for (int x = 0; x < vol.nx; ++x) {
        int total = 0, set = 0;
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int qx = x + dx, qy = y + dy, qz = z + dz;
              if (!band.in_bounds(qx, qy, qz)) continue;
              ++total;
              set += band.at(qx, qy, qz);
            }
        out.at(x, y, z) = 2 * set > total;
      }
  return out;
}

SeedRegion localize(const Volume3D& vol, const LocalizationOptions& opts) {
  const Mask3D thresh = threshold_liver(vol, opts.mode);

  // Patient-right = lower-x half under standard orientation; the mid-x
  // plane itself always belongs to the discarded half.
  const int split = vol.nx / 2;
  Mask3D right = thresh;
  for (int z = 0; z < vol.nz; ++z)
    for (int y = 0; y < vol.ny; ++y)
      for (int x = 0; x < vol.nx; ++x) {
        const bool keep = opts.flip_lr ? x > split : x < split;
        if (!keep) right.at(x, y, z) = 0;
      }

  return seed_of_largest(vol, right, "localize: thresholded right half is empty");
}

SeedRegion localize_whole_volume(const Volume3D& vol,
                                 const LocalizationOptions& opts) {
  const Mask3D thresh = threshold_liver(vol, opts.mode);
  return seed_of_largest(vol, thresh, "localize: thresholded volume is empty");
}

Mask3D seed_box_mask(const Volume3D& vol, const SeedRegion& seed) {
  Mask3D m = Mask3D::like(vol);
  for (int z = seed.box.z0; z < seed.box.z1; ++z)
    for (int y = seed.box.y0; y < seed.box.y1; ++y)
      for (int x = seed.box.x0; x < seed.box.x1; ++x) m.at(x, y, z) = 1;
  return m;
}

std::string format_seed(const SeedRegion& seed) {
  std::ostringstream os;
  os << "center " << seed.center[0] << " " << seed.center[1] << " "
     << seed.center[2] << "; box " << seed.box.x0 << " " << seed.box.y0 << " "
     << seed.box.z0 << " " << seed.box.x1 << " " << seed.box.y1 << " "
     << seed.box.z1;
  return os.str();
}

}  // namespace sparseg
