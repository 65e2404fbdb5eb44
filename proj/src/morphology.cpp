#include "sparseg/morphology.hpp"

#include <algorithm>

#include "sparseg/errors.hpp"

namespace sparseg {

ComponentLabels connected_components(const Mask3D& mask, Connectivity conn) {
  ComponentLabels out;
  out.labels.assign(mask.size(), 0);

  // Neighbor offsets for the requested connectivity.
  std::vector<std::array<int, 3>> nbr;
  if (conn == Connectivity::Six) {
    nbr = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  } else {
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy || dz) nbr.push_back({dx, dy, dz});
  }

  std::vector<std::size_t> stack;
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x) {
        const std::size_t s = mask.index(x, y, z);
        if (!mask.data[s] || out.labels[s]) continue;
        const std::int32_t label = ++out.count;
        std::size_t sz = 0;
        stack.clear();
        stack.push_back(s);
        out.labels[s] = label;
        while (!stack.empty()) {
          const std::size_t cur = stack.back();
          stack.pop_back();
          ++sz;
          const int cx = static_cast<int>(cur % mask.nx);
          const int cy = static_cast<int>((cur / mask.nx) % mask.ny);
          const int cz = static_cast<int>(cur / (static_cast<std::size_t>(mask.nx) * mask.ny));
          for (const auto& d : nbr) {
            const int qx = cx + d[0], qy = cy + d[1], qz = cz + d[2];
            if (!mask.in_bounds(qx, qy, qz)) continue;
            const std::size_t q = mask.index(qx, qy, qz);
            if (mask.data[q] && !out.labels[q]) {
              out.labels[q] = label;
              stack.push_back(q);
            }
          }
        }
        out.sizes.push_back(sz);
      }
  return out;
}

std::array<double, 3> centroid(const Mask3D& mask) {
  double sx = 0, sy = 0, sz = 0;
  std::size_t n = 0;
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x)
        if (mask.at(x, y, z)) {
          sx += x; sy += y; sz += z;
          ++n;
        }
  if (n == 0) throw EmptyInputError("centroid: empty mask");
  return {sx / n, sy / n, sz / n};
}

VoxelBox bounding_box(const Mask3D& mask) {
  VoxelBox b{mask.nx, mask.ny, mask.nz, 0, 0, 0};
  bool any = false;
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x)
        if (mask.at(x, y, z)) {
          any = true;
          b.x0 = std::min(b.x0, x); b.x1 = std::max(b.x1, x + 1);
          b.y0 = std::min(b.y0, y); b.y1 = std::max(b.y1, y + 1);
          b.z0 = std::min(b.z0, z); b.z1 = std::max(b.z1, z + 1);
        }
  if (!any) throw EmptyInputError("bounding_box: empty mask");
  return b;
}

Mask3D component_mask(const Mask3D& mask, const ComponentLabels& cl, int label) {
  Mask3D out = mask;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = cl.labels[i] == label;
  return out;
}

}  // namespace sparseg
