#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparseg/volume.hpp"

namespace sparseg {

enum class Connectivity { Six = 6, TwentySix = 26 };

// Axis-aligned voxel box, half-open: [x0,x1) x [y0,y1) x [z0,z1).
struct VoxelBox {
  int x0 = 0, y0 = 0, z0 = 0;
  int x1 = 0, y1 = 0, z1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0 || z1 <= z0; }
  bool contains(int x, int y, int z) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1 && z >= z0 && z < z1;
  }
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  int depth() const { return z1 - z0; }
};

struct ComponentLabels {
  std::vector<std::int32_t> labels;   // 0 = background, components 1..count
  std::vector<std::size_t> sizes;     // sizes[k-1] = voxel count of label k
  int count = 0;
};

// Labels are assigned in scan order (z, then y, then x), so the result is
// deterministic for a given mask.
ComponentLabels connected_components(const Mask3D& mask, Connectivity conn);

// Arithmetic mean of foreground voxel coordinates. Throws on empty mask.
std::array<double, 3> centroid(const Mask3D& mask);

// Tight bounding box of the foreground. Throws on empty mask.
VoxelBox bounding_box(const Mask3D& mask);

// Keep only the component with the given label.
Mask3D component_mask(const Mask3D& mask, const ComponentLabels& cl, int label);

}  // namespace sparseg
