#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sparseg {

// On-disk element types supported by the MetaImage reader/writer.
enum class MetaElementType { Short, Uchar, Float };

// Scalar 3D grid with physical spacing. Storage is x-fastest:
// data[x + nx*(y + ny*z)]. Values are HU or normalized intensities.
// Treated as immutable once built; all operations on it are pure.
struct Volume3D {
  int nx = 0, ny = 0, nz = 0;
  double sx = 1.0, sy = 1.0, sz = 1.0;   // spacing, mm per voxel
  double ox = 0.0, oy = 0.0, oz = 0.0;   // origin, mm
  std::vector<float> data;
  MetaElementType source_type = MetaElementType::Float;

  Volume3D() = default;
  Volume3D(int nx_, int ny_, int nz_, std::array<double, 3> spacing = {1, 1, 1},
           float fill = 0.0f);

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                           static_cast<std::size_t>(ny) * z);
  }
  float at(int x, int y, int z) const { return data[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data[index(x, y, z)]; }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  double voxel_volume() const { return sx * sy * sz; }
  double min_spacing() const;
  bool same_geometry(const Volume3D& o) const;

  // Throws ParamError if dims/spacing/data size are inconsistent.
  void validate() const;
};

// Binary labels on the same grid as a Volume3D.
struct Mask3D {
  int nx = 0, ny = 0, nz = 0;
  double sx = 1.0, sy = 1.0, sz = 1.0;
  double ox = 0.0, oy = 0.0, oz = 0.0;
  std::vector<std::uint8_t> data;

  Mask3D() = default;
  Mask3D(int nx_, int ny_, int nz_, std::array<double, 3> spacing = {1, 1, 1},
         std::uint8_t fill = 0);
  // Mask sharing the geometry of a volume.
  static Mask3D like(const Volume3D& v, std::uint8_t fill = 0);

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                           static_cast<std::size_t>(ny) * z);
  }
  std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
  std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  double voxel_volume() const { return sx * sy * sz; }
  bool same_geometry(const Mask3D& o) const;
  bool same_geometry(const Volume3D& o) const;
  void validate() const;
};

// Linear map of [center-width/2, center+width/2] onto [0,255], clamped,
// rounded half-up and stored as floats.
Volume3D window_to_8bit(const Volume3D& vol, double center, double width);

}  // namespace sparseg
