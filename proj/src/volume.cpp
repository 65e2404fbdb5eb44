#include "sparseg/volume.hpp"

#include <algorithm>
#include <cmath>

#include "sparseg/errors.hpp"

namespace sparseg {

Volume3D::Volume3D(int nx_, int ny_, int nz_, std::array<double, 3> spacing,
                   float fill)
    : nx(nx_), ny(ny_), nz(nz_),
      sx(spacing[0]), sy(spacing[1]), sz(spacing[2]) {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw ParamError("Volume3D: dimensions must be positive");
  if (sx <= 0 || sy <= 0 || sz <= 0)
    throw ParamError("Volume3D: spacing must be strictly positive");
  data.assign(size(), fill);
}

double Volume3D::min_spacing() const { return std::min({sx, sy, sz}); }

bool Volume3D::same_geometry(const Volume3D& o) const {
  return nx == o.nx && ny == o.ny && nz == o.nz && sx == o.sx && sy == o.sy &&
         sz == o.sz && ox == o.ox && oy == o.oy && oz == o.oz;
}

void Volume3D::validate() const {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw ParamError("Volume3D: dimensions must be positive");
  if (sx <= 0 || sy <= 0 || sz <= 0)
    throw ParamError("Volume3D: spacing must be strictly positive");
  if (data.size() != size())
    throw ParamError("Volume3D: data size does not match dimensions");
}

Mask3D::Mask3D(int nx_, int ny_, int nz_, std::array<double, 3> spacing,
               std::uint8_t fill)
    : nx(nx_), ny(ny_), nz(nz_),
      sx(spacing[0]), sy(spacing[1]), sz(spacing[2]) {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw ParamError("Mask3D: dimensions must be positive");
  if (sx <= 0 || sy <= 0 || sz <= 0)
    throw ParamError("Mask3D: spacing must be strictly positive");
  data.assign(size(), fill ? 1 : 0);
}

Mask3D Mask3D::like(const Volume3D& v, std::uint8_t fill) {
  Mask3D m(v.nx, v.ny, v.nz, {v.sx, v.sy, v.sz}, fill);
  m.ox = v.ox; m.oy = v.oy; m.oz = v.oz;
  return m;
}

std::size_t Mask3D::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data) n += (v != 0);
  return n;
}

bool Mask3D::same_geometry(const Mask3D& o) const {
  return nx == o.nx && ny == o.ny && nz == o.nz && sx == o.sx && sy == o.sy &&
         sz == o.sz && ox == o.ox && oy == o.oy && oz == o.oz;
}

bool Mask3D::same_geometry(const Volume3D& o) const {
  return nx == o.nx && ny == o.ny && nz == o.nz && sx == o.sx && sy == o.sy &&
         sz == o.sz && ox == o.ox && oy == o.oy && oz == o.oz;
}

void Mask3D::validate() const {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw ParamError("Mask3D: dimensions must be positive");
  if (sx <= 0 || sy <= 0 || sz <= 0)
    throw ParamError("Mask3D: spacing must be strictly positive");
  if (data.size() != size())
    throw ParamError("Mask3D: data size does not match dimensions");
}

Volume3D window_to_8bit(const Volume3D& vol, double center, double width) {
  if (width <= 0) throw ParamError("window_to_8bit: width must be positive");
  Volume3D out = vol;
  out.source_type = MetaElementType::Uchar;
  const double lo = center - width / 2.0;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double g = 255.0 * (static_cast<double>(vol.data[i]) - lo) / width;
    g = std::clamp(g, 0.0, 255.0);
    out.data[i] = static_cast<float>(std::floor(g + 0.5));  // round half-up
  }
  return out;
}

}  // namespace sparseg
