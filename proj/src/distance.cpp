#include "sparseg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparseg/errors.hpp"

namespace sparseg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D lower envelope of parabolas w*(q-v)^2 + f(v) (Felzenszwalb-Huttenlocher).
// Sites with f = +inf contribute no parabola. d and f may not alias.
void envelope_1d(const double* f, double* d, int n, double w,
                 int* v, double* z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    for (;;) {
      const int r = v[k];
      s = (f[q] + w * q * q - f[r] - w * r * r) / (2.0 * w * (q - r));
      if (s > z[k]) break;
      if (--k < 0) break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const int r = v[j];
    const double dq = static_cast<double>(q - r);
    d[q] = dq * dq * w + f[r];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature,
                                               int nx, int ny, int nz,
                                               double sx, double sy, double sz) {
  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = feature[i] ? 0.0 : kInf;

  const int max_n = std::max({nx, ny, nz});
  std::vector<double> f(max_n), d(max_n), z(max_n + 1);
  std::vector<int> v(max_n);
  auto idx = [&](int x, int y, int z_) {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                           static_cast<std::size_t>(ny) * z_);
  };

  // x pass
  for (int zz = 0; zz < nz; ++zz)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[x] = dist[idx(x, y, zz)];
      envelope_1d(f.data(), d.data(), nx, sx * sx, v.data(), z.data());
      for (int x = 0; x < nx; ++x) dist[idx(x, y, zz)] = d[x];
    }
  // y pass
  for (int zz = 0; zz < nz; ++zz)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[y] = dist[idx(x, y, zz)];
      envelope_1d(f.data(), d.data(), ny, sy * sy, v.data(), z.data());
      for (int y = 0; y < ny; ++y) dist[idx(x, y, zz)] = d[y];
    }
  // z pass
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int zz = 0; zz < nz; ++zz) f[zz] = dist[idx(x, y, zz)];
      envelope_1d(f.data(), d.data(), nz, sz * sz, v.data(), z.data());
      for (int zz = 0; zz < nz; ++zz) dist[idx(x, y, zz)] = d[zz];
    }
  return dist;
}

Volume3D signed_distance(const Mask3D& interior) {
  interior.validate();
  const std::size_t n = interior.size();
  std::vector<std::uint8_t> inside(interior.data.begin(), interior.data.end());
  std::vector<std::uint8_t> outside(n);
  std::size_t in_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    inside[i] = inside[i] ? 1 : 0;
    outside[i] = inside[i] ? 0 : 1;
    in_count += inside[i];
  }
  if (in_count == 0)
    throw DegenerateStateError("signed_distance: empty interior");

  const auto d_to_outside = squared_distance_transform(
      outside, interior.nx, interior.ny, interior.nz,
      interior.sx, interior.sy, interior.sz);
  const auto d_to_inside = squared_distance_transform(
      inside, interior.nx, interior.ny, interior.nz,
      interior.sx, interior.sy, interior.sz);

  Volume3D phi(interior.nx, interior.ny, interior.nz,
               {interior.sx, interior.sy, interior.sz});
  phi.ox = interior.ox; phi.oy = interior.oy; phi.oz = interior.oz;

  const double half = 0.5 * std::min({interior.sx, interior.sy, interior.sz});
  const double cap = std::sqrt(
      interior.nx * interior.sx * interior.nx * interior.sx +
      interior.ny * interior.sy * interior.ny * interior.sy +
      interior.nz * interior.sz * interior.nz * interior.sz);
  for (std::size_t i = 0; i < n; ++i) {
    double d = inside[i] ? d_to_outside[i] : d_to_inside[i];
    d = d == kInf ? cap : std::sqrt(d) - half;
    phi.data[i] = static_cast<float>(inside[i] ? d : -d);
  }
  return phi;
}

}  // namespace sparseg
