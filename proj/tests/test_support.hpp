#pragma once

// Shared helpers for the test suites: deterministic RNG wrappers, random
// mask/volume builders, and independent brute-force oracles that the
// implementations are checked against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "sparseg/features.hpp"
#include "sparseg/volume.hpp"

namespace testsupport {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline sparseg::Mask3D random_mask(int nx, int ny, int nz, double fill,
                                   std::mt19937_64& g,
                                   std::array<double, 3> spacing = {1, 1, 1}) {
  sparseg::Mask3D m(nx, ny, nz, spacing);
  std::bernoulli_distribution bit(fill);
  for (auto& v : m.data) v = bit(g);
  return m;
}

inline sparseg::Volume3D random_volume(int nx, int ny, int nz, double lo,
                                       double hi, std::mt19937_64& g,
                                       std::array<double, 3> spacing = {1, 1, 1}) {
  sparseg::Volume3D v(nx, ny, nz, spacing);
  std::uniform_real_distribution<double> val(lo, hi);
  for (auto& x : v.data) x = static_cast<float>(val(g));
  return v;
}

// ---------------------------------------------------------------------------
// brute-force GLCM: plain double loop over all in-mask pairs of a slab
inline sparseg::GlcmMatrix brute_glcm(const sparseg::Volume3D& vol,
                                      const sparseg::Mask3D& mask, int z0, int z1,
                                      sparseg::GlcmOffset off, int levels,
                                      double lo, double hi) {
  sparseg::GlcmMatrix g;
  g.levels = levels;
  g.offset = off;
  g.counts.assign(static_cast<std::size_t>(levels) * levels, 0);
  int dx = 0, dy = 0;
  switch (off) {
    case sparseg::GlcmOffset::Deg0: dx = 1; dy = 0; break;
    case sparseg::GlcmOffset::Deg45: dx = 1; dy = 1; break;
    case sparseg::GlcmOffset::Deg90: dx = 0; dy = 1; break;
    case sparseg::GlcmOffset::Deg135: dx = -1; dy = 1; break;
  }
  auto bin = [&](double v) {
    int b = static_cast<int>(std::floor((v - lo) * levels / (hi - lo)));
    return std::clamp(b, 0, levels - 1);
  };
  for (int z = z0; z < z1; ++z)
    for (int y = 0; y < vol.ny; ++y)
      for (int x = 0; x < vol.nx; ++x) {
        const int qx = x + dx, qy = y + dy;
        if (qx < 0 || qx >= vol.nx || qy < 0 || qy >= vol.ny) continue;
        if (!mask.at(x, y, z) || !mask.at(qx, qy, z)) continue;
        ++g.counts[static_cast<std::size_t>(bin(vol.at(x, y, z))) * levels +
                   bin(vol.at(qx, qy, z))];
        ++g.total_pairs;
      }
  return g;
}

// direct-formula Haralick oracle, written independently from the normalized
// matrix definition
inline std::array<double, 9> brute_haralick(const sparseg::GlcmMatrix& g) {
  const int L = g.levels;
  const double total = static_cast<double>(g.total_pairs);
  std::vector<double> p(static_cast<std::size_t>(L) * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      p[static_cast<std::size_t>(i) * L + j] = g.at(i, j) / total;

  double mu_r = 0, mu_c = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      mu_r += i * p[static_cast<std::size_t>(i) * L + j];
      mu_c += j * p[static_cast<std::size_t>(i) * L + j];
    }
  double var_r = 0, var_c = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double q = p[static_cast<std::size_t>(i) * L + j];
      var_r += (i - mu_r) * (i - mu_r) * q;
      var_c += (j - mu_c) * (j - mu_c) * q;
    }

  std::array<double, 9> f{};
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double q = p[static_cast<std::size_t>(i) * L + j];
      if (q > 0) f[0] -= q * std::log(q);
      f[1] += q * q;
      f[2] += (i - j) * (i - j) * q;
      f[3] += q / (1.0 + std::abs(i - j));
      f[4] += i * q;
      f[5] += (i - mu_r) * (j - mu_c) * q;
      f[6] = std::max(f[6], q);
      f[7] += q / (1.0 + (i - j) * (i - j));
      f[8] += (i + j - mu_r - mu_c) * (i + j - mu_r - mu_c) * q;
    }
  const double sigma = std::sqrt(var_r) * std::sqrt(var_c);
  f[5] = sigma > 1e-12 ? f[5] / sigma : 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// O(S^2) symmetric surface distance oracle
inline std::vector<std::array<int, 3>> surface_points(const sparseg::Mask3D& m) {
  std::vector<std::array<int, 3>> pts;
  auto bg = [&](int x, int y, int z) {
    return !m.in_bounds(x, y, z) || !m.at(x, y, z);
  };
  for (int z = 0; z < m.nz; ++z)
    for (int y = 0; y < m.ny; ++y)
      for (int x = 0; x < m.nx; ++x) {
        if (!m.at(x, y, z)) continue;
        if (bg(x - 1, y, z) || bg(x + 1, y, z) || bg(x, y - 1, z) ||
            bg(x, y + 1, z) || bg(x, y, z - 1) || bg(x, y, z + 1))
          pts.push_back({x, y, z});
      }
  return pts;
}

inline std::vector<double> brute_surface_distances(const sparseg::Mask3D& h,
                                                   const sparseg::Mask3D& t) {
  const auto hs = surface_points(h);
  const auto ts = surface_points(t);
  const double wx = h.sx * h.sx, wy = h.sy * h.sy, wz = h.sz * h.sz;
  auto nearest = [&](const std::array<int, 3>& p,
                     const std::vector<std::array<int, 3>>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : set) {
      const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
      const double d = dz * dz * wz + (dy * dy * wy + dx * dx * wx);
      best = std::min(best, d);
    }
    return std::sqrt(best);
  };
  std::vector<double> out;
  for (const auto& p : hs) out.push_back(nearest(p, ts));
  for (const auto& p : ts) out.push_back(nearest(p, hs));
  return out;
}

}  // namespace testsupport
