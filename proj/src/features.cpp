#include "sparseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "sparseg/errors.hpp"
#include "sparseg/parallel.hpp"

namespace sparseg {

std::array<int, 2> glcm_offset_vector(GlcmOffset o) {
  switch (o) {
    case GlcmOffset::Deg0: return {1, 0};
    case GlcmOffset::Deg45: return {1, 1};
    case GlcmOffset::Deg90: return {0, 1};
    case GlcmOffset::Deg135: return {-1, 1};
  }
  return {1, 0};
}

namespace {

inline int quantize(double v, int levels, double lo, double hi) {
  int b = static_cast<int>(std::floor((v - lo) * levels / (hi - lo)));
  return std::clamp(b, 0, levels - 1);
}

}  // namespace

GlcmMatrix glcm(const Volume3D& vol, const Mask3D& mask, int z0, int z1,
                GlcmOffset offset, int levels, double lo, double hi) {
  if (levels < 2) throw ParamError("glcm: levels must be >= 2");
  if (hi <= lo) throw ParamError("glcm: empty quantization range");
  if (!mask.same_geometry(vol)) throw GeometryError("glcm: geometry mismatch");
  if (z0 < 0 || z1 > vol.nz || z0 >= z1) throw ParamError("glcm: bad slab range");

  GlcmMatrix g;
  g.levels = levels;
  g.offset = offset;
  g.counts.assign(static_cast<std::size_t>(levels) * levels, 0);
  const auto [dx, dy] = glcm_offset_vector(offset);

  bool any_voxel = false;
  for (int z = z0; z < z1; ++z)
    for (int y = 0; y < vol.ny; ++y)
      for (int x = 0; x < vol.nx; ++x) {
        if (!mask.at(x, y, z)) continue;
        any_voxel = true;
        const int qx = x + dx, qy = y + dy;
        if (qx < 0 || qx >= vol.nx || qy < 0 || qy >= vol.ny) continue;
        if (!mask.at(qx, qy, z)) continue;
        const int a = quantize(vol.at(x, y, z), levels, lo, hi);
        const int b = quantize(vol.at(qx, qy, z), levels, lo, hi);
        ++g.counts[static_cast<std::size_t>(a) * levels + b];
        ++g.total_pairs;
      }
  if (!any_voxel) throw EmptyInputError("glcm: slab contains no mask voxels");
  return g;
}

std::array<double, 9> haralick(const GlcmMatrix& g) {
  if (g.total_pairs == 0) throw EmptyInputError("haralick: zero-pair matrix");
  const int L = g.levels;
  const double total = static_cast<double>(g.total_pairs);

  // Marginal means/variances of the normalized matrix.
  double mu_r = 0, mu_c = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = g.at(i, j) / total;
      mu_r += i * p;
      mu_c += j * p;
    }
  double var_r = 0, var_c = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = g.at(i, j) / total;
      var_r += (i - mu_r) * (i - mu_r) * p;
      var_c += (j - mu_c) * (j - mu_c) * p;
    }

  double entropy = 0, energy = 0, contrast = 0, homogeneity = 0, sum_mean = 0,
         correlation = 0, max_prob = 0, idm = 0, cluster = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = g.at(i, j) / total;
      if (p > 0) entropy -= p * std::log(p);
      energy += p * p;
      contrast += (i - j) * (i - j) * p;
      homogeneity += p / (1.0 + std::abs(i - j));
      sum_mean += i * p;
      correlation += (i - mu_r) * (j - mu_c) * p;
      max_prob = std::max(max_prob, p);
      idm += p / (1.0 + (i - j) * (i - j));
      const double t = i + j - mu_r - mu_c;
      cluster += t * t * p;
    }
  const double sigma = std::sqrt(var_r) * std::sqrt(var_c);
  correlation = sigma > 1e-12 ? correlation / sigma : 0.0;

  return {entropy, energy,   contrast, homogeneity, sum_mean,
          correlation, max_prob, idm,      cluster};
}

VolumeProperties volume_properties(const Mask3D& mask) {
  const std::size_t n = mask.count();
  if (n == 0) throw EmptyInputError("volume_properties: empty mask");

  VolumeProperties vp;
  vp.volume_mm3 = static_cast<double>(n) * mask.voxel_volume();

  const double face_x = mask.sy * mask.sz;
  const double face_y = mask.sx * mask.sz;
  const double face_z = mask.sx * mask.sy;
  auto fg = [&](int x, int y, int z) -> bool {
    return mask.in_bounds(x, y, z) && mask.at(x, y, z);
  };

  double surface = 0;
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x) {
        if (!mask.at(x, y, z)) continue;
        if (!fg(x - 1, y, z)) surface += face_x;
        if (!fg(x + 1, y, z)) surface += face_x;
        if (!fg(x, y - 1, z)) surface += face_y;
        if (!fg(x, y + 1, z)) surface += face_y;
        if (!fg(x, y, z - 1)) surface += face_z;
        if (!fg(x, y, z + 1)) surface += face_z;
      }
  vp.surface_mm2 = surface;

  // Euler characteristic of the union of voxel cubes: count the vertices,
  // edges, faces and cells of the cubical complex they span.
  long V = 0, E = 0, F = 0;
  const long C = static_cast<long>(n);
  for (int z = 0; z <= mask.nz; ++z)
    for (int y = 0; y <= mask.ny; ++y)
      for (int x = 0; x <= mask.nx; ++x) {
        // vertex at lattice point (x,y,z): any of the 8 incident voxels
        bool v = false;
        for (int dz = -1; dz <= 0 && !v; ++dz)
          for (int dy = -1; dy <= 0 && !v; ++dy)
            for (int dx = -1; dx <= 0 && !v; ++dx)
              v = fg(x + dx, y + dy, z + dz);
        V += v;
        // edges leaving this lattice point in +x/+y/+z
        if (x < mask.nx) {
          bool e = fg(x, y - 1, z - 1) || fg(x, y, z - 1) || fg(x, y - 1, z) || fg(x, y, z);
          E += e;
        }
        if (y < mask.ny) {
          bool e = fg(x - 1, y, z - 1) || fg(x, y, z - 1) || fg(x - 1, y, z) || fg(x, y, z);
          E += e;
        }
        if (z < mask.nz) {
          bool e = fg(x - 1, y - 1, z) || fg(x, y - 1, z) || fg(x - 1, y, z) || fg(x, y, z);
          E += e;
        }
        // faces with min corner here, normal to z/y/x
        if (x < mask.nx && y < mask.ny) F += fg(x, y, z - 1) || fg(x, y, z);
        if (x < mask.nx && z < mask.nz) F += fg(x, y - 1, z) || fg(x, y, z);
        if (y < mask.ny && z < mask.nz) F += fg(x - 1, y, z) || fg(x, y, z);
      }
  vp.euler = V - E + F - C;

  // Ellipsoid-equivalent axis lengths from the coordinate covariance (mm).
  double mx = 0, my = 0, mz = 0;
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x)
        if (mask.at(x, y, z)) {
          mx += x * mask.sx;
          my += y * mask.sy;
          mz += z * mask.sz;
        }
  mx /= n; my /= n; mz /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int z = 0; z < mask.nz; ++z)
    for (int y = 0; y < mask.ny; ++y)
      for (int x = 0; x < mask.nx; ++x)
        if (mask.at(x, y, z)) {
          Eigen::Vector3d d(x * mask.sx - mx, y * mask.sy - my, z * mask.sz - mz);
          cov += d * d.transpose();
        }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const auto ev = es.eigenvalues();  // ascending
  vp.minor_axis_mm = 4.0 * std::sqrt(std::max(0.0, ev(0)));
  vp.major_axis_mm = 4.0 * std::sqrt(std::max(0.0, ev(2)));
  return vp;
}

int FeatureMatrix::column_of_z(int z) const {
  const int extent = z_max - z_min + 1;
  const int zc = std::clamp(z, z_min, z_max);
  int col = static_cast<int>((static_cast<long long>(zc - z_min) * kFeatureColumns) / extent);
  return std::clamp(col, 0, kFeatureColumns - 1);
}

FeatureMatrix build_feature_matrix(const Volume3D& vol, const Mask3D& mask,
                                   const FeatureOptions& opts) {
  if (!mask.same_geometry(vol))
    throw GeometryError("build_feature_matrix: geometry mismatch");

  // z extent of the mask
  int zmin = -1, zmax = -1;
  for (int z = 0; z < mask.nz; ++z) {
    bool any = false;
    for (int y = 0; y < mask.ny && !any; ++y)
      for (int x = 0; x < mask.nx && !any; ++x) any = mask.at(x, y, z);
    if (any) {
      if (zmin < 0) zmin = z;
      zmax = z;
    }
  }
  if (zmin < 0) throw EmptyInputError("build_feature_matrix: empty mask");

  const Volume3D windowed =
      opts.assume_8bit ? vol : window_to_8bit(vol, opts.window_center, opts.window_width);
  const double qlo = 0.0, qhi = 256.0;

  FeatureMatrix fm;
  fm.values = Eigen::MatrixXd::Zero(kFeatureCount, kFeatureColumns);
  fm.slab_ranges.resize(kFeatureColumns);
  fm.z_min = zmin;
  fm.z_max = zmax;

  const VolumeProperties vp = volume_properties(mask);
  const double extent = static_cast<double>(zmax - zmin + 1);

  // Map the mask's z-extent onto 160 uniform slabs. A slab whose window
  // contains no integer slice borrows the nearest slice, so upsampled
  // columns repeat slices instead of going empty.
  for (int j = 0; j < kFeatureColumns; ++j) {
    const double a = zmin + j * extent / kFeatureColumns;
    const double b = zmin + (j + 1) * extent / kFeatureColumns;
    int lo = static_cast<int>(std::ceil(a));
    int hi = static_cast<int>(std::ceil(b)) - 1;
    if (lo > hi) {
      const double center = (a + b) / 2.0 - 0.5;
      lo = hi = std::clamp(static_cast<int>(std::lround(center)), zmin, zmax);
    }
    fm.slab_ranges[j] = {std::clamp(lo, zmin, zmax), std::clamp(hi, zmin, zmax)};
  }

  static const std::array<GlcmOffset, 4> kOffsets = {
      GlcmOffset::Deg0, GlcmOffset::Deg45, GlcmOffset::Deg90, GlcmOffset::Deg135};

  parallel_for(kFeatureColumns, [&](int j) {
    const auto [slo, shi] = fm.slab_ranges[j];

    // does the slab contain any mask voxel at all?
    bool any = false;
    double sum = 0;
    std::size_t cnt = 0;
    for (int z = slo; z <= shi; ++z)
      for (int y = 0; y < mask.ny; ++y)
        for (int x = 0; x < mask.nx; ++x)
          if (mask.at(x, y, z)) {
            any = true;
            sum += vol.at(x, y, z);
            ++cnt;
          }

    for (int o = 0; o < 4; ++o) {
      std::array<double, 9> feat{};
      if (any) {
        GlcmMatrix g = glcm(windowed, mask, slo, shi + 1, kOffsets[o],
                            opts.levels, qlo, qhi);
        if (g.total_pairs > 0) feat = haralick(g);
      }
      for (int f = 0; f < 9; ++f) fm.values(o * 9 + f, j) = feat[f];
    }
    fm.values(36, j) = cnt ? sum / cnt : 0.0;
    fm.values(37, j) = vp.volume_mm3;
    fm.values(38, j) = vp.surface_mm2;
    fm.values(39, j) = static_cast<double>(vp.euler);
    fm.values(40, j) = vp.major_axis_mm;
    fm.values(41, j) = vp.minor_axis_mm;
  });

  return fm;
}

const std::vector<std::string>& feature_row_names() {
  static const std::vector<std::string> names = [] {
    const std::array<const char*, 9> f = {
        "entropy", "energy", "contrast", "homogeneity", "sum_mean",
        "correlation", "max_probability", "inverse_difference_moment",
        "cluster_tendency"};
    const std::array<const char*, 4> o = {"0deg", "45deg", "90deg", "135deg"};
    std::vector<std::string> v;
    for (const char* off : o)
      for (const char* feat : f)
        v.push_back(std::string("glcm_") + off + "_" + feat);
    v.emplace_back("mean_intensity");
    v.emplace_back("volume_mm3");
    v.emplace_back("surface_mm2");
    v.emplace_back("euler_number");
    v.emplace_back("major_axis_mm");
    v.emplace_back("minor_axis_mm");
    return v;
  }();
  return names;
}

void save_feature_matrix(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw IoError("cannot write feature matrix: " + path);
  for (int i = 0; i < fm.values.rows(); ++i)
    for (int j = 0; j < fm.values.cols(); ++j) {
      const double v = fm.values(i, j);
      bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!bin) throw IoError("write failure: " + path);

  std::ofstream side(path + ".txt");
  if (!side) throw IoError("cannot write sidecar: " + path + ".txt");
  side << "rows " << fm.values.rows() << "\n"
       << "cols " << fm.values.cols() << "\n"
       << "z_min " << fm.z_min << "\n"
       << "z_max " << fm.z_max << "\n"
       << "row_order\n";
  for (const auto& n : feature_row_names()) side << "  " << n << "\n";
}

FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream side(path + ".txt");
  if (!side) throw IoError("cannot read sidecar: " + path + ".txt");
  std::string key;
  int rows = 0, cols = 0, zmin = 0, zmax = 0;
  while (side >> key) {
    if (key == "rows") side >> rows;
    else if (key == "cols") side >> cols;
    else if (key == "z_min") side >> zmin;
    else if (key == "z_max") side >> zmax;
    else if (key == "row_order") break;
  }
  if (rows != kFeatureCount || cols != kFeatureColumns)
    throw FormatError("unexpected feature matrix shape in " + path);

  FeatureMatrix fm;
  fm.values.resize(rows, cols);
  fm.z_min = zmin;
  fm.z_max = zmax;
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw IoError("cannot read feature matrix: " + path);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double v = 0;
      bin.read(reinterpret_cast<char*>(&v), sizeof(v));
      fm.values(i, j) = v;
    }
  if (!bin) throw IoError("short read: " + path);
  return fm;
}

}  // namespace sparseg
