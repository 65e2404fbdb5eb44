#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "sparseg/errors.hpp"
#include "sparseg/features.hpp"

#include "test_support.hpp"

using namespace sparseg;

namespace {

// 3x3 single-slice volume [[0,0,1],[0,1,1],[1,1,0]] (rows are y)
Volume3D example_slice() {
  Volume3D v(3, 3, 1);
  const float rows[3][3] = {{0, 0, 1}, {0, 1, 1}, {1, 1, 0}};
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) v.at(x, y, 0) = rows[y][x];
  return v;
}

Mask3D full_mask(const Volume3D& v) { return Mask3D::like(v, 1); }

}  // namespace

TEST_CASE("glcm hand-counted horizontal pairs") {
  const Volume3D v = example_slice();
  const GlcmMatrix g = glcm(v, full_mask(v), 0, 1, GlcmOffset::Deg0, 2, 0, 2);
  CHECK(g.total_pairs == 6);
  CHECK(g.at(0, 0) == 1);
  CHECK(g.at(0, 1) == 2);
  CHECK(g.at(1, 0) == 1);
  CHECK(g.at(1, 1) == 2);
}

TEST_CASE("glcm of a constant slab concentrates on the diagonal") {
  Volume3D v(5, 5, 1);
  for (auto& x : v.data) x = 3.0f;
  for (GlcmOffset off : {GlcmOffset::Deg0, GlcmOffset::Deg45, GlcmOffset::Deg90,
                         GlcmOffset::Deg135}) {
    const GlcmMatrix g = glcm(v, full_mask(v), 0, 1, off, 4, 0, 4);
    CHECK(g.at(3, 3) == g.total_pairs);
    const auto f = haralick(g);
    CHECK(f[1] == doctest::Approx(1.0));   // energy
    CHECK(f[0] == doctest::Approx(0.0));   // entropy
    CHECK(f[2] == doctest::Approx(0.0));   // contrast
    CHECK(f[6] == doctest::Approx(1.0));   // max probability
  }
}

TEST_CASE("glcm 90 degrees equals transposed slab at 0 degrees") {
  auto g = testsupport::rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Volume3D v = testsupport::random_volume(8, 8, 1, 0, 8, g);
    for (auto& x : v.data) x = std::floor(x);
    Volume3D vt(8, 8, 1);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) vt.at(x, y, 0) = v.at(y, x, 0);

    const GlcmMatrix a = glcm(v, full_mask(v), 0, 1, GlcmOffset::Deg90, 8, 0, 8);
    const GlcmMatrix b = glcm(vt, full_mask(vt), 0, 1, GlcmOffset::Deg0, 8, 0, 8);
    CHECK(a.counts == b.counts);
  }
}

TEST_CASE("glcm matches the brute-force pair enumeration bit-exactly") {
  auto g = testsupport::rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Volume3D v = testsupport::random_volume(8, 8, 2, 0, 32, g);
    for (auto& x : v.data) x = std::floor(x);
    Mask3D m = testsupport::random_mask(8, 8, 2, 0.7, g);
    m.at(4, 4, 0) = 1;  // keep the slab nonempty
    const int levels = 2 + static_cast<int>(trial % 31);
    for (GlcmOffset off : {GlcmOffset::Deg0, GlcmOffset::Deg45,
                           GlcmOffset::Deg90, GlcmOffset::Deg135}) {
      const GlcmMatrix a = glcm(v, m, 0, 2, off, levels, 0, 32);
      const GlcmMatrix b = testsupport::brute_glcm(v, m, 0, 2, off, levels, 0, 32);
      CHECK(a.total_pairs == b.total_pairs);
      CHECK(a.counts == b.counts);
    }
  }
}

TEST_CASE("glcm error paths") {
  const Volume3D v = example_slice();
  Mask3D empty = Mask3D::like(v);
  CHECK_THROWS_AS(glcm(v, empty, 0, 1, GlcmOffset::Deg0, 2, 0, 2),
                  EmptyInputError);
  CHECK_THROWS_AS(glcm(v, full_mask(v), 0, 1, GlcmOffset::Deg0, 1, 0, 2),
                  ParamError);
  GlcmMatrix zero;
  zero.levels = 2;
  zero.counts.assign(4, 0);
  CHECK_THROWS_AS(haralick(zero), EmptyInputError);
}

TEST_CASE("haralick from the hand example") {
  const Volume3D v = example_slice();
  const GlcmMatrix g = glcm(v, full_mask(v), 0, 1, GlcmOffset::Deg0, 2, 0, 2);
  const auto f = haralick(g);
  CHECK(f[1] == doctest::Approx(10.0 / 36.0));  // energy
}

TEST_CASE("haralick uniform distribution has energy 1/L^2") {
  GlcmMatrix g;
  g.levels = 4;
  g.counts.assign(16, 3);
  g.total_pairs = 48;
  const auto f = haralick(g);
  CHECK(f[1] == doctest::Approx(1.0 / 16.0));
  CHECK(f[6] == doctest::Approx(3.0 / 48.0));
}

TEST_CASE("haralick matches the direct-formula oracle") {
  auto g = testsupport::rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    Volume3D v = testsupport::random_volume(8, 8, 1, 0, 32, g);
    for (auto& x : v.data) x = std::floor(x);
    const int levels = 2 + static_cast<int>(trial % 31);
    const GlcmMatrix gm =
        glcm(v, full_mask(v), 0, 1, GlcmOffset::Deg45, levels, 0, 32);
    if (gm.total_pairs == 0) continue;
    const auto a = haralick(gm);
    const auto b = testsupport::brute_haralick(gm);
    for (int i = 0; i < 9; ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    // basic ranges
    CHECK(a[1] > 0.0);
    CHECK(a[1] <= 1.0);
    CHECK(a[0] >= 0.0);
    CHECK(a[6] > 0.0);
    CHECK(a[6] <= 1.0);
  }
}

TEST_CASE("volume properties of canonical shapes") {
  SUBCASE("single voxel") {
    Mask3D m(3, 3, 3);
    m.at(1, 1, 1) = 1;
    const auto vp = volume_properties(m);
    CHECK(vp.volume_mm3 == doctest::Approx(1.0));
    CHECK(vp.surface_mm2 == doctest::Approx(6.0));
    CHECK(vp.euler == 1);
  }

  SUBCASE("2x2x2 cube") {
    Mask3D m(4, 4, 4);
    for (int z = 1; z < 3; ++z)
      for (int y = 1; y < 3; ++y)
        for (int x = 1; x < 3; ++x) m.at(x, y, z) = 1;
    const auto vp = volume_properties(m);
    CHECK(vp.volume_mm3 == doctest::Approx(8.0));
    CHECK(vp.surface_mm2 == doctest::Approx(24.0));
    CHECK(vp.euler == 1);
  }

  SUBCASE("hollow 3x3x3 shell has Euler number 2") {
    Mask3D m(5, 5, 5);
    for (int z = 1; z < 4; ++z)
      for (int y = 1; y < 4; ++y)
        for (int x = 1; x < 4; ++x) m.at(x, y, z) = 1;
    m.at(2, 2, 2) = 0;
    const auto vp = volume_properties(m);
    CHECK(vp.euler == 2);
  }

  SUBCASE("empty mask throws") {
    Mask3D m(3, 3, 3);
    CHECK_THROWS_AS(volume_properties(m), EmptyInputError);
  }
}

TEST_CASE("volume properties scale as s^3 and s^2; Euler is spacing-invariant") {
  auto g = testsupport::rng(41);
  Mask3D m = testsupport::random_mask(8, 8, 8, 0.4, g);
  m.at(4, 4, 4) = 1;
  const auto base = volume_properties(m);

  Mask3D scaled = m;
  const double s = 2.5;
  scaled.sx = m.sx * s;
  scaled.sy = m.sy * s;
  scaled.sz = m.sz * s;
  const auto big = volume_properties(scaled);
  CHECK(big.volume_mm3 == doctest::Approx(base.volume_mm3 * s * s * s));
  CHECK(big.surface_mm2 == doctest::Approx(base.surface_mm2 * s * s));
  CHECK(big.euler == base.euler);
  CHECK(big.major_axis_mm == doctest::Approx(base.major_axis_mm * s));
  CHECK(big.minor_axis_mm == doctest::Approx(base.minor_axis_mm * s));
}

TEST_CASE("axis lengths follow the dominant direction") {
  Mask3D m(20, 6, 6);
  for (int x = 0; x < 20; ++x)
    for (int y = 2; y < 4; ++y)
      for (int z = 2; z < 4; ++z) m.at(x, y, z) = 1;
  const auto vp = volume_properties(m);
  CHECK(vp.major_axis_mm > vp.minor_axis_mm);
  // rod along x: 4 * std of the uniform x coordinates
  const double expected = 4.0 * std::sqrt((20.0 * 20.0 - 1.0) / 12.0);
  CHECK(vp.major_axis_mm == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("feature matrix shape and determinism") {
  auto g = testsupport::rng(53);
  Volume3D v = testsupport::random_volume(16, 16, 16, 0, 100, g);
  Mask3D m(16, 16, 16);
  for (int z = 4; z < 12; ++z)
    for (int y = 4; y < 12; ++y)
      for (int x = 4; x < 12; ++x) m.at(x, y, z) = 1;

  const FeatureMatrix a = build_feature_matrix(v, m);
  CHECK(a.values.rows() == 42);
  CHECK(a.values.cols() == 160);
  CHECK(a.values.allFinite());

  const FeatureMatrix b = build_feature_matrix(v, m);
  CHECK(a.values == b.values);

  Mask3D empty(16, 16, 16);
  CHECK_THROWS_AS(build_feature_matrix(v, empty), EmptyInputError);
}

TEST_CASE("constant spherical mask gives columnwise-constant texture rows") {
  Volume3D v(24, 24, 24);
  for (auto& x : v.data) x = 50.0f;
  Mask3D m(24, 24, 24);
  for (int z = 0; z < 24; ++z)
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) {
        const double dx = x - 11.5, dy = y - 11.5, dz = z - 11.5;
        m.at(x, y, z) = dx * dx + dy * dy + dz * dz <= 81.0;
      }
  const FeatureMatrix fm = build_feature_matrix(v, m);
  for (int r = 0; r < 36; ++r)
    for (int j = 1; j < 160; ++j)
      CHECK(fm.values(r, j) == doctest::Approx(fm.values(r, 0)));
  for (int j = 0; j < 160; ++j) CHECK(fm.values(36, j) == doctest::Approx(50.0));
}

TEST_CASE("texture rows are invariant to shifts within one quantization bin") {
  auto g = testsupport::rng(67);
  Volume3D v = testsupport::random_volume(12, 12, 12, 0, 200, g);
  Mask3D m(12, 12, 12);
  for (int z = 2; z < 10; ++z)
    for (int y = 2; y < 10; ++y)
      for (int x = 2; x < 10; ++x) m.at(x, y, z) = 1;

  // snap every voxel to its bin center, then shift by less than half a bin
  FeatureOptions opts;
  opts.assume_8bit = true;
  const double bin = 256.0 / opts.levels;
  Volume3D snapped = v;
  for (auto& x : snapped.data)
    x = static_cast<float>((std::floor(x / bin) + 0.5) * bin);
  Volume3D shifted = snapped;
  for (auto& x : shifted.data) x += 0.2f * static_cast<float>(bin);

  const FeatureMatrix a = build_feature_matrix(snapped, m, opts);
  const FeatureMatrix b = build_feature_matrix(shifted, m, opts);
  for (int r = 0; r < 36; ++r)
    for (int j = 0; j < 160; ++j)
      CHECK(a.values(r, j) == b.values(r, j));
}

TEST_CASE("feature matrix is z-translation invariant") {
  Volume3D v(12, 12, 32);
  for (int z = 0; z < 32; ++z)
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x)
        v.at(x, y, z) = static_cast<float>(40 + 10 * ((x + y) % 2));
  Mask3D m1(12, 12, 32), m2(12, 12, 32);
  for (int z = 0; z < 8; ++z)
    for (int y = 3; y < 9; ++y)
      for (int x = 3; x < 9; ++x) {
        m1.at(x, y, z + 2) = 1;
        m2.at(x, y, z + 17) = 1;
      }

  const FeatureMatrix a = build_feature_matrix(v, m1);
  const FeatureMatrix b = build_feature_matrix(v, m2);
  CHECK(a.values == b.values);
}

TEST_CASE("feature matrix round-trips through the binary export") {
  auto g = testsupport::rng(73);
  Volume3D v = testsupport::random_volume(10, 10, 10, 0, 150, g);
  Mask3D m(10, 10, 10);
  for (int z = 2; z < 8; ++z)
    for (int y = 2; y < 8; ++y)
      for (int x = 2; x < 8; ++x) m.at(x, y, z) = 1;
  const FeatureMatrix fm = build_feature_matrix(v, m);

  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "sparseg_fm.bin").string();
  save_feature_matrix(fm, path);
  const FeatureMatrix back = load_feature_matrix(path);
  CHECK(back.values == fm.values);
  CHECK(back.z_min == fm.z_min);
  CHECK(back.z_max == fm.z_max);
}
