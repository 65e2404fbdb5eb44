#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include "sparseg/distance.hpp"
#include "sparseg/errors.hpp"
#include "sparseg/metaimage.hpp"
#include "sparseg/morphology.hpp"
#include "sparseg/volume.hpp"

#include "test_support.hpp"

using namespace sparseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "sparseg_volume_tests";
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("metaimage loads a zero int16 volume") {
  const fs::path h = temp_dir() / "zero.mhd";
  const fs::path raw = temp_dir() / "zero.raw";
  write_text(h,
             "ObjectType = Image\nNDims = 3\nDimSize = 4 4 4\n"
             "ElementSpacing = 1 1 1\nElementType = MET_SHORT\n"
             "ElementDataFile = zero.raw\n");
  std::vector<std::int16_t> zeros(64, 0);
  std::ofstream(raw, std::ios::binary)
      .write(reinterpret_cast<const char*>(zeros.data()), 128);

  const Volume3D v = load_metaimage(h.string());
  CHECK(v.nx == 4);
  CHECK(v.ny == 4);
  CHECK(v.nz == 4);
  for (float x : v.data) CHECK(x == 0.0f);
}

TEST_CASE("metaimage reads anisotropic spacing") {
  const fs::path h = temp_dir() / "aniso.mhd";
  write_text(h,
             "ObjectType = Image\nNDims = 3\nDimSize = 2 2 2\n"
             "ElementSpacing = 0.7 0.7 5.0\nElementType = MET_UCHAR\n"
             "ElementDataFile = aniso.raw\n");
  std::vector<std::uint8_t> raw(8, 7);
  std::ofstream(temp_dir() / "aniso.raw", std::ios::binary)
      .write(reinterpret_cast<const char*>(raw.data()), 8);

  const Volume3D v = load_metaimage(h.string());
  CHECK(v.sx == doctest::Approx(0.7));
  CHECK(v.sy == doctest::Approx(0.7));
  CHECK(v.sz == doctest::Approx(5.0));
}

TEST_CASE("metaimage round trip is bit identical for all element types") {
  auto g = testsupport::rng(11);
  std::uniform_int_distribution<int> hu(-1000, 1000);
  Volume3D v(8, 8, 8, {0.56, 0.56, 1.0});
  for (auto& x : v.data) x = static_cast<float>(hu(g));

  for (MetaElementType t :
       {MetaElementType::Short, MetaElementType::Float}) {
    const fs::path h = temp_dir() / "rt.mhd";
    save_metaimage(v, h.string(), t);
    const Volume3D w = load_metaimage(h.string());
    CHECK(w.nx == v.nx);
    CHECK(w.sx == v.sx);
    CHECK(w.sy == v.sy);
    CHECK(w.sz == v.sz);
    CHECK(w.data == v.data);
    CHECK(w.source_type == t);
  }
}

TEST_CASE("metaimage header formats integral spacing with a decimal") {
  Volume3D v(2, 2, 2, {0.56, 0.56, 1.0});
  const fs::path h = temp_dir() / "fmt.mhd";
  save_metaimage(v, h.string(), MetaElementType::Float);
  std::ifstream f(h);
  std::string line, spacing_line;
  while (std::getline(f, line))
    if (line.rfind("ElementSpacing", 0) == 0) spacing_line = line;
  CHECK(spacing_line == "ElementSpacing = 0.56 0.56 1.0");
}

TEST_CASE("metaimage error paths") {
  CHECK_THROWS_AS(save_metaimage(Volume3D(2, 2, 2), ""), IoError);
  CHECK_THROWS_AS(load_metaimage(temp_dir() / "does_not_exist.mhd"), IoError);

  // oversized raw
  const fs::path h = temp_dir() / "big.mhd";
  write_text(h,
             "ObjectType = Image\nNDims = 3\nDimSize = 2 2 2\n"
             "ElementType = MET_UCHAR\nElementDataFile = big.raw\n");
  std::vector<std::uint8_t> raw(9, 0);
  std::ofstream(temp_dir() / "big.raw", std::ios::binary)
      .write(reinterpret_cast<const char*>(raw.data()), 9);
  CHECK_THROWS_AS(load_metaimage(h.string()), IoError);

  // unsupported element type
  const fs::path h2 = temp_dir() / "badtype.mhd";
  write_text(h2,
             "ObjectType = Image\nNDims = 3\nDimSize = 2 2 2\n"
             "ElementType = MET_DOUBLE\nElementDataFile = big.raw\n");
  CHECK_THROWS_AS(load_metaimage(h2.string()), FormatError);

  // compressed rejected
  const fs::path h3 = temp_dir() / "comp.mhd";
  write_text(h3,
             "ObjectType = Image\nNDims = 3\nDimSize = 2 2 2\n"
             "CompressedData = True\nElementType = MET_UCHAR\n"
             "ElementDataFile = big.raw\n");
  CHECK_THROWS_AS(load_metaimage(h3.string()), FormatError);
}

TEST_CASE("metaimage honors big-endian raw data") {
  const fs::path h = temp_dir() / "msb.mhd";
  write_text(h,
             "ObjectType = Image\nNDims = 3\nDimSize = 2 1 1\n"
             "ElementType = MET_SHORT\nElementByteOrderMSB = True\n"
             "ElementDataFile = msb.raw\n");
  const std::uint8_t raw[4] = {0x01, 0x02, 0x00, 0xff};  // 258, 255 big-endian
  std::ofstream(temp_dir() / "msb.raw", std::ios::binary)
      .write(reinterpret_cast<const char*>(raw), 4);
  const Volume3D v = load_metaimage(h.string());
  CHECK(v.data[0] == 258.0f);
  CHECK(v.data[1] == 255.0f);
}

TEST_CASE("window_to_8bit midpoint and clamping") {
  Volume3D v(3, 1, 1);
  v.data = {50.0f, -1000.0f, 1000.0f};
  const Volume3D w = window_to_8bit(v, 50.0, 350.0);
  CHECK(w.data[0] == 128.0f);  // 127.5 rounded half-up
  CHECK(w.data[1] == 0.0f);
  CHECK(w.data[2] == 255.0f);
  CHECK_THROWS_AS(window_to_8bit(v, 0.0, 0.0), ParamError);
}

TEST_CASE("window_to_8bit maps the liver band only approximately at the default window") {
  // Solving 255*(x - c + w/2)/w = g for (40,125) and (60,155) gives the
  // exact window c = 41.666.., w = 170; the default (50, 350) lands the
  // band at gray 120..135 instead.
  Volume3D v(2, 1, 1);
  v.data = {40.0f, 60.0f};

  const double w_exact = 255.0 * (60.0 - 40.0) / (155.0 - 125.0);
  const double c_exact = 40.0 - 125.0 * w_exact / 255.0 + w_exact / 2.0;
  CHECK(w_exact == doctest::Approx(170.0));
  CHECK(c_exact == doctest::Approx(41.6666666667));
  const Volume3D e = window_to_8bit(v, c_exact, w_exact);
  CHECK(e.data[0] == 125.0f);
  CHECK(e.data[1] == 155.0f);

  const Volume3D d = window_to_8bit(v, 50.0, 350.0);
  CHECK(d.data[0] == 120.0f);  // 120.21 rounded
  CHECK(d.data[1] == 135.0f);  // 134.79 rounded
}

TEST_CASE("connected components") {
  SUBCASE("all zero mask has no components") {
    Mask3D m(4, 4, 4);
    const auto cl = connected_components(m, Connectivity::TwentySix);
    CHECK(cl.count == 0);
    CHECK(cl.sizes.empty());
  }

  SUBCASE("two disjoint cubes") {
    Mask3D m(8, 8, 8);
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
          m.at(x, y, z) = 1;
          m.at(x + 5, y + 5, z + 5) = 1;
        }
    const auto cl = connected_components(m, Connectivity::TwentySix);
    CHECK(cl.count == 2);
    CHECK(cl.sizes[0] == 8);
    CHECK(cl.sizes[1] == 8);
  }

  SUBCASE("single corner voxel") {
    Mask3D m(4, 4, 4);
    m.at(3, 3, 3) = 1;
    const auto cl = connected_components(m, Connectivity::Six);
    CHECK(cl.count == 1);
    CHECK(cl.sizes[0] == 1);
  }

  SUBCASE("diagonal voxels split under 6-connectivity only") {
    Mask3D m(4, 4, 4);
    m.at(1, 1, 1) = 1;
    m.at(2, 2, 2) = 1;
    CHECK(connected_components(m, Connectivity::Six).count == 2);
    CHECK(connected_components(m, Connectivity::TwentySix).count == 1);
  }

  SUBCASE("labels partition the foreground and agree across 26-neighbors") {
    auto g = testsupport::rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Mask3D m = testsupport::random_mask(10, 10, 10, 0.35, g);
      const auto cl = connected_components(m, Connectivity::TwentySix);
      for (int z = 0; z < m.nz; ++z)
        for (int y = 0; y < m.ny; ++y)
          for (int x = 0; x < m.nx; ++x) {
            const auto lab = cl.labels[m.index(x, y, z)];
            if (!m.at(x, y, z)) {
              CHECK(lab == 0);
              continue;
            }
            CHECK(lab >= 1);
            CHECK(lab <= cl.count);
            for (int dz = -1; dz <= 1; ++dz)
              for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                  if (!m.in_bounds(x + dx, y + dy, z + dz)) continue;
                  if (!m.at(x + dx, y + dy, z + dz)) continue;
                  CHECK(cl.labels[m.index(x + dx, y + dy, z + dz)] == lab);
                }
          }
      std::size_t total = 0;
      for (auto s : cl.sizes) total += s;
      CHECK(total == m.count());
    }
  }
}

TEST_CASE("centroid") {
  Mask3D m(10, 10, 10);
  SUBCASE("empty mask throws") { CHECK_THROWS_AS(centroid(m), EmptyInputError); }

  SUBCASE("single voxel") {
    m.at(5, 6, 7) = 1;
    const auto c = centroid(m);
    CHECK(c[0] == 5.0);
    CHECK(c[1] == 6.0);
    CHECK(c[2] == 7.0);
  }

  SUBCASE("two voxels average") {
    m.at(0, 0, 0) = 1;
    m.at(2, 0, 0) = 1;
    const auto c = centroid(m);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 0.0);
    CHECK(c[2] == 0.0);
  }

  SUBCASE("solid box") {
    for (int z = 4; z < 8; ++z)
      for (int y = 4; y < 8; ++y)
        for (int x = 4; x < 8; ++x) m.at(x, y, z) = 1;
    const auto c = centroid(m);
    CHECK(c[0] == doctest::Approx(5.5));
    CHECK(c[1] == doctest::Approx(5.5));
    CHECK(c[2] == doctest::Approx(5.5));
  }

  SUBCASE("centroid lies inside the bounding box") {
    auto g = testsupport::rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      Mask3D r = testsupport::random_mask(9, 9, 9, 0.2, g);
      if (r.empty()) continue;
      const auto c = centroid(r);
      const VoxelBox b = bounding_box(r);
      CHECK(c[0] >= b.x0);
      CHECK(c[0] <= b.x1 - 1);
      CHECK(c[1] >= b.y0);
      CHECK(c[1] <= b.y1 - 1);
      CHECK(c[2] >= b.z0);
      CHECK(c[2] <= b.z1 - 1);
    }
  }
}

TEST_CASE("squared distance transform matches brute force") {
  auto g = testsupport::rng(23);
  std::uniform_real_distribution<double> sp(0.4, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = 7, ny = 6, nz = 5;
    const double sx = sp(g), sy = sp(g), sz = sp(g);
    std::vector<std::uint8_t> feat(nx * ny * nz, 0);
    std::bernoulli_distribution bit(0.15);
    bool any = false;
    for (auto& f : feat) {
      f = bit(g);
      any |= f;
    }
    if (!any) feat[0] = 1;

    const auto d = squared_distance_transform(feat, nx, ny, nz, sx, sy, sz);
    const double wx = sx * sx, wy = sy * sy, wz = sz * sz;
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          double best = std::numeric_limits<double>::infinity();
          for (int qz = 0; qz < nz; ++qz)
            for (int qy = 0; qy < ny; ++qy)
              for (int qx = 0; qx < nx; ++qx) {
                if (!feat[qx + nx * (qy + ny * qz)]) continue;
                const double dx = x - qx, dy = y - qy, dz = z - qz;
                best = std::min(best, dz * dz * wz + (dy * dy * wy + dx * dx * wx));
              }
          CHECK(d[x + nx * (y + ny * z)] == doctest::Approx(best).epsilon(1e-12));
        }
  }
}

TEST_CASE("signed distance preserves the interior sign") {
  auto g = testsupport::rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Mask3D m = testsupport::random_mask(8, 8, 8, 0.3, g, {0.5, 0.75, 1.25});
    if (m.empty()) m.at(4, 4, 4) = 1;
    const Volume3D phi = signed_distance(m);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      if (m.data[i]) CHECK(phi.data[i] > 0.0f);
      else CHECK(phi.data[i] < 0.0f);
    }
  }
  Mask3D empty(4, 4, 4);
  CHECK_THROWS_AS(signed_distance(empty), DegenerateStateError);
}
