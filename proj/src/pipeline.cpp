#include "sparseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sparseg/errors.hpp"
#include "sparseg/features.hpp"
#include "sparseg/metaimage.hpp"
#include "sparseg/png.hpp"
#include "sparseg/shape_prior.hpp"

namespace sparseg {

namespace fs = std::filesystem;

Mask3D body_mask(const Volume3D& vol, double hu_threshold) {
  Mask3D m = Mask3D::like(vol);
  for (std::size_t i = 0; i < vol.data.size(); ++i)
    m.data[i] = vol.data[i] >= hu_threshold;
  return m;
}

TrainedDictionaries train_dictionaries(const std::vector<Volume3D>& volumes,
                                       const std::vector<Mask3D>& liver_masks,
                                       const PipelineConfig& config) {
  config.validate();
  if (volumes.empty() || volumes.size() != liver_masks.size())
    throw ParamError("train_dictionaries: need matching volume/mask pairs");

  FeatureOptions fopts;
  fopts.window_center = config.window_center;
  fopts.window_width = config.window_width;
  fopts.levels = config.glcm_levels;
  fopts.assume_8bit = config.gray_mode;

  const int n = static_cast<int>(volumes.size());
  Eigen::MatrixXd y_liver(kFeatureCount, kFeatureColumns * n);
  Eigen::MatrixXd y_nonliver(kFeatureCount, kFeatureColumns * n);
  for (int i = 0; i < n; ++i) {
    if (!liver_masks[i].same_geometry(volumes[i]))
      throw GeometryError("train_dictionaries: volume/mask geometry mismatch");
    const FeatureMatrix fl = build_feature_matrix(volumes[i], liver_masks[i], fopts);
    y_liver.middleCols(i * kFeatureColumns, kFeatureColumns) = fl.values;

    Mask3D nonliver = body_mask(volumes[i], config.body_threshold_hu);
    for (std::size_t k = 0; k < nonliver.data.size(); ++k)
      if (liver_masks[i].data[k]) nonliver.data[k] = 0;
    if (nonliver.empty())
      throw EmptyInputError("train_dictionaries: empty non-liver body region");
    const FeatureMatrix fn = build_feature_matrix(volumes[i], nonliver, fopts);
    y_nonliver.middleCols(i * kFeatureColumns, kFeatureColumns) = fn.values;
  }

  TrainedDictionaries t;
  t.liver = ksvd(y_liver, config.feature_atoms, config.sparsity,
                 config.ksvd_iters, config.seed);
  t.nonliver = ksvd(y_nonliver, config.feature_atoms, config.sparsity,
                    config.ksvd_iters, config.seed + 1);
  t.shape = train_shape_dictionary(liver_masks, config.shape_atoms,
                                   config.sparsity, config.ksvd_iters,
                                   config.seed + 2);
  return t;
}

void save_trained_dictionaries(const TrainedDictionaries& t,
                               const PipelineConfig& config,
                               const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  auto meta = [&](const char* label, std::uint64_t seed, int cols) {
    DictionaryMeta m;
    m.label = label;
    m.seed = seed;
    m.t0 = config.sparsity;
    m.iters = config.ksvd_iters;
    m.training_columns = cols;
    return m;
  };
  save_dictionary(t.liver.dict,
                  meta("liver", config.seed, static_cast<int>(t.liver.codes.size())),
                  (dir / "liver.dict").string());
  save_dictionary(t.nonliver.dict,
                  meta("nonliver", config.seed + 1,
                       static_cast<int>(t.nonliver.codes.size())),
                  (dir / "nonliver.dict").string());
  save_dictionary(t.shape.dict,
                  meta("shape", config.seed + 2,
                       static_cast<int>(t.shape.codes.size())),
                  (dir / "shape.dict").string());

  std::ofstream log(dir / "train_log.csv");
  if (!log) throw IoError("cannot write training log in " + out_dir);
  log << "dictionary,iteration,objective_after_coding,objective_after_update\n";
  auto dump = [&](const char* name, const KsvdResult& r) {
    char buf[128];
    for (std::size_t i = 0; i < r.objective_after_coding.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.10g,%.10g\n", name, i + 1,
                    r.objective_after_coding[i], r.objective_after_update[i]);
      log << buf;
    }
  };
  dump("liver", t.liver);
  dump("nonliver", t.nonliver);
  dump("shape", t.shape);
}

LoadedDictionaries load_trained_dictionaries(const std::string& dir) {
  LoadedDictionaries d;
  const fs::path p(dir);
  auto load_one = [&](const char* name) {
    const std::string path = (p / name).string();
    if (!fs::exists(path) || !fs::exists(path + ".txt"))
      throw IoError("missing dictionary file: " + path);
    return load_dictionary(path).first;
  };
  d.liver = load_one("liver.dict");
  d.nonliver = load_one("nonliver.dict");
  d.shape = load_one("shape.dict");
  return d;
}

SegmentationResult segment_volume(const Volume3D& vol,
                                  const LoadedDictionaries& dicts,
                                  const PipelineConfig& config) {
  LocalizationOptions lopts;
  lopts.mode = config.gray_mode ? IntensityMode::Gray8 : IntensityMode::Hounsfield;
  lopts.flip_lr = config.flip_lr;

  SeedRegion seed;
  try {
    seed = localize(vol, lopts);
  } catch (const LocalizationError&) {
    if (!config.fallback_whole_volume) throw;
    seed = localize_whole_volume(vol, lopts);
  }
  return run_segmentation(vol, seed, dicts.liver, dicts.nonliver, dicts.shape,
                          config);
}

namespace {

struct SliceGeom {
  int width, height, count;
};

SliceGeom slice_geometry(const Mask3D& m, SlicePlane plane) {
  switch (plane) {
    case SlicePlane::Axial: return {m.nx, m.ny, m.nz};
    case SlicePlane::Coronal: return {m.nx, m.nz, m.ny};
    case SlicePlane::Sagittal: return {m.ny, m.nz, m.nx};
  }
  return {0, 0, 0};
}

inline void slice_to_volume(SlicePlane plane, int i, int j, int k,
                            int& x, int& y, int& z) {
  switch (plane) {
    case SlicePlane::Axial: x = i; y = j; z = k; break;
    case SlicePlane::Coronal: x = i; y = k; z = j; break;
    case SlicePlane::Sagittal: x = k; y = i; z = j; break;
  }
}

}  // namespace

std::vector<std::uint8_t> slice_boundary(const Mask3D& mask, SlicePlane plane,
                                         int index) {
  const SliceGeom g = slice_geometry(mask, plane);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(g.width) * g.height, 0);
  auto fg = [&](int i, int j) -> bool {
    if (i < 0 || i >= g.width || j < 0 || j >= g.height) return false;
    int x, y, z;
    slice_to_volume(plane, i, j, index, x, y, z);
    return mask.at(x, y, z);
  };
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      if (!fg(i, j)) continue;
      const bool boundary =
          !fg(i - 1, j) || !fg(i + 1, j) || !fg(i, j - 1) || !fg(i, j + 1);
      out[static_cast<std::size_t>(j) * g.width + i] = boundary;
    }
  return out;
}

int export_slices(const Volume3D& vol, const Mask3D& mask, SlicePlane plane,
                  const std::string& out_dir) {
  if (!mask.same_geometry(vol))
    throw GeometryError("export_slices: volume/mask geometry mismatch");
  fs::create_directories(out_dir);
  if (!fs::is_directory(out_dir))
    throw IoError("export_slices: cannot create output directory " + out_dir);

  float lo = vol.data.empty() ? 0.0f : vol.data[0];
  float hi = lo;
  for (float v : vol.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi > lo ? hi - lo : 1.0;

  const SliceGeom g = slice_geometry(mask, plane);
  std::vector<std::uint8_t> rgb;
  for (int k = 0; k < g.count; ++k) {
    rgb.assign(static_cast<std::size_t>(g.width) * g.height * 3, 0);
    const auto boundary = slice_boundary(mask, plane, k);
    for (int j = 0; j < g.height; ++j)
      for (int i = 0; i < g.width; ++i) {
        int x, y, z;
        slice_to_volume(plane, i, j, k, x, y, z);
        const std::size_t p = (static_cast<std::size_t>(j) * g.width + i) * 3;
        if (boundary[static_cast<std::size_t>(j) * g.width + i]) {
          rgb[p] = 255;
          rgb[p + 1] = 0;
          rgb[p + 2] = 0;
        } else {
          const double t = (vol.at(x, y, z) - lo) / range;
          const auto v = static_cast<std::uint8_t>(
              std::clamp(std::lround(t * 255.0), 0L, 255L));
          rgb[p] = rgb[p + 1] = rgb[p + 2] = v;
        }
      }
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%04d.png", k);
    write_png_rgb((fs::path(out_dir) / name).string(), g.width, g.height, rgb);
  }
  return g.count;
}

}  // namespace sparseg
