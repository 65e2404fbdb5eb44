#pragma once

#include <string>
#include <vector>

#include "sparseg/config.hpp"
#include "sparseg/level_set.hpp"
#include "sparseg/metrics.hpp"
#include "sparseg/sparse.hpp"
#include "sparseg/volume.hpp"

namespace sparseg {

// Body region used for sampling non-liver features: voxels above the HU
// floor (excludes air) minus the liver mask.
Mask3D body_mask(const Volume3D& vol, double hu_threshold);

struct TrainedDictionaries {
  KsvdResult liver;
  KsvdResult nonliver;
  KsvdResult shape;
};

// Trains D_liver and D_nonliver on the per-case feature matrices and the
// shape dictionary on the liver masks.
TrainedDictionaries train_dictionaries(const std::vector<Volume3D>& volumes,
                                       const std::vector<Mask3D>& liver_masks,
                                       const PipelineConfig& config);

// Writes liver.dict / nonliver.dict / shape.dict (plus sidecars) and a
// train_log.csv with the per-iteration K-SVD objectives.
void save_trained_dictionaries(const TrainedDictionaries& t,
                               const PipelineConfig& config,
                               const std::string& out_dir);

struct LoadedDictionaries {
  Dictionary liver;
  Dictionary nonliver;
  Dictionary shape;
};

LoadedDictionaries load_trained_dictionaries(const std::string& dir);

// localize (with optional whole-volume fallback) + run_segmentation.
SegmentationResult segment_volume(const Volume3D& vol,
                                  const LoadedDictionaries& dicts,
                                  const PipelineConfig& config);

enum class SlicePlane { Axial, Coronal, Sagittal };

// Grayscale slices with the in-plane mask boundary drawn in red; returns the
// number of files written (one per slice, "slice_0000.png", ...).
int export_slices(const Volume3D& vol, const Mask3D& mask, SlicePlane plane,
                  const std::string& out_dir);

// In-plane boundary pixels of one slice (mask pixels with a 4-neighbor
// background or image edge); exposed for the overlay tests.
std::vector<std::uint8_t> slice_boundary(const Mask3D& mask, SlicePlane plane,
                                         int index);

}  // namespace sparseg
