#pragma once

#include <cstdint>
#include <string>

namespace sparseg {

// All solver knobs in one place. Serialized as JSON with full defaulting;
// CLI flags override file values.
struct PipelineConfig {
  double lambda = 0.7;

  // dictionary learning
  int feature_atoms = 64;   // K_c, per label dictionary
  int shape_atoms = 128;    // K_s
  int sparsity = 5;         // t0
  int ksvd_iters = 30;
  std::uint64_t seed = 17;

  // level set
  double epsilon = 1.5;     // Heaviside smoothing width, voxels
  double dt = 0.0;          // 0 = auto: 0.4 * min(spacing)^2 / max(lambda, 1)
  int inner_steps = 40;
  int reinit_every = 10;
  int max_outer = 15;

  // l1 solver
  int l1_max_iter = 400;
  double l1_tol = 1e-10;

  // localization / features
  bool gray_mode = false;   // volume already windowed to 8-bit
  bool flip_lr = false;
  bool fallback_whole_volume = false;
  double window_center = 50.0;
  double window_width = 350.0;
  int glcm_levels = 32;
  double body_threshold_hu = -500.0;

  // paths
  std::string dictionary_dir;
  std::string output_path;
  std::string trace_path;

  void validate() const;
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const PipelineConfig&) const = default;
};

}  // namespace sparseg
