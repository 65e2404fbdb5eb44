#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparseg/config.hpp"
#include "sparseg/features.hpp"
#include "sparseg/localization.hpp"
#include "sparseg/sparse.hpp"
#include "sparseg/volume.hpp"

namespace sparseg {

// Smoothed step 0.5 * (1 + (2/pi) * atan(p / eps)) and its derivative.
// The final mask uses the sharp rule {p >= 0}.
double heaviside(double p, double eps);
double heaviside_delta(double p, double eps);

// Level-set field and bookkeeping. phi is positive inside.
struct LevelSetState {
  Volume3D phi;
  int iteration = 0;
  std::vector<double> energy_trace;
  double epsilon = 1.5;
  double lambda = 0.7;
  double alpha_l1 = 0;  // shape-code l1 mass, folded into the energy
};

// Pointwise foreground/background costs with g + g_complement == 1 exactly
// (g is snapped to a 2^-24 grid so the float complement is exact).
struct DataTermField {
  Volume3D g;
  Volume3D g_complement;

  static DataTermField balanced(const Volume3D& geometry_like);
};

DataTermField build_data_term(const Volume3D& global_norm,
                              const Volume3D& shape_norm);

// Squared OMP reconstruction residuals of every feature column against the
// liver and non-liver dictionaries. Codes are kept for re-weighting.
struct GlobalResidual {
  Eigen::ArrayXd liver;
  Eigen::ArrayXd nonliver;
  std::vector<SparseCode> liver_codes;
  std::vector<SparseCode> nonliver_codes;
};

GlobalResidual global_residual(const FeatureMatrix& features,
                               const Dictionary& d_liver,
                               const Dictionary& d_nonliver, int t0);

// Scales to [0,1] with the maximum mapping to exactly 1.0; an all-tiny
// field (max < 1e-12) comes back as all zeros.
Eigen::ArrayXd normalize_residual_field(const Eigen::ArrayXd& residuals);

// One explicit descent step: phi += dt * delta_eps(phi) *
// (-g + g_complement + lambda * curvature), curvature = div(grad phi /
// |grad phi|). Appends the discretized energy after the step.
LevelSetState evolve_step(const LevelSetState& state, const DataTermField& data,
                          double dt);

// Replaces phi by the signed Euclidean distance to its zero level set.
// Signs are preserved exactly; throws DegenerateStateError on an empty
// interior.
LevelSetState reinitialize(const LevelSetState& state);

Mask3D mask_from_phi(const Volume3D& phi);

// Sum of delta_eps(phi) * |grad phi| * voxel volume.
double discrete_perimeter(const Volume3D& phi, double eps);

// Data + length energy (the alpha l1 term is added by the caller).
double level_set_energy(const Volume3D& phi, const DataTermField& data,
                        double eps, double lambda);

struct TraceRow {
  int outer = 0;
  int inner = 0;
  double energy = 0;
  double interior_voxels = 0;
  int after_reinit = 0;
};

struct TraceTable {
  double lambda = 0;
  double dt = 0;
  double epsilon = 0;
  int inner_steps = 0;
  int reinit_every = 0;
  int max_outer = 0;
  std::vector<TraceRow> rows;

  std::string to_csv() const;
};

struct SegmentationResult {
  Mask3D mask;
  TraceTable trace;
  bool converged = false;
  int outer_iterations = 0;
};

// Outer iteratively re-weighted loop: re-extracts features and shape
// occupancy from the current interior, re-solves the sparse codes with the
// previous iteration's residuals as column weights, rebuilds the data term
// and runs the inner descent. Stops when the interior volume changes less
// than 0.1% on two consecutive outer iterations or max_outer is reached.
SegmentationResult run_segmentation(const Volume3D& vol, const SeedRegion& seed,
                                    const Dictionary& d_liver,
                                    const Dictionary& d_nonliver,
                                    const Dictionary& d_shape,
                                    const PipelineConfig& config);

}  // namespace sparseg
