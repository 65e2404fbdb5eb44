#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparseg/volume.hpp"

namespace sparseg {

// Column-normalized atom matrix. Every column has unit l2 norm (within
// 1e-9); checked by validate().
struct Dictionary {
  Eigen::MatrixXd atoms;  // rows x K

  int rows() const { return static_cast<int>(atoms.rows()); }
  int atom_count() const { return static_cast<int>(atoms.cols()); }
  void validate() const;
};

// Sparse coefficient vector: support indices are strictly increasing and
// live in [0, length).
struct SparseCode {
  int length = 0;
  std::vector<int> support;
  std::vector<double> coeffs;

  Eigen::VectorXd to_dense() const;
  double l1_norm() const;
};

// Greedy orthogonal matching pursuit. Picks the atom with the largest
// |<residual, atom>| (lowest index wins ties), refits all coefficients by
// least squares, and stops after t0 atoms or once the residual norm
// drops to tol. A zero (or fully orthogonal) signal yields an empty code.
SparseCode omp(const Dictionary& d, const Eigen::VectorXd& y, int t0,
               double tol = 0.0);

struct KsvdResult {
  Dictionary dict;
  std::vector<SparseCode> codes;                // one per training column
  std::vector<double> objective_after_coding;   // ||Y - DA||_F^2 per iteration
  std::vector<double> objective_after_update;
};

// K-SVD: alternates OMP coding of all columns with a sequential sweep of
// rank-1 atom updates (atom and its coefficient row refit together on the
// restricted residual). The dictionary is initialized from k distinct
// training columns drawn with the seeded RNG; unused atoms and atoms more
// than 0.99-coherent with an earlier one are replaced by the currently
// worst-represented training column.
KsvdResult ksvd(const Eigen::MatrixXd& training, int atom_count, int t0,
                int iters, std::uint64_t seed);

// Minimizes ||y - D a||_2^2 + lambda * ||a||_1 by proximal gradient
// descent: step 1/L on the quadratic term (L an upper bound on the largest
// eigenvalue of D^T D, from power iteration) followed by soft-thresholding
// at lambda/(2L). Stops when the max coefficient change drops below tol.
SparseCode solve_l1(const Dictionary& d, const Eigen::VectorXd& y,
                    double lambda, int max_iter = 500, double tol = 1e-10);

Eigen::VectorXd reconstruct(const Dictionary& d, const SparseCode& a);

struct DictionaryMeta {
  std::string label;
  std::uint64_t seed = 0;
  int t0 = 0;
  int iters = 0;
  int training_columns = 0;
};

// Flat binary (row-major 64-bit floats) plus a .txt sidecar with shape,
// label and training metadata.
void save_dictionary(const Dictionary& d, const DictionaryMeta& meta,
                     const std::string& path);
std::pair<Dictionary, DictionaryMeta> load_dictionary(const std::string& path);

}  // namespace sparseg
