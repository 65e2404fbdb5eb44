#include "sparseg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "sparseg/errors.hpp"
#include "sparseg/parallel.hpp"

namespace sparseg {

void Dictionary::validate() const {
  if (atoms.rows() < 1 || atoms.cols() < 1)
    throw ParamError("Dictionary: needs at least one row and one atom");
  for (int j = 0; j < atoms.cols(); ++j)
    if (std::abs(atoms.col(j).norm() - 1.0) > 1e-9)
      throw ParamError("Dictionary: atom " + std::to_string(j) +
                       " is not unit norm");
}

Eigen::VectorXd SparseCode::to_dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(length);
  for (std::size_t i = 0; i < support.size(); ++i) v(support[i]) = coeffs[i];
  return v;
}

double SparseCode::l1_norm() const {
  double s = 0;
  for (double c : coeffs) s += std::abs(c);
  return s;
}

SparseCode omp(const Dictionary& d, const Eigen::VectorXd& y, int t0,
               double tol) {
  if (y.size() != d.atoms.rows())
    throw ShapeError("omp: signal length does not match dictionary rows");
  if (t0 < 1) throw ParamError("omp: t0 must be >= 1");

  const int K = d.atom_count();
  SparseCode code;
  code.length = K;

  Eigen::VectorXd residual = y;
  std::vector<int> selected;
  Eigen::VectorXd coeffs;
  const double floor = 1e-13 * std::max(1.0, y.norm());

  while (static_cast<int>(selected.size()) < std::min(t0, K)) {
    // best-correlated atom, lowest index wins ties
    int best = -1;
    double best_corr = floor;
    for (int j = 0; j < K; ++j) {
      const double c = std::abs(d.atoms.col(j).dot(residual));
      if (c > best_corr) {
        best_corr = c;
        best = j;
      }
    }
    if (best < 0) break;
    if (std::find(selected.begin(), selected.end(), best) != selected.end())
      break;  // numerically stuck; the residual is already orthogonal
    selected.push_back(best);

    Eigen::MatrixXd A(d.atoms.rows(), selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i)
      A.col(static_cast<int>(i)) = d.atoms.col(selected[i]);
    coeffs = A.colPivHouseholderQr().solve(y);
    residual = y - A * coeffs;
    if (residual.norm() <= tol) break;
  }

  std::vector<std::size_t> order(selected.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return selected[a] < selected[b]; });
  for (std::size_t i : order) {
    code.support.push_back(selected[i]);
    code.coeffs.push_back(coeffs(static_cast<int>(i)));
  }
  return code;
}

namespace {

double frobenius_objective(const Eigen::MatrixXd& Y, const Dictionary& d,
                           const std::vector<SparseCode>& codes) {
  double obj = 0;
  for (int j = 0; j < Y.cols(); ++j) {
    Eigen::VectorXd r = Y.col(j);
    const SparseCode& c = codes[j];
    for (std::size_t i = 0; i < c.support.size(); ++i)
      r -= c.coeffs[i] * d.atoms.col(c.support[i]);
    obj += r.squaredNorm();
  }
  return obj;
}

// Residual of one signal with atom `skip` excluded from its code.
Eigen::VectorXd restricted_residual(const Eigen::MatrixXd& Y, const Dictionary& d,
                                    const SparseCode& c, int col, int skip) {
  Eigen::VectorXd r = Y.col(col);
  for (std::size_t i = 0; i < c.support.size(); ++i)
    if (c.support[i] != skip) r -= c.coeffs[i] * d.atoms.col(c.support[i]);
  return r;
}

// Worst-represented training column, considering only the distinct-column
// representatives so duplicated training sets behave like the original.
int worst_represented_column(const Eigen::MatrixXd& Y, const Dictionary& d,
                             const std::vector<SparseCode>& codes,
                             const std::vector<int>& unique_cols,
                             const std::vector<bool>& taken) {
  int worst = -1;
  double worst_err = -1;
  for (std::size_t u = 0; u < unique_cols.size(); ++u) {
    if (taken[u]) continue;
    const int j = unique_cols[u];
    Eigen::VectorXd r = Y.col(j);
    const SparseCode& c = codes[j];
    for (std::size_t i = 0; i < c.support.size(); ++i)
      r -= c.coeffs[i] * d.atoms.col(c.support[i]);
    const double e = r.squaredNorm();
    if (e > worst_err) {
      worst_err = e;
      worst = static_cast<int>(u);
    }
  }
  return worst;
}

}  // namespace

KsvdResult ksvd(const Eigen::MatrixXd& Y, int atom_count, int t0, int iters,
                std::uint64_t seed) {
  const int rows = static_cast<int>(Y.rows());
  const int N = static_cast<int>(Y.cols());
  if (iters < 1) throw ParamError("ksvd: iters must be >= 1");
  if (atom_count < 1) throw ParamError("ksvd: atom_count must be >= 1");
  if (t0 < 1) throw ParamError("ksvd: t0 must be >= 1");
  if (N < atom_count)
    throw ParamError("ksvd: need at least as many training columns as atoms");

  std::mt19937_64 rng(seed);

  // Initial dictionary: atom_count distinct training columns. Bit-identical
  // duplicates collapse before sampling, so duplicating the training set
  // does not change the initialization.
  std::vector<int> unique_cols;
  for (int j = 0; j < N; ++j) {
    if (Y.col(j).norm() < 1e-12) continue;
    bool dup = false;
    for (int u : unique_cols)
      if (Y.col(u) == Y.col(j)) {
        dup = true;
        break;
      }
    if (!dup) unique_cols.push_back(j);
  }
  std::shuffle(unique_cols.begin(), unique_cols.end(), rng);

  KsvdResult res;
  res.dict.atoms.resize(rows, atom_count);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int a = 0; a < atom_count; ++a) {
    if (a < static_cast<int>(unique_cols.size())) {
      res.dict.atoms.col(a) = Y.col(unique_cols[a]).normalized();
    } else {
      Eigen::VectorXd v(rows);
      for (int i = 0; i < rows; ++i) v(i) = gauss(rng);
      res.dict.atoms.col(a) = v.normalized();
    }
  }

  res.codes.assign(N, SparseCode{});

  for (int it = 0; it < iters; ++it) {
    // sparse coding phase
    parallel_for(N, [&](int j) {
      res.codes[j] = omp(res.dict, Y.col(j), t0, 0.0);
    });
    res.objective_after_coding.push_back(frobenius_objective(Y, res.dict, res.codes));

    // dictionary update sweep; each update sees the earlier ones
    std::vector<bool> replacement_taken(unique_cols.size(), false);
    for (int a = 0; a < atom_count; ++a) {
      std::vector<int> users;
      std::vector<std::size_t> user_slot;
      for (int j = 0; j < N; ++j) {
        const SparseCode& c = res.codes[j];
        for (std::size_t i = 0; i < c.support.size(); ++i)
          if (c.support[i] == a && c.coeffs[i] != 0.0) {
            users.push_back(j);
            user_slot.push_back(i);
            break;
          }
      }

      if (users.empty()) {
        const int repl = worst_represented_column(Y, res.dict, res.codes,
                                                  unique_cols, replacement_taken);
        if (repl >= 0) {
          res.dict.atoms.col(a) = Y.col(unique_cols[repl]).normalized();
          replacement_taken[repl] = true;
        }
        continue;
      }

      // Restricted residual matrix for the users of this atom.
      Eigen::MatrixXd E(rows, users.size());
      for (std::size_t u = 0; u < users.size(); ++u)
        E.col(static_cast<int>(u)) =
            restricted_residual(Y, res.dict, res.codes[users[u]], users[u], a);

      // Rank-1 refit by power iteration on E E^T, started from the current
      // atom so the restricted error can only decrease.
      Eigen::VectorXd u = res.dict.atoms.col(a);
      for (int pi = 0; pi < 60; ++pi) {
        Eigen::VectorXd w = E.transpose() * u;
        Eigen::VectorXd next = E * w;
        const double nn = next.norm();
        if (nn < 1e-300) break;
        next /= nn;
        const double delta = (next - u).norm();
        u = next;
        if (delta < 1e-13) break;
      }
      // deterministic sign: largest-magnitude entry positive
      int pivot = 0;
      for (int i = 1; i < rows; ++i)
        if (std::abs(u(i)) > std::abs(u(pivot))) pivot = i;
      if (u(pivot) < 0) u = -u;

      res.dict.atoms.col(a) = u;
      const Eigen::VectorXd row = E.transpose() * u;  // refit coefficients
      for (std::size_t k = 0; k < users.size(); ++k)
        res.codes[users[k]].coeffs[user_slot[k]] = row(static_cast<int>(k));
    }
    res.objective_after_update.push_back(frobenius_objective(Y, res.dict, res.codes));

    // Coherence cleanup happens after the objective snapshot and is skipped
    // on the last iteration so the returned codes match the dictionary.
    if (it + 1 == iters) break;
    for (int a = 1; a < atom_count; ++a) {
      double coh = 0;
      for (int b = 0; b < a; ++b)
        coh = std::max(coh, std::abs(res.dict.atoms.col(a).dot(res.dict.atoms.col(b))));
      if (coh > 0.99) {
        const int repl = worst_represented_column(Y, res.dict, res.codes,
                                                  unique_cols, replacement_taken);
        if (repl >= 0) {
          res.dict.atoms.col(a) = Y.col(unique_cols[repl]).normalized();
          replacement_taken[repl] = true;
        }
      }
    }
  }

  return res;
}

SparseCode solve_l1(const Dictionary& d, const Eigen::VectorXd& y,
                    double lambda, int max_iter, double tol) {
  if (y.size() != d.atoms.rows())
    throw ShapeError("solve_l1: signal length does not match dictionary rows");
  if (lambda < 0) throw ParamError("solve_l1: lambda must be >= 0");

  const int K = d.atom_count();
  const Eigen::MatrixXd& D = d.atoms;

  // Upper bound on the largest eigenvalue of D^T D by power iteration.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(K);
  for (int i = 0; i < K; ++i) v(i) += static_cast<double>(i) / (K + 1);
  v.normalize();
  double lmax = 1.0;
  for (int pi = 0; pi < 64; ++pi) {
    Eigen::VectorXd w = D.transpose() * (D * v);
    const double nn = w.norm();
    if (nn < 1e-300) break;
    lmax = nn;
    w /= nn;
    if ((w - v).norm() < 1e-12) {
      v = w;
      break;
    }
    v = w;
  }
  const double L = std::max(lmax * 1.01, 1e-12);
  const double thresh = lambda / (2.0 * L);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(K);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = D.transpose() * (D * alpha - y);
    double change = 0;
    for (int i = 0; i < K; ++i) {
      const double stepped = alpha(i) - grad(i) / L;
      double next = 0;
      if (stepped > thresh) next = stepped - thresh;
      else if (stepped < -thresh) next = stepped + thresh;
      change = std::max(change, std::abs(next - alpha(i)));
      alpha(i) = next;
    }
    if (change < tol) break;
  }

  SparseCode code;
  code.length = K;
  for (int i = 0; i < K; ++i)
    if (alpha(i) != 0.0) {
      code.support.push_back(i);
      code.coeffs.push_back(alpha(i));
    }
  return code;
}

Eigen::VectorXd reconstruct(const Dictionary& d, const SparseCode& a) {
  if (a.length != d.atom_count())
    throw ShapeError("reconstruct: code length does not match atom count");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d.atoms.rows());
  for (std::size_t i = 0; i < a.support.size(); ++i)
    out += a.coeffs[i] * d.atoms.col(a.support[i]);
  return out;
}

void save_dictionary(const Dictionary& d, const DictionaryMeta& meta,
                     const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw IoError("cannot write dictionary: " + path);
  for (int i = 0; i < d.atoms.rows(); ++i)
    for (int j = 0; j < d.atoms.cols(); ++j) {
      const double v = d.atoms(i, j);
      bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!bin) throw IoError("write failure: " + path);

  std::ofstream side(path + ".txt");
  if (!side) throw IoError("cannot write sidecar: " + path + ".txt");
  side << "rows " << d.atoms.rows() << "\n"
       << "atoms " << d.atoms.cols() << "\n"
       << "label " << meta.label << "\n"
       << "seed " << meta.seed << "\n"
       << "t0 " << meta.t0 << "\n"
       << "iters " << meta.iters << "\n"
       << "training_columns " << meta.training_columns << "\n";
}

std::pair<Dictionary, DictionaryMeta> load_dictionary(const std::string& path) {
  std::ifstream side(path + ".txt");
  if (!side) throw IoError("cannot read dictionary sidecar: " + path + ".txt");
  int rows = 0, atoms = 0;
  DictionaryMeta meta;
  std::string key;
  while (side >> key) {
    if (key == "rows") side >> rows;
    else if (key == "atoms") side >> atoms;
    else if (key == "label") side >> meta.label;
    else if (key == "seed") side >> meta.seed;
    else if (key == "t0") side >> meta.t0;
    else if (key == "iters") side >> meta.iters;
    else if (key == "training_columns") side >> meta.training_columns;
  }
  if (rows < 1 || atoms < 1)
    throw FormatError("bad dictionary sidecar: " + path + ".txt");

  Dictionary d;
  d.atoms.resize(rows, atoms);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw IoError("cannot read dictionary: " + path);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < atoms; ++j) {
      double v = 0;
      bin.read(reinterpret_cast<char*>(&v), sizeof(v));
      d.atoms(i, j) = v;
    }
  if (!bin) throw IoError("short read: " + path);
  return {d, meta};
}

}  // namespace sparseg
