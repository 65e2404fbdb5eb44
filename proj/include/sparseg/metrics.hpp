#pragma once

#include <array>
#include <string>
#include <vector>

#include "sparseg/volume.hpp"

namespace sparseg {

enum class MetricId { Voe, Vd, AvgD, Rmsd, MaxD };

struct MetricsReport {
  double voe = 0;    // percent
  double vd = 0;     // signed percent
  double avgd = 0;   // mm
  double rmsd = 0;   // mm
  double maxd = 0;   // mm
  std::array<double, 5> scores{};  // per metric, clamped at 0
  double total = 0;                // mean of the five scores
};

// Volumetric overlap error, percent: 100 * (1 - |H&T| / |HuT|).
double voe(const Mask3D& h, const Mask3D& t);

// Relative volume difference, signed percent: 100 * (|H| - |T|) / |T|.
// Positive means over-segmentation.
double vd(const Mask3D& h, const Mask3D& t);

// Symmetric surface distances in mm: for every surface voxel of H the
// distance to the nearest surface voxel of T and vice versa (multiset
// union). Surface voxels are foreground voxels with a background 6-neighbor
// or a volume edge. Anisotropic spacing is respected.
std::vector<double> surface_distances(const Mask3D& h, const Mask3D& t);

double avgd(const std::vector<double>& distances);
double rmsd(const std::vector<double>& distances);
double maxd(const std::vector<double>& distances);

// Challenge score: max(0, 100 - 25 * value / ref). VD is scored on its
// magnitude. Reference values per metric: VOE 6.4, VD 4.7, AvgD 1.0,
// RMSD 1.8, MaxD 19.0.
double score(MetricId id, double value);
double score_reference(MetricId id);

// Least-squares fit of a reference from (value, score) pairs under the
// score model above; used to re-derive the reference constants.
double fit_score_reference(const std::vector<double>& values,
                           const std::vector<double>& scores);

MetricsReport evaluate(const Mask3D& h, const Mask3D& t);

// Report computed from already-known metric values (no masks involved).
MetricsReport report_from_metrics(const std::array<double, 5>& values);

std::string format_report_table(const MetricsReport& r);
std::string report_to_json(const MetricsReport& r);
std::string report_csv_header();
std::string report_csv_row(const std::string& case_id, const MetricsReport& r);

}  // namespace sparseg
