#include "sparseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparseg/distance.hpp"
#include "sparseg/errors.hpp"

namespace sparseg {
namespace {

void check_geometry(const Mask3D& h, const Mask3D& t, const char* what) {
  if (!h.same_geometry(t))
    throw GeometryError(std::string(what) + ": mask geometry mismatch");
}

// Foreground voxels with a background 6-neighbor or touching the volume edge.
std::vector<std::uint8_t> surface_voxels(const Mask3D& m) {
  std::vector<std::uint8_t> surf(m.size(), 0);
  for (int z = 0; z < m.nz; ++z)
    for (int y = 0; y < m.ny; ++y)
      for (int x = 0; x < m.nx; ++x) {
        if (!m.at(x, y, z)) continue;
        bool edge = x == 0 || x == m.nx - 1 || y == 0 || y == m.ny - 1 ||
                    z == 0 || z == m.nz - 1;
        if (!edge) {
          edge = !m.at(x - 1, y, z) || !m.at(x + 1, y, z) ||
                 !m.at(x, y - 1, z) || !m.at(x, y + 1, z) ||
                 !m.at(x, y, z - 1) || !m.at(x, y, z + 1);
        }
        surf[m.index(x, y, z)] = edge;
      }
  return surf;
}

}  // namespace

double voe(const Mask3D& h, const Mask3D& t) {
  check_geometry(h, t, "voe");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < h.data.size(); ++i) {
    const bool a = h.data[i], b = t.data[i];
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) throw EmptyInputError("voe: both masks empty");
  return 100.0 * (1.0 - static_cast<double>(inter) / static_cast<double>(uni));
}

double vd(const Mask3D& h, const Mask3D& t) {
  check_geometry(h, t, "vd");
  const double nh = static_cast<double>(h.count());
  const double nt = static_cast<double>(t.count());
  if (nt == 0) throw EmptyInputError("vd: reference mask empty");
  return 100.0 * (nh - nt) / nt;
}

std::vector<double> surface_distances(const Mask3D& h, const Mask3D& t) {
  check_geometry(h, t, "surface_distances");
  if (h.empty() || t.empty())
    throw EmptyInputError("surface_distances: empty mask");

  const auto hs = surface_voxels(h);
  const auto ts = surface_voxels(t);

  const auto d_to_t = squared_distance_transform(ts, h.nx, h.ny, h.nz,
                                                 h.sx, h.sy, h.sz);
  const auto d_to_h = squared_distance_transform(hs, h.nx, h.ny, h.nz,
                                                 h.sx, h.sy, h.sz);
  std::vector<double> out;
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (hs[i]) out.push_back(std::sqrt(d_to_t[i]));
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i]) out.push_back(std::sqrt(d_to_h[i]));
  return out;
}

double avgd(const std::vector<double>& d) {
  if (d.empty()) throw EmptyInputError("avgd: no distances");
  double s = 0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

double rmsd(const std::vector<double>& d) {
  if (d.empty()) throw EmptyInputError("rmsd: no distances");
  double s = 0;
  for (double v : d) s += v * v;
  return std::sqrt(s / static_cast<double>(d.size()));
}

double maxd(const std::vector<double>& d) {
  if (d.empty()) throw EmptyInputError("maxd: no distances");
  return *std::max_element(d.begin(), d.end());
}

double score_reference(MetricId id) {
  switch (id) {
    case MetricId::Voe: return 6.4;
    case MetricId::Vd: return 4.7;
    case MetricId::AvgD: return 1.0;
    case MetricId::Rmsd: return 1.8;
    case MetricId::MaxD: return 19.0;
  }
  throw ParamError("score_reference: unknown metric");
}

double score(MetricId id, double value) {
  return std::max(0.0, 100.0 - 25.0 * std::abs(value) / score_reference(id));
}

double fit_score_reference(const std::vector<double>& values,
                           const std::vector<double>& scores) {
  if (values.size() != scores.size() || values.empty())
    throw ParamError("fit_score_reference: need matching nonempty samples");
  // 100 - s = (25/ref) * |v|; least squares through the origin for the slope
  double num = 0, den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::abs(values[i]);
    num += v * (100.0 - scores[i]);
    den += v * v;
  }
  if (den <= 0 || num <= 0)
    throw ParamError("fit_score_reference: degenerate values");
  return 25.0 * den / num;
}

MetricsReport report_from_metrics(const std::array<double, 5>& values) {
  MetricsReport r;
  r.voe = values[0];
  r.vd = values[1];
  r.avgd = values[2];
  r.rmsd = values[3];
  r.maxd = values[4];
  const std::array<MetricId, 5> ids = {MetricId::Voe, MetricId::Vd,
                                       MetricId::AvgD, MetricId::Rmsd,
                                       MetricId::MaxD};
  double total = 0;
  for (int i = 0; i < 5; ++i) {
    r.scores[i] = score(ids[i], values[i]);
    total += r.scores[i];
  }
  r.total = total / 5.0;
  return r;
}

MetricsReport evaluate(const Mask3D& h, const Mask3D& t) {
  const auto d = surface_distances(h, t);
  return report_from_metrics({voe(h, t), vd(h, t), avgd(d), rmsd(d), maxd(d)});
}

std::string format_report_table(const MetricsReport& r) {
  char buf[256];
  std::ostringstream os;
  os << "Metric      Value     Scr\n";
  std::snprintf(buf, sizeof(buf), "VOE  [%%]  %8.2f  %6.1f\n", r.voe, r.scores[0]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "VD   [%%]  %8.2f  %6.1f\n", r.vd, r.scores[1]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "AvgD [mm] %8.2f  %6.1f\n", r.avgd, r.scores[2]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "RMSD [mm] %8.2f  %6.1f\n", r.rmsd, r.scores[3]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "MaxD [mm] %8.2f  %6.1f\n", r.maxd, r.scores[4]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "Total Scr %16.1f\n", r.total);
  os << buf;
  return os.str();
}

std::string report_to_json(const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\n"
                "  \"voe\": %.6f,\n"
                "  \"vd\": %.6f,\n"
                "  \"avgd\": %.6f,\n"
                "  \"rmsd\": %.6f,\n"
                "  \"maxd\": %.6f,\n"
                "  \"scores\": [%.4f, %.4f, %.4f, %.4f, %.4f],\n"
                "  \"total\": %.4f\n"
                "}\n",
                r.voe, r.vd, r.avgd, r.rmsd, r.maxd, r.scores[0], r.scores[1],
                r.scores[2], r.scores[3], r.scores[4], r.total);
  return buf;
}

std::string report_csv_header() {
  return "case,voe,vd,avgd,rmsd,maxd,scr_voe,scr_vd,scr_avgd,scr_rmsd,scr_maxd,total";
}

std::string report_csv_row(const std::string& case_id, const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f",
                case_id.c_str(), r.voe, r.vd, r.avgd, r.rmsd, r.maxd,
                r.scores[0], r.scores[1], r.scores[2], r.scores[3], r.scores[4],
                r.total);
  return buf;
}

}  // namespace sparseg
