// Command-line front end: dictionary training, end-to-end segmentation,
// metric evaluation and slice-overlay export.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sparseg/config.hpp"
#include "sparseg/errors.hpp"
#include "sparseg/features.hpp"
#include "sparseg/level_set.hpp"
#include "sparseg/metaimage.hpp"
#include "sparseg/metrics.hpp"
#include "sparseg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sparseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitLocalization = 2;
constexpr int kExitDivergence = 3;

struct CommonFlags {
  std::string config_path;
  double lambda = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool gray_mode = false;
  bool hu_mode = false;
  bool flip_lr = false;
  int max_outer = -1;
  int inner_steps = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--lambda", f.lambda, "regularization weight");
  cmd->add_option("--seed", f.seed, "RNG seed")->each([&](const std::string&) {
    f.seed_set = true;
  });
  cmd->add_flag("--gray-mode", f.gray_mode,
                "volume is already windowed to 8-bit gray");
  cmd->add_flag("--hu-mode", f.hu_mode, "volume is in Hounsfield units (default)");
  cmd->add_flag("--flip-lr", f.flip_lr, "patient-right is at high x");
  cmd->add_option("--max-outer", f.max_outer, "outer iteration cap");
  cmd->add_option("--inner-steps", f.inner_steps, "descent steps per outer iteration");
}

PipelineConfig make_config(const CommonFlags& f) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) cfg = PipelineConfig::load(f.config_path);
  if (f.lambda > 0) cfg.lambda = f.lambda;
  if (f.seed_set) cfg.seed = f.seed;
  if (f.gray_mode) cfg.gray_mode = true;
  if (f.hu_mode) cfg.gray_mode = false;
  if (f.flip_lr) cfg.flip_lr = true;
  if (f.max_outer > 0) cfg.max_outer = f.max_outer;
  if (f.inner_steps >= 0) cfg.inner_steps = f.inner_steps;
  cfg.validate();
  return cfg;
}

int cmd_train(const std::vector<std::string>& files, const CommonFlags& flags,
              const std::string& out_dir, const std::string& dump_features) {
  if (files.empty() || files.size() % 2 != 0) {
    std::cerr << "train: expected VOLUME MASK pairs\n";
    return kExitUsage;
  }
  PipelineConfig cfg = make_config(flags);

  std::vector<Volume3D> vols;
  std::vector<Mask3D> masks;
  for (std::size_t i = 0; i < files.size(); i += 2) {
    vols.push_back(load_metaimage(files[i]));
    masks.push_back(load_mask_metaimage(files[i + 1]));
  }

  if (!dump_features.empty()) {
    fs::create_directories(dump_features);
    FeatureOptions fopts;
    fopts.window_center = cfg.window_center;
    fopts.window_width = cfg.window_width;
    fopts.levels = cfg.glcm_levels;
    fopts.assume_8bit = cfg.gray_mode;
    for (std::size_t i = 0; i < vols.size(); ++i) {
      const FeatureMatrix fm = build_feature_matrix(vols[i], masks[i], fopts);
      char name[32];
      std::snprintf(name, sizeof(name), "case_%03zu.feat", i);
      save_feature_matrix(fm, (fs::path(dump_features) / name).string());
    }
  }

  const TrainedDictionaries t = train_dictionaries(vols, masks, cfg);
  save_trained_dictionaries(t, cfg, out_dir);
  std::cout << "wrote liver.dict nonliver.dict shape.dict train_log.csv to "
            << out_dir << "\n";
  return kExitOk;
}

int cmd_segment(const std::string& volume_path, const CommonFlags& flags,
                const std::string& dict_dir, const std::string& out_path,
                const std::string& trace_path, bool fallback_whole) {
  PipelineConfig cfg = make_config(flags);
  if (fallback_whole) cfg.fallback_whole_volume = true;

  const Volume3D vol = load_metaimage(volume_path);
  const LoadedDictionaries dicts = load_trained_dictionaries(dict_dir);

  try {
    const SegmentationResult res = segment_volume(vol, dicts, cfg);
    save_metaimage(res.mask, out_path);
    if (!trace_path.empty()) {
      std::ofstream t(trace_path);
      if (!t) throw IoError("cannot write trace: " + trace_path);
      t << res.trace.to_csv();
    }
    std::cout << "segmentation " << (res.converged ? "converged" : "stopped")
              << " after " << res.outer_iterations << " outer iterations; mask "
              << out_path << "\n";
    return kExitOk;
  } catch (const DivergenceError& e) {
    if (!trace_path.empty()) {
      std::ofstream t(trace_path);
      if (t) t << e.trace;
    }
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  }
}

std::array<double, 5> parse_metric_vector(const std::string& csv) {
  std::array<double, 5> v{};
  std::stringstream ss(csv);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',') && i < 5) v[i++] = std::stod(tok);
  if (i != 5) throw ParamError("--from-metrics needs 5 comma-separated values");
  return v;
}

void emit_report(const MetricsReport& r, const std::string& json_path) {
  std::cout << format_report_table(r);
  if (!json_path.empty()) {
    std::ofstream j(json_path);
    if (!j) throw IoError("cannot write JSON report: " + json_path);
    j << report_to_json(r);
  }
}

int cmd_evaluate(const std::string& result_path, const std::string& truth_path,
                 const std::string& json_path, const std::string& batch_path,
                 const std::string& csv_path, const std::string& from_metrics) {
  if (!from_metrics.empty()) {
    emit_report(report_from_metrics(parse_metric_vector(from_metrics)), json_path);
    return kExitOk;
  }
  if (!batch_path.empty()) {
    std::ifstream list(batch_path);
    if (!list) throw IoError("cannot open batch list: " + batch_path);
    std::ostringstream csv;
    csv << report_csv_header() << "\n";
    std::string line;
    int case_no = 0;
    while (std::getline(list, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw FormatError("batch line needs RESULT,TRUTH: " + line);
      const Mask3D h = load_mask_metaimage(line.substr(0, comma));
      const Mask3D t = load_mask_metaimage(line.substr(comma + 1));
      csv << report_csv_row("case_" + std::to_string(++case_no), evaluate(h, t))
          << "\n";
    }
    if (csv_path.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream out(csv_path);
      if (!out) throw IoError("cannot write CSV: " + csv_path);
      out << csv.str();
    }
    return kExitOk;
  }
  if (result_path.empty() || truth_path.empty()) {
    std::cerr << "evaluate: need RESULT and TRUTH masks\n";
    return kExitUsage;
  }
  const Mask3D h = load_mask_metaimage(result_path);
  const Mask3D t = load_mask_metaimage(truth_path);
  emit_report(evaluate(h, t), json_path);
  return kExitOk;
}

int cmd_export(const std::string& volume_path, const std::string& mask_path,
               const std::string& plane_name, const std::string& out_dir) {
  SlicePlane plane;
  if (plane_name == "axial") plane = SlicePlane::Axial;
  else if (plane_name == "coronal") plane = SlicePlane::Coronal;
  else if (plane_name == "sagittal") plane = SlicePlane::Sagittal;
  else {
    std::cerr << "export-slices: plane must be axial, coronal or sagittal\n";
    return kExitUsage;
  }
  const Volume3D vol = load_metaimage(volume_path);
  const Mask3D mask = load_mask_metaimage(mask_path);
  const int n = export_slices(vol, mask, plane, out_dir);
  std::cout << "wrote " << n << " slices to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-representation liver segmentation toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* train = app.add_subcommand("train", "train the three dictionaries");
  std::vector<std::string> train_files;
  std::string train_out, dump_features;
  train->add_option("files", train_files, "VOLUME MASK pairs (MetaImage)");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--dump-features", dump_features,
                    "also write per-case feature matrices here");
  add_common(train, flags);

  auto* segment = app.add_subcommand("segment", "segment a CT volume");
  std::string seg_volume, seg_dicts, seg_out, seg_trace;
  bool fallback_whole = false;
  segment->add_option("volume", seg_volume, "input volume (MetaImage)")->required();
  segment->add_option("--dicts", seg_dicts, "directory with trained dictionaries")
      ->required();
  segment->add_option("--out", seg_out, "output mask path")->required();
  segment->add_option("--trace", seg_trace, "energy trace CSV path");
  segment->add_flag("--fallback-whole", fallback_whole,
                    "fall back to the whole-volume largest component");
  add_common(segment, flags);

  auto* evaluate = app.add_subcommand("evaluate", "compute the five challenge metrics");
  std::string eval_result, eval_truth, eval_json, eval_batch, eval_csv, from_metrics;
  evaluate->add_option("result", eval_result, "segmentation result mask");
  evaluate->add_option("truth", eval_truth, "ground-truth mask");
  evaluate->add_option("--json", eval_json, "write the report as JSON");
  evaluate->add_option("--batch", eval_batch, "CSV list of RESULT,TRUTH pairs");
  evaluate->add_option("--csv", eval_csv, "write batch results to this CSV");
  evaluate->add_option("--from-metrics", from_metrics,
                       "score a raw metric vector voe,vd,avgd,rmsd,maxd")
      ->group("");  // test hook, hidden from help
  add_common(evaluate, flags);

  auto* export_cmd = app.add_subcommand("export-slices",
                                        "write slice overlays as PNG");
  std::string exp_volume, exp_mask, exp_plane = "axial", exp_out;
  export_cmd->add_option("volume", exp_volume)->required();
  export_cmd->add_option("mask", exp_mask)->required();
  export_cmd->add_option("--plane", exp_plane, "axial | coronal | sagittal");
  export_cmd->add_option("--out", exp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed())
      return cmd_train(train_files, flags, train_out, dump_features);
    if (segment->parsed())
      return cmd_segment(seg_volume, flags, seg_dicts, seg_out, seg_trace,
                         fallback_whole);
    if (evaluate->parsed())
      return cmd_evaluate(eval_result, eval_truth, eval_json, eval_batch,
                          eval_csv, from_metrics);
    if (export_cmd->parsed())
      return cmd_export(exp_volume, exp_mask, exp_plane, exp_out);
  } catch (const LocalizationError& e) {
    std::cerr << "localization failure: " << e.what() << "\n";
    return kExitLocalization;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
