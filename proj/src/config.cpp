#include "sparseg/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sparseg/errors.hpp"

namespace sparseg {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (lambda <= 0) throw ParamError("config: lambda must be positive");
  if (feature_atoms < 1 || shape_atoms < 1)
    throw ParamError("config: atom counts must be >= 1");
  if (sparsity < 1) throw ParamError("config: sparsity must be >= 1");
  if (ksvd_iters < 1) throw ParamError("config: ksvd_iters must be >= 1");
  if (epsilon <= 0) throw ParamError("config: epsilon must be positive");
  if (dt < 0) throw ParamError("config: dt must be >= 0");
  if (inner_steps < 0) throw ParamError("config: inner_steps must be >= 0");
  if (reinit_every < 1) throw ParamError("config: reinit_every must be >= 1");
  if (max_outer < 1) throw ParamError("config: max_outer must be >= 1");
  if (l1_max_iter < 1) throw ParamError("config: l1_max_iter must be >= 1");
  if (l1_tol < 0) throw ParamError("config: l1_tol must be >= 0");
  if (window_width <= 0) throw ParamError("config: window_width must be positive");
  if (glcm_levels < 2) throw ParamError("config: glcm_levels must be >= 2");
}

std::string PipelineConfig::to_json() const {
  json j;
  j["lambda"] = lambda;
  j["feature_atoms"] = feature_atoms;
  j["shape_atoms"] = shape_atoms;
  j["sparsity"] = sparsity;
  j["ksvd_iters"] = ksvd_iters;
  j["seed"] = seed;
  j["epsilon"] = epsilon;
  j["dt"] = dt;
  j["inner_steps"] = inner_steps;
  j["reinit_every"] = reinit_every;
  j["max_outer"] = max_outer;
  j["l1_max_iter"] = l1_max_iter;
  j["l1_tol"] = l1_tol;
  j["gray_mode"] = gray_mode;
  j["flip_lr"] = flip_lr;
  j["fallback_whole_volume"] = fallback_whole_volume;
  j["window_center"] = window_center;
  j["window_width"] = window_width;
  j["glcm_levels"] = glcm_levels;
  j["body_threshold_hu"] = body_threshold_hu;
  j["dictionary_dir"] = dictionary_dir;
  j["output_path"] = output_path;
  j["trace_path"] = trace_path;
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: invalid JSON: ") + e.what());
  }
  PipelineConfig c;
  try {
    c.lambda = j.value("lambda", c.lambda);
    c.feature_atoms = j.value("feature_atoms", c.feature_atoms);
    c.shape_atoms = j.value("shape_atoms", c.shape_atoms);
    c.sparsity = j.value("sparsity", c.sparsity);
    c.ksvd_iters = j.value("ksvd_iters", c.ksvd_iters);
    c.seed = j.value("seed", c.seed);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.dt = j.value("dt", c.dt);
    c.inner_steps = j.value("inner_steps", c.inner_steps);
    c.reinit_every = j.value("reinit_every", c.reinit_every);
    c.max_outer = j.value("max_outer", c.max_outer);
    c.l1_max_iter = j.value("l1_max_iter", c.l1_max_iter);
    c.l1_tol = j.value("l1_tol", c.l1_tol);
    c.gray_mode = j.value("gray_mode", c.gray_mode);
    c.flip_lr = j.value("flip_lr", c.flip_lr);
    c.fallback_whole_volume = j.value("fallback_whole_volume", c.fallback_whole_volume);
    c.window_center = j.value("window_center", c.window_center);
    c.window_width = j.value("window_width", c.window_width);
    c.glcm_levels = j.value("glcm_levels", c.glcm_levels);
    c.body_threshold_hu = j.value("body_threshold_hu", c.body_threshold_hu);
    c.dictionary_dir = j.value("dictionary_dir", c.dictionary_dir);
    c.output_path = j.value("output_path", c.output_path);
    c.trace_path = j.value("trace_path", c.trace_path);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: bad field type: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path);
  out << to_json();
}

}  // namespace sparseg
