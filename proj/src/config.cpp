#include "subpflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "subpflow/estimates.hpp"

namespace subpflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ValidationError(field + ": " + why);
}

double need_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required field");
  if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

double opt_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

std::vector<double> need_vector(const json& j, const std::string& path, const char* key,
                                std::size_t len) {
  if (!j.contains(key)) fail(path + "." + key, "missing required field");
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "must be an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) fail(path + "." + key, "entries must be numbers");
    out.push_back(e.get<double>());
  }
  if (len != 0 && out.size() != len)
    fail(path + "." + key, "expected " + std::to_string(len) + " entries");
  return out;
}

PresetParams parse_initial(const json& j, int n) {
  PresetParams params;
  if (!j.contains("preset") || !j.at("preset").is_string())
    fail("problem.initial.preset", "missing preset name");
  params.name = j.at("preset").get<std::string>();
  const int d = 2 * n + 1;
  if (params.name == "linear_horizontal")
    params.coeffs = need_vector(j, "problem.initial", "coeffs", 2 * n);
  if (params.name == "vertical") params.scale = opt_number(j, "scale", 1.0);
  if (params.name == "bump") {
    params.center = need_vector(j, "problem.initial", "center", d);
    if (j.contains("width") && j.at("width").is_array())
      params.width = need_vector(j, "problem.initial", "width", d);
    else
      params.width = {need_number(j, "problem.initial", "width")};
    params.amplitude = need_number(j, "problem.initial", "amplitude");
  }
  if (params.name == "trig") {
    params.amplitude = need_number(j, "problem.initial", "amplitude");
    params.freq = need_vector(j, "problem.initial", "freq", d);
  }
  return params;
}

CylinderSpec parse_cylinder(const json& j, const std::string& path, int n) {
  CylinderSpec c;
  const std::vector<double> center = need_vector(j, path, "center", 2 * n + 1);
  c.center = HeisenbergPoint(n, center);
  c.r = need_number(j, path, "r");
  c.mu = need_number(j, path, "mu");
  c.t0 = opt_number(j, "t0", nan_time());
  if (!(c.r > 0.0)) fail(path + ".r", "must be > 0");
  if (!(c.mu > 0.0)) fail(path + ".mu", "must be > 0");
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number for the diagnostic
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
      if (text[i] == '\n') ++line;
    throw ValidationError(origin + ":" + std::to_string(line) +
                          ": invalid JSON (" + e.what() + ")");
  }
  if (!root.is_object()) throw ValidationError(origin + ": config must be a JSON object");
  if (root.contains("schema") && root.at("schema").get<std::string>() != "subpflow/1")
    fail("schema", "unsupported schema (expected subpflow/1)");

  ExperimentConfig cfg;
  if (!root.contains("problem")) fail("problem", "missing required section");
  const json& pj = root.at("problem");

  const int n = static_cast<int>(opt_number(pj, "n", 1.0));
  if (n < 1) fail("problem.n", "must be >= 1");
  const int d = 2 * n + 1;
  GridSpec grid;
  grid.n = n;
  grid.box_lo = need_vector(pj, "problem", "box_lo", d);
  grid.box_hi = need_vector(pj, "problem", "box_hi", d);
  if (pj.contains("m") && pj.at("m").is_array()) {
    const std::vector<double> mv = need_vector(pj, "problem", "m", d);
    for (double v : mv) grid.m.push_back(static_cast<int>(v));
  } else {
    grid.m.assign(d, static_cast<int>(need_number(pj, "problem", "m")));
  }
  grid.t0 = opt_number(pj, "t0", 0.0);
  grid.t1 = need_number(pj, "problem", "t1");
  grid.nt = static_cast<int>(need_number(pj, "problem", "nt"));
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    fail("problem", e.what());
  }

  const double p = need_number(pj, "problem", "p");
  if (!(p >= 2.0)) fail("problem.p", "must be >= 2");
  const double delta = opt_number(pj, "delta", 0.0);
  if (!(delta >= 0.0)) fail("problem.delta", "must be >= 0");

  cfg.problem.grid = grid;
  const FluxModel base = FluxModel::p_laplacian(n, p, delta);
  if (pj.contains("eps")) {
    const double eps = need_number(pj, "problem", "eps");
    if (!(eps > 0.0)) fail("problem.eps", "must be > 0");
    cfg.eps = eps;
    cfg.lift_lambda = opt_number(pj, "lift_lambda", std::numeric_limits<double>::quiet_NaN());
    cfg.problem.flux = lift(base, eps, cfg.lift_lambda);
  } else {
    cfg.problem.flux = base;
  }
  cfg.problem.c_stab = opt_number(pj, "c_stab", 0.25);

  if (!pj.contains("initial")) fail("problem.initial", "missing required section");
  cfg.initial = parse_initial(pj.at("initial"), n);
  try {
    cfg.problem.initial = make_preset(grid, cfg.initial);
  } catch (const ValidationError& e) {
    fail("problem.initial", e.what());
  }

  const std::string boundary =
      pj.contains("boundary") ? pj.at("boundary").get<std::string>() : "frozen_initial";
  if (boundary != "frozen_initial")
    fail("problem.boundary", "only frozen_initial is supported in configs");
  cfg.problem.boundary = BoundaryMode::frozen_initial;

  if (root.contains("verification")) {
    const json& vj = root.at("verification");
    if (!vj.is_array()) fail("verification", "must be an array");
    int idx = 0;
    for (const json& entry : vj) {
      const std::string path = "verification[" + std::to_string(idx++) + "]";
      VerificationEntry ve;
      if (!entry.contains("inequality")) fail(path + ".inequality", "missing required field");
      const std::string id = entry.at("inequality").get<std::string>();
      if (id == "all") {
        ve.inequalities = kInequalityNames;
      } else {
        bool known = false;
        for (const std::string& name : kInequalityNames) known |= (name == id);
        if (!known) fail(path + ".inequality", "unknown inequality id '" + id + "'");
        ve.inequalities = {id};
      }
      ve.betas = need_vector(entry, path, "betas", 0);
      for (double b : ve.betas)
        if (!(b >= 0.0)) fail(path + ".betas", "entries must be >= 0");
      if (!entry.contains("cylinder")) fail(path + ".cylinder", "missing required section");
      ve.cylinder = parse_cylinder(entry.at("cylinder"), path + ".cylinder", n);
      // The interpolation-based reports require 2 <= p <= 4.
      if (p > 4.0) {
        for (const std::string& name : ve.inequalities)
          if (name == "interpolation" || name == "z_integrability" ||
              name == "main_caccioppoli")
            fail(path + ".inequality", name + " requires p <= 4");
      }
      cfg.verification.push_back(std::move(ve));
    }
  }

  if (root.contains("moser")) {
    const json& mj = root.at("moser");
    MoserConfig mc;
    mc.center = HeisenbergPoint(n, need_vector(mj, "moser", "center", d));
    mc.r = need_number(mj, "moser", "r");
    mc.mu = need_number(mj, "moser", "mu");
    mc.levels = static_cast<int>(opt_number(mj, "levels", 3.0));
    mc.t0 = opt_number(mj, "t0", nan_time());
    if (!(mc.r > 0.0)) fail("moser.r", "must be > 0");
    if (!(mc.mu > 0.0)) fail("moser.mu", "must be > 0");
    if (mc.levels < 1) fail("moser.levels", "must be >= 1");
    cfg.moser = mc;
  }

  if (root.contains("structure")) {
    const json& sj = root.at("structure");
    StructureConfig sc;
    sc.samples = static_cast<long>(opt_number(sj, "samples", 10000.0));
    if (sc.samples < 1) fail("structure.samples", "must be >= 1");
    if (sj.contains("models")) {
      if (!sj.at("models").is_array()) fail("structure.models", "must be an array");
      int idx = 0;
      for (const json& mj : sj.at("models")) {
        const std::string path = "structure.models[" + std::to_string(idx++) + "]";
        StructureModelConfig smc;
        smc.variant = mj.contains("variant") ? mj.at("variant").get<std::string>() : "model";
        if (smc.variant != "model" && smc.variant != "regularized" && smc.variant != "lifted")
          fail(path + ".variant", "must be model | regularized | lifted");
        smc.p = need_number(mj, path, "p");
        if (!(smc.p >= 2.0)) fail(path + ".p", "must be >= 2");
        smc.delta = opt_number(mj, "delta", 0.0);
        smc.reg_delta = opt_number(mj, "reg_delta", 0.5);
        smc.eps = opt_number(mj, "eps", 0.5);
        smc.lambda = opt_number(mj, "lambda", std::numeric_limits<double>::quiet_NaN());
        sc.models.push_back(smc);
      }
    } else {
      StructureModelConfig smc;
      smc.p = p;
      smc.delta = delta;
      sc.models.push_back(smc);
    }
    cfg.structure = sc;
  }

  if (root.contains("sweeps")) {
    const json& sj = root.at("sweeps");
    SweepConfig sw;
    if (!sj.contains("parameter")) fail("sweeps.parameter", "missing required field");
    sw.parameter = sj.at("parameter").get<std::string>();
    if (sw.parameter != "delta" && sw.parameter != "eps" && sw.parameter != "h")
      fail("sweeps.parameter", "must be delta | eps | h");
    sw.values = need_vector(sj, "sweeps", "values", 0);
    if (sw.values.size() < 2) fail("sweeps.values", "need at least two values");
    for (double v : sw.values) {
      if (sw.parameter == "h") {
        if (!(v >= 1.0) || v != std::floor(v))
          fail("sweeps.values", "h sweep values are integer refinement factors >= 1");
      } else if (sw.parameter == "delta") {
        if (!(v >= 0.0)) fail("sweeps.values", "delta values must be >= 0");
      } else if (!(v > 0.0)) {
        fail("sweeps.values", "eps values must be > 0");
      }
    }
    cfg.sweeps = sw;
  }

  if (root.contains("output")) {
    const json& oj = root.at("output");
    if (oj.contains("dir")) cfg.output.dir = oj.at("dir").get<std::string>();
    if (oj.contains("formats")) {
      cfg.output.jsonl = cfg.output.csv = cfg.output.summary = false;
      for (const json& f : oj.at("formats")) {
        const std::string fmt = f.get<std::string>();
        if (fmt == "jsonl") cfg.output.jsonl = true;
        else if (fmt == "csv") cfg.output.csv = true;
        else if (fmt == "summary") cfg.output.summary = true;
        else fail("output.formats", "unknown format '" + fmt + "'");
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace subpflow
