#include "subpflow/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "subpflow/estimates.hpp"
#include "subpflow/flux.hpp"
#include "subpflow/moser.hpp"

namespace subpflow {

namespace {

namespace fs = std::filesystem;

fs::path prepare_out_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
  const fs::path dir = opt.out_dir.empty() ? fs::path(cfg.output.dir) : fs::path(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out.good()) throw IoError("write failed: " + path.string());
}

void emit(const ExperimentConfig& cfg, const RunOptions& opt, const fs::path& dir,
          const std::string& stem, const std::string& jsonl, const std::string& csv,
          const std::string& summary) {
  if (cfg.output.jsonl && !jsonl.empty()) write_file(dir / (stem + ".jsonl"), jsonl);
  if (cfg.output.csv && !csv.empty()) write_file(dir / (stem + ".csv"), csv);
  if (cfg.output.summary && !summary.empty()) write_file(dir / "summary.txt", summary);
  if (!opt.quiet && !summary.empty()) std::cout << summary;
}

std::string diagnostics_jsonl(const Solution& sol) {
  std::string out;
  const GridSpec& g = sol.spec.grid;
  // per-output-time diagnostics (the per-substep history stays in memory)
  for (int k = 0; k <= g.nt; ++k) {
    double max_abs = 0.0;
    for (double v : sol.u.slice(k)) max_abs = std::max(max_abs, std::abs(v));
    double energy = 0.0;
    for (std::size_t i = 0; i < g.space_size(); ++i)
      energy += kernels::node_weight(g, i) * sol.u.at(i, k) * sol.u.at(i, k);
    JsonLine line;
    line.field("schema", "subpflow/1")
        .field("record", "diagnostic")
        .field("k", k)
        .field("t", g.out_time(k))
        .field("max_abs_u", max_abs)
        .field("energy", energy);
    out += line.str() + "\n";
  }
  JsonLine meta;
  meta.field("schema", "subpflow/1")
      .field("record", "solve_meta")
      .field("substeps", static_cast<long>(sol.dt_history.size()))
      .field("dt_min", sol.dt_history.empty()
                           ? 0.0
                           : *std::min_element(sol.dt_history.begin(), sol.dt_history.end()))
      .field("dt_max", sol.dt_history.empty()
                           ? 0.0
                           : *std::max_element(sol.dt_history.begin(), sol.dt_history.end()));
  out += meta.str() + "\n";
  return out;
}

std::string failure_jsonl(const InstabilityError& e) {
  JsonLine line;
  line.field("schema", "subpflow/1")
      .field("record", "instability")
      .field("step", e.step_index)
      .field("t", e.t)
      .field("max_abs_u", e.max_abs_u)
      .field("message", e.what());
  return line.str() + "\n";
}

int guarded(const ExperimentConfig& cfg, const RunOptions& opt,
            const std::function<void(const fs::path&)>& body) {
  try {
    const fs::path dir = prepare_out_dir(cfg, opt);
    try {
      body(dir);
      return kOk;
    } catch (const InstabilityError& e) {
      // partial artifacts: the failure diagnostic itself
      write_file(dir / "failure.jsonl", failure_jsonl(e));
      std::cerr << "instability: " << e.what() << "\n";
      return kInstability;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

std::string describe_problem(const ExperimentConfig& cfg) {
  const FluxModel& base = cfg.problem.base_flux();
  std::string s = "problem: p=" + format_double(base.p) + " delta=" + format_double(base.delta);
  if (cfg.eps) s += " eps=" + format_double(*cfg.eps);
  s += " grid=";
  for (std::size_t a = 0; a < cfg.problem.grid.m.size(); ++a)
    s += (a ? "x" : "") + std::to_string(cfg.problem.grid.m[a]);
  s += " nt=" + std::to_string(cfg.problem.grid.nt);
  s += " initial=" + cfg.initial.name + "\n";
  return s;
}

Solution solve_config(const ExperimentConfig& cfg, const RunOptions& opt) {
  return cfg.problem.lifted() ? solve_lifted(cfg.problem, opt.exec)
                              : solve(cfg.problem, opt.exec);
}

}  // namespace

int run_solve(const ExperimentConfig& cfg, const RunOptions& opt) {
  return guarded(cfg, opt, [&](const fs::path& dir) {
    const Solution sol = solve_config(cfg, opt);
    std::string summary = describe_problem(cfg);
    summary += "substeps: " + std::to_string(sol.dt_history.size()) + "\n";
    double final_max = 0.0;
    for (double v : sol.u.slice(cfg.problem.grid.nt)) final_max = std::max(final_max, std::abs(v));
    summary += "final max |u|: " + format_double(final_max) + "\n";
    emit(cfg, opt, dir, "diagnostics", diagnostics_jsonl(sol), "", summary);
  });
}

int run_verify(const ExperimentConfig& cfg, const RunOptions& opt) {
  return guarded(cfg, opt, [&](const fs::path& dir) {
    if (cfg.verification.empty())
      throw ValidationError("verification: config has no verification entries");
    const Solution sol = solve_config(cfg, opt);
    std::string jsonl, csv, summary = describe_problem(cfg);
    csv = "name,p,delta,beta,lhs,rhs_total,empirical_C,poly_factor\n";
    for (const VerificationEntry& ve : cfg.verification) {
      CylinderSpec cyl = ve.cylinder;
      if (std::isnan(cyl.t0)) cyl.t0 = cfg.problem.grid.t1;
      const CutoffSpec cutoff = make_cutoff(cyl, cfg.problem.grid, opt.exec);
      for (const std::string& name : ve.inequalities) {
        for (double beta : ve.betas) {
          const EstimateReport rep = run_report(name, sol, cutoff, beta, opt.exec);
          jsonl += report_to_jsonl(rep) + "\n";
          csv += rep.name + ',' + format_double(rep.p) + ',' + format_double(rep.delta) + ',' +
                 format_double(rep.beta) + ',' + format_double(rep.lhs) + ',' +
                 format_double(rep.rhs_total()) + ',' + format_double(rep.empirical_C) + ',' +
                 format_double(rep.poly_factor) + "\n";
          summary += rep.name + " beta=" + format_double(beta) +
                     ": empirical_C=" + format_double(rep.empirical_C) +
                     " (lhs=" + format_double(rep.lhs) +
                     ", rhs=" + format_double(rep.rhs_total()) + ")\n";
        }
      }
    }
    emit(cfg, opt, dir, "reports", jsonl, csv, summary);
  });
}

int run_moser(const ExperimentConfig& cfg, const RunOptions& opt) {
  return guarded(cfg, opt, [&](const fs::path& dir) {
    if (!cfg.moser) throw ValidationError("moser: config has no moser section");
    const MoserConfig& mc = *cfg.moser;
    const Solution sol = solve_config(cfg, opt);
    const FluxModel& base = cfg.problem.base_flux();

    const MoserLadder lad0 = build_sequences(base.p, cfg.problem.grid.n, mc.r, mc.levels);
    const MoserLadder lad =
        measure_ladder(sol, lad0, base.delta, mc.mu, mc.center, mc.t0, opt.exec);
    const IterationCheck chk = check_iteration(lad);
    const LipschitzReport lip =
        lipschitz_bound_report(sol, base.delta, mc.mu, mc.r, mc.center, mc.t0, opt.exec);

    std::string jsonl = ladder_to_json(lad, chk) + "\n" +
                        lipschitz_to_jsonl(lip, base.p, base.delta) + "\n";
    std::string summary = describe_problem(cfg);
    summary += "moser: r=" + format_double(mc.r) + " mu=" + format_double(mc.mu) +
               " levels=" + std::to_string(mc.levels) + "\n";
    for (std::size_t i = 0; i < lad.levels.size(); ++i) {
      summary += "  i=" + std::to_string(lad.levels[i].i) +
                 " alpha=" + format_double(lad.levels[i].alpha_i) +
                 " M=" + format_double(lad.levels[i].M_i) +
                 " Mbar=" + format_double(lad.levels[i].Mbar_i);
      if (i < chk.C.size()) summary += " C=" + format_double(chk.C[i]);
      summary += "\n";
    }
    summary += "max_C: " + format_double(chk.max_C) + "\n";
    summary += "lipschitz: sup_grad=" + format_double(lip.sup_grad) +
               " bound_rhs=" + format_double(lip.bound_rhs) +
               " empirical_C=" + format_double(lip.empirical_C) + "\n";
    emit(cfg, opt, dir, "moser", jsonl, ladder_to_csv(lad, chk), summary);
  });
}

int run_structure(const ExperimentConfig& cfg, const RunOptions& opt) {
  return guarded(cfg, opt, [&](const fs::path& dir) {
    if (!cfg.structure) throw ValidationError("structure: config has no structure section");
    std::string jsonl, summary;
    std::string csv = "variant,p,delta,lambda_emp,Lambda_emp,growth_max,quotients_ok,growth_ok\n";
    std::uint64_t seed = opt.seed;
    for (const StructureModelConfig& smc : cfg.structure->models) {
      StructureReport rep;
      double lambda_low = 1.0;
      if (smc.variant == "model") {
        const FluxModel m = FluxModel::p_laplacian(1, smc.p, smc.delta);
        rep = check_structure(m, cfg.structure->samples, seed);
        lambda_low = m.lambda_struct;
      } else if (smc.variant == "regularized") {
        const FluxModel m =
            regularize(FluxModel::p_laplacian(1, smc.p, 0.0), smc.reg_delta, smc.lambda);
        rep = check_structure(m, cfg.structure->samples, seed);
        lambda_low = m.lambda_struct;
      } else {
        const LiftedFluxModel m =
            lift(FluxModel::p_laplacian(1, smc.p, smc.delta), smc.eps, smc.lambda);
        rep = check_structure(m, cfg.structure->samples, seed);
        lambda_low = m.lambda;
      }
      ++seed;  // distinct stream per model, still deterministic
      JsonLine line;
      line.field("schema", "subpflow/1")
          .field("record", "structure")
          .field("variant", smc.variant)
          .field("p", smc.p)
          .field("delta", smc.delta)
          .field("samples", rep.samples)
          .field("lambda_emp", rep.lambda_emp)
          .field("Lambda_emp", rep.Lambda_emp)
          .field("growth_max", rep.growth_max)
          .field("lambda_struct", lambda_low)
          .field("quotients_ok", rep.quotients_ok)
          .field("growth_ok", rep.growth_ok);
      jsonl += line.str() + "\n";
      csv += smc.variant + ',' + format_double(smc.p) + ',' + format_double(smc.delta) + ',' +
             format_double(rep.lambda_emp) + ',' + format_double(rep.Lambda_emp) + ',' +
             format_double(rep.growth_max) + ',' + (rep.quotients_ok ? "1" : "0") + ',' +
             (rep.growth_ok ? "1" : "0") + "\n";
      summary += smc.variant + " p=" + format_double(smc.p) +
                 " delta=" + format_double(smc.delta) +
                 ": quotients in [" + format_double(rep.lambda_emp) + ", " +
                 format_double(rep.Lambda_emp) + "] " +
                 (rep.quotients_ok && rep.growth_ok ? "ok" : "VIOLATION") + "\n";
    }
    emit(cfg, opt, dir, "structure", jsonl, csv, summary);
  });
}

int run_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  return guarded(cfg, opt, [&](const fs::path& dir) {
    if (!cfg.sweeps) throw ValidationError("sweep: config has no sweeps section");
    const SweepConfig& sw = *cfg.sweeps;
    const FluxModel& base = cfg.problem.base_flux();
    std::string jsonl, summary = describe_problem(cfg);
    std::string csv = "parameter,value,final_max,diff_prev,diff_limit\n";
    summary += "sweep over " + sw.parameter + "\n";

    auto final_slice = [&](const Solution& sol) {
      return std::vector<double>(sol.u.slice(sol.spec.grid.nt).begin(),
                                 sol.u.slice(sol.spec.grid.nt).end());
    };
    auto linf = [](const std::vector<double>& a, const std::vector<double>& b) {
      double worst = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
      return worst;
    };

    std::vector<double> prev;
    std::vector<double> limit;
    const double lift_lambda = cfg.problem.lifted()
                                   ? std::get<LiftedFluxModel>(cfg.problem.flux).lambda
                                   : base.lambda_struct;
    if (sw.parameter == "eps") {
      ProblemSpec lspec = cfg.problem;
      lspec.flux = lift_limit(base, lift_lambda);
      limit = final_slice(solve(lspec, opt.exec));
    }

    for (std::size_t i = 0; i < sw.values.size(); ++i) {
      const double value = sw.values[i];
      ProblemSpec spec = cfg.problem;
      std::vector<double> cur;
      double diff_prev = std::numeric_limits<double>::quiet_NaN();
      double diff_limit = std::numeric_limits<double>::quiet_NaN();
      if (sw.parameter == "delta") {
        spec.flux = FluxModel::p_laplacian(spec.grid.n, base.p, value);
        cur = final_slice(solve(spec, opt.exec));
        if (!prev.empty()) diff_prev = linf(cur, prev);
      } else if (sw.parameter == "eps") {
        spec.flux = lift(FluxModel::p_laplacian(spec.grid.n, base.p, base.delta), value,
                         lift_lambda);
        cur = final_slice(solve_lifted(spec, opt.exec));
        if (!prev.empty()) diff_prev = linf(cur, prev);
        diff_limit = linf(cur, limit);
      } else {  // h refinement by integer factors on the same box
        const int f = static_cast<int>(value);
        GridSpec g = cfg.problem.grid;
        for (int a = 0; a < g.dims(); ++a) g.m[a] = (cfg.problem.grid.m[a] - 1) * f + 1;
        g.nt = cfg.problem.grid.nt * f;
        spec.grid = g;
        spec.initial = make_preset(g, cfg.initial);
        const Solution sol = cfg.problem.lifted() ? solve_lifted(spec, opt.exec)
                                                  : solve(spec, opt.exec);
        // restrict to the base grid nodes for comparison
        std::vector<double> coarse(cfg.problem.grid.space_size());
        const GridSpec& base_g = cfg.problem.grid;
        for (std::size_t idx = 0; idx < base_g.space_size(); ++idx) {
          std::size_t rem = idx, fine_idx = 0;
          for (int a = 0; a < base_g.dims(); ++a) {
            const std::size_t ia = rem % base_g.m[a];
            rem /= base_g.m[a];
            fine_idx += ia * static_cast<std::size_t>(f) * g.stride(a);
          }
          coarse[idx] = sol.u.at(fine_idx, g.nt);
        }
        cur = coarse;
        if (!prev.empty()) diff_prev = linf(cur, prev);
      }

      double final_max = 0.0;
      for (double v : cur) final_max = std::max(final_max, std::abs(v));
      JsonLine line;
      line.field("schema", "subpflow/1")
          .field("record", "sweep_point")
          .field("parameter", sw.parameter)
          .field("value", value)
          .field("final_max", final_max);
      if (!std::isnan(diff_prev)) line.field("diff_prev", diff_prev);
      if (!std::isnan(diff_limit)) line.field("diff_limit", diff_limit);
      jsonl += line.str() + "\n";
      csv += sw.parameter + ',' + format_double(value) + ',' + format_double(final_max) + ',' +
             (std::isnan(diff_prev) ? "" : format_double(diff_prev)) + ',' +
             (std::isnan(diff_limit) ? "" : format_double(diff_limit)) + "\n";
      summary += "  " + sw.parameter + "=" + format_double(value) +
                 " final_max=" + format_double(final_max);
      if (!std::isnan(diff_prev)) summary += " diff_prev=" + format_double(diff_prev);
      if (!std::isnan(diff_limit)) summary += " diff_limit=" + format_double(diff_limit);
      summary += "\n";
      prev = cur;
    }
    emit(cfg, opt, dir, "sweep", jsonl, csv, summary);
  });
}

}  // namespace subpflow
