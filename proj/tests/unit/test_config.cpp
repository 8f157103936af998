#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "subpflow/runner.hpp"

using namespace subpflow;

namespace {

const char* kGoodConfig = R"json({
  "schema": "subpflow/1",
  "problem": {
    "n": 1,
    "box_lo": [-1.0, -1.0, -0.4],
    "box_hi": [1.0, 1.0, 0.4],
    "m": [13, 13, 9],
    "t0": 0.0, "t1": 0.02, "nt": 8,
    "p": 3.0, "delta": 0.5,
    "initial": { "preset": "bump", "center": [0, 0, 0], "width": [0.5, 0.5, 0.2], "amplitude": 0.4 }
  },
  "verification": [
    { "inequality": "z_caccioppoli", "betas": [0.0],
      "cylinder": { "center": [0, 0, 0], "r": 0.6, "mu": 0.05 } }
  ],
  "moser": { "center": [0, 0, 0], "r": 0.25, "mu": 0.05, "levels": 2 },
  "structure": { "samples": 500 },
  "sweeps": { "parameter": "delta", "values": [0.5, 0.25] },
  "output": { "dir": "out", "formats": ["jsonl", "csv", "summary"] }
})json";

std::filesystem::path temp_dir(const char* tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / (std::string("subpflow_test_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.is_open());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parses and builds the problem") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  CHECK(cfg.problem.grid.m[0] == 13);
  CHECK(cfg.problem.base_flux().p == 3.0);
  CHECK(cfg.initial.name == "bump");
  CHECK(cfg.verification.size() == 1);
  CHECK(cfg.verification[0].inequalities.size() == 1);
  CHECK(cfg.moser.has_value());
  CHECK(cfg.structure.has_value());
  CHECK(cfg.sweeps.has_value());
}

TEST_CASE("config diagnostics name the failing field or line") {
  // invalid JSON -> line diagnostic
  try {
    parse_config("{\n  \"problem\": [,]\n}", "bad.json");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad.json:2") != std::string::npos);
  }
  // semantic failure -> field diagnostic
  std::string out_of_range = kGoodConfig;
  const auto pos = out_of_range.find("\"p\": 3.0");
  out_of_range.replace(pos, 8, "\"p\": 1.5");
  try {
    parse_config(out_of_range, "test");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("problem.p") != std::string::npos);
  }
  // unknown inequality id
  std::string bad_id = kGoodConfig;
  const auto idp = bad_id.find("z_caccioppoli");
  bad_id.replace(idp, 13, "no_such_thing");
  CHECK_THROWS_AS(parse_config(bad_id, "test"), ValidationError);
  // p > 4 with estimate entries
  std::string p5 = kGoodConfig;
  const auto pp = p5.find("\"p\": 3.0");
  p5.replace(pp, 8, "\"p\": 5.0");
  const auto ip = p5.find("z_caccioppoli");
  p5.replace(ip, 13, "interpolation");
  CHECK_THROWS_AS(parse_config(p5, "test"), ValidationError);
}

TEST_CASE("verify runner emits the documented artifacts deterministically") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir_a = temp_dir("verify_a");
  const auto dir_b = temp_dir("verify_b");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = dir_a.string();
  CHECK(run_verify(cfg, opt) == kOk);
  opt.out_dir = dir_b.string();
  CHECK(run_verify(cfg, opt) == kOk);
  CHECK(std::filesystem::exists(dir_a / "reports.jsonl"));
  CHECK(std::filesystem::exists(dir_a / "reports.csv"));
  CHECK(std::filesystem::exists(dir_a / "summary.txt"));
  CHECK(slurp(dir_a / "reports.jsonl") == slurp(dir_b / "reports.jsonl"));
  // header row present
  CHECK(slurp(dir_a / "reports.csv").rfind("name,p,delta,beta,", 0) == 0);
}

TEST_CASE("sweep runner: delta ladder emits per-value records with differences") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir = temp_dir("sweep");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = dir.string();
  CHECK(run_sweep(cfg, opt) == kOk);
  const std::string jsonl = slurp(dir / "sweep.jsonl");
  CHECK(jsonl.find("\"record\":\"sweep_point\"") != std::string::npos);
  CHECK(jsonl.find("\"diff_prev\":") != std::string::npos);
  // one record per value
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
}

TEST_CASE("structure runner is seed-deterministic") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir_a = temp_dir("st_a");
  const auto dir_b = temp_dir("st_b");
  const auto dir_c = temp_dir("st_c");
  RunOptions opt;
  opt.quiet = true;
  opt.seed = 11;
  opt.out_dir = dir_a.string();
  CHECK(run_structure(cfg, opt) == kOk);
  opt.out_dir = dir_b.string();
  CHECK(run_structure(cfg, opt) == kOk);
  opt.seed = 12;
  opt.out_dir = dir_c.string();
  CHECK(run_structure(cfg, opt) == kOk);
  CHECK(slurp(dir_a / "structure.jsonl") == slurp(dir_b / "structure.jsonl"));
  CHECK(slurp(dir_a / "structure.jsonl") != slurp(dir_c / "structure.jsonl"));
}

TEST_CASE("runner exit codes") {
  ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = temp_dir("codes").string();

  // missing sections are validation failures
  ExperimentConfig no_moser = cfg;
  no_moser.moser.reset();
  CHECK(run_moser(no_moser, opt) == kValidation);
  ExperimentConfig no_verify = cfg;
  no_verify.verification.clear();
  CHECK(run_verify(no_verify, opt) == kValidation);

  // instability produces exit 3 and partial artifacts: a custom flux whose
  // declared lambda_eff wildly understates its diffusivity defeats the step
  // control, so the growth guard must catch it
  ExperimentConfig unstable = cfg;
  FluxModel lying;
  lying.n = 1;
  lying.p = 2.0;
  lying.delta = 0.0;
  lying.kind = FluxKind::custom;
  lying.evaluator = [](const double*, const double* xi, double* o) {
    for (int i = 0; i < 2; ++i) o[i] = 100.0 * xi[i];
  };
  unstable.problem.flux = lying;
  unstable.problem.initial =
      preset_trig(unstable.problem.grid, 0.5, std::vector<double>{6.0, 6.0, 6.0});
  const auto dir = temp_dir("instab");
  opt.out_dir = dir.string();
  CHECK(run_solve(unstable, opt) == kInstability);
  CHECK(std::filesystem::exists(dir / "failure.jsonl"));
}

TEST_CASE("config with eps builds a lifted problem that verify can run") {
  std::string lifted = kGoodConfig;
  const auto pos = lifted.find("\"p\": 3.0");
  lifted.replace(pos, 8, "\"p\": 3.0, \"eps\": 0.5");
  const ExperimentConfig cfg = parse_config(lifted, "test");
  CHECK(cfg.problem.lifted());
  CHECK(cfg.eps.has_value());
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = temp_dir("lifted").string();
  CHECK(run_verify(cfg, opt) == kOk);
}

TEST_CASE("emitted records round-trip through the schema") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir = temp_dir("roundtrip");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = dir.string();
  CHECK(run_verify(cfg, opt) == kOk);
  CHECK(run_moser(cfg, opt) == kOk);
  CHECK(run_structure(cfg, opt) == kOk);
  CHECK(run_sweep(cfg, opt) == kOk);

  int records = 0;
  for (const char* file : {"reports.jsonl", "moser.jsonl", "structure.jsonl", "sweep.jsonl"}) {
    std::istringstream lines(slurp(dir / file));
    std::string line;
    while (std::getline(lines, line)) {
      const nlohmann::json rec = nlohmann::json::parse(line);  // throws on bad JSON
      CHECK(rec.at("schema").get<std::string>() == "subpflow/1");
      CHECK(rec.contains("record"));
      const std::string kind = rec.at("record").get<std::string>();
      if (kind == "estimate") {
        for (const char* key :
             {"name", "p", "delta", "beta", "lhs", "rhs_terms", "empirical_C", "grid",
              "cylinder"})
          CHECK(rec.contains(key));
      } else if (kind == "moser_ladder") {
        CHECK(rec.at("levels").is_array());
        CHECK(rec.at("levels").size() == 3);  // levels 0..2 for level_count 2
      }
      ++records;
    }
  }
  // 1 estimate + ladder + lipschitz + 1 structure model + 2 sweep points
  CHECK(records == 6);
}

TEST_CASE("serial and parallel runner outputs are byte-identical") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir_s = temp_dir("exec_s");
  const auto dir_p = temp_dir("exec_p");
  RunOptions opt;
  opt.quiet = true;
  opt.exec = Exec::serial;
  opt.out_dir = dir_s.string();
  CHECK(run_verify(cfg, opt) == kOk);
  opt.exec = Exec::parallel;
  opt.out_dir = dir_p.string();
  CHECK(run_verify(cfg, opt) == kOk);
  CHECK(slurp(dir_s / "reports.jsonl") == slurp(dir_p / "reports.jsonl"));
}

TEST_CASE("unwritable output directory yields the io exit code") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = "/proc/subpflow_cannot_write_here/out";
  CHECK(run_solve(cfg, opt) == kIo);
}

TEST_CASE("solve runner writes diagnostics") {
  const ExperimentConfig cfg = parse_config(kGoodConfig, "test");
  const auto dir = temp_dir("solve");
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = dir.string();
  CHECK(run_solve(cfg, opt) == kOk);
  const std::string jsonl = slurp(dir / "diagnostics.jsonl");
  CHECK(jsonl.find("\"record\":\"diagnostic\"") != std::string::npos);
  CHECK(jsonl.find("\"record\":\"solve_meta\"") != std::string::npos);
}
