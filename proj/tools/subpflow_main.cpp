#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "subpflow/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", args->out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", args->seed, "seed for sampled checks");
  cmd->add_flag("--quiet", args->quiet, "suppress the summary on stdout");
  cmd->add_flag("--serial", args->serial, "run the serial reference kernels");
}

int dispatch(const std::string& name, const CommonArgs& args) {
  subpflow::ExperimentConfig cfg;
  try {
    cfg = subpflow::load_config(args.config_path);
  } catch (const subpflow::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return subpflow::kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return subpflow::kIo;
  }
  subpflow::RunOptions opt;
  opt.out_dir = args.out_dir;
  opt.seed = args.seed;
  opt.quiet = args.quiet;
  opt.exec = args.serial ? subpflow::Exec::serial : subpflow::Exec::parallel;
  if (name == "solve") return subpflow::run_solve(cfg, opt);
  if (name == "verify") return subpflow::run_verify(cfg, opt);
  if (name == "moser") return subpflow::run_moser(cfg, opt);
  if (name == "structure-check") return subpflow::run_structure(cfg, opt);
  if (name == "sweep") return subpflow::run_sweep(cfg, opt);
  return subpflow::kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subpflow: degenerate parabolic flows on the Heisenberg group, "
               "with measured energy estimates"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* names[] = {"solve", "verify", "moser", "structure-check", "sweep"};
  const char* descs[] = {
      "solve the configured problem and write diagnostics",
      "solve, then evaluate the configured inequality reports",
      "solve, then measure the iteration ladder and the gradient bound",
      "sample the structure conditions of the configured flux models",
      "ladder experiment over delta, eps or grid refinement",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], descs[i]), &args);

  CLI11_PARSE(app, argc, argv);
  return dispatch(app.get_subcommands().front()->get_name(), args);
}
