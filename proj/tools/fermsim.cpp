#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fermsim/cli.hpp"

namespace {

fermsim::Method parse_method(const std::string& name) {
  return name == "rk4" ? fermsim::Method::rk4 : fermsim::Method::expm;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fermsim;
  CLI::App app{"fermsim: Lindblad dynamics of fermionic systems via Jordan-Wigner strings"};
  app.require_subcommand(1);

  cli::RunConfig run;
  std::string method = "expm";
  std::string observables;
  double up = 0.0;
  auto* run_cmd = app.add_subcommand("run", "evolve a model and write observables as CSV");
  auto* model_opt = run_cmd->add_option("--model", run.model_path, "model file");
  auto* preset_opt = run_cmd->add_option("--preset", run.preset, "built-in preset (fig3, fig4_moleculepop, fig5_sweep)");
  model_opt->excludes(preset_opt);
  run_cmd->add_option("--t-max", run.t_max, "final time in units of 1/J")->required();
  run_cmd->add_option("--dt-out", run.dt_out, "output grid spacing")->required();
  run_cmd->add_option("--method", method, "integrator")->check(CLI::IsMember({"expm", "rk4"}));
  run_cmd->add_option("--observables", observables,
                      "comma list of occupations,cross_populations,concurrence,linear_entropy,diagnostics");
  auto* up_opt = run_cmd->add_option("--up", up, "override the probe coupling U_p (density term 1-5)");
  run_cmd->add_option("--out", run.out, "output CSV path")->required();

  auto* check_cmd = app.add_subcommand("check", "run the built-in invariant suite");

  cli::SweepConfig sweep;
  std::string sweep_method = "expm";
  auto* sweep_cmd = app.add_subcommand("sweep", "one CSV per probe coupling U_p");
  sweep_cmd->add_option("--preset", sweep.preset, "base preset")->capture_default_str();
  sweep_cmd->add_option("--up", sweep.probe_couplings, "U_p values")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "output directory")->required();
  sweep_cmd->add_option("--t-max", sweep.t_max, "final time")->capture_default_str();
  sweep_cmd->add_option("--dt-out", sweep.dt_out, "output grid spacing")->capture_default_str();
  sweep_cmd->add_option("--method", sweep_method, "integrator")->check(CLI::IsMember({"expm", "rk4"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  if (*run_cmd) {
    run.method = parse_method(method);
    if (!observables.empty()) {
      try {
        run.observables = cli::ObservableSet::parse(observables);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kUsage;
      }
    }
    if (*up_opt) run.probe_coupling = up;
    return cli::cmd_run(run, std::cerr);
  }
  if (*check_cmd) return cli::cmd_check(std::cout);
  sweep.method = parse_method(sweep_method);
  return cli::cmd_sweep(sweep, std::cerr);
}
