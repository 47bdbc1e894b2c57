// neuroskin: target generation, training, evaluation and single runs of the
// neuro-membrane model.

#include <CLI11.hpp>
#include <iostream>

#include "neuroskin/commands.hpp"
#include "neuroskin/objective.hpp"

namespace fs = std::filesystem;
using namespace neuroskin;

namespace {

void add_training_flags(CLI::App* cmd, Overrides& over, std::string& scaling) {
  cmd->add_option("--workers", over.workers, "Concurrent simulations (default d+1)");
  cmd->add_option("--delta", over.fd_delta, "Forward-difference step");
  cmd->add_option("--scaling", scaling, "Design scaling")->check(CLI::IsMember({"raw", "normalized"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-membrane simulation and output-weight training"};
  app.require_subcommand(1);

  fs::path config, target, out;
  std::vector<double> design;
  fs::path params;
  std::string scaling;
  Overrides over;

  auto* gen = app.add_subcommand("gen-target", "Simulate a known design and write its output series");
  gen->add_option("--config", config, "Config JSON")->required();
  gen->add_option("--w", design, "Design vector (comma separated)")->delimiter(',')->required();
  gen->add_option("--out", out, "Target series file")->required();

  auto* train = app.add_subcommand("train", "Fit the design vector to a target series");
  train->add_option("--config", config, "Config JSON")->required();
  train->add_option("--target", target, "Target series file")->required();
  train->add_option("--out", out, "Run directory")->required();
  train->add_option("--x0", over.x0, "Starting design (comma separated)")->delimiter(',');
  train->add_option("--maxiter", over.maxiter, "Iteration limit");
  train->add_option("--maxfun", over.maxfun, "Objective evaluation limit");
  train->add_option("--factr", over.factr, "Relative reduction stop factor");
  train->add_option("--pgtol", over.pgtol, "Projected gradient tolerance");
  train->add_flag("--keep-evals", over.keep_evals, "Keep per-evaluation run directories");
  add_training_flags(train, over, scaling);

  auto* eval = app.add_subcommand("evaluate", "Recompute rmse and mse for every row of a result file");
  eval->add_option("--config", config, "Config JSON")->required();
  eval->add_option("--target", target, "Target series file")->required();
  eval->add_option("--result", out, "Result CSV to rewrite")->required();
  eval->add_option("--workers", over.workers, "Concurrent simulations");

  auto* sim = app.add_subcommand("simulate", "Single forward run");
  sim->add_option("--config", config, "Config JSON")->required();
  auto* w_opt = sim->add_option("--w", design, "Design vector (comma separated)")->delimiter(',');
  sim->add_option("--params", params, "Per-element params.csv")->excludes(w_opt);
  sim->add_option("--out", out, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (!scaling.empty()) over.scaling = parse_scaling(scaling);

  const Console io{std::cout, std::cerr};
  if (*gen) return cmd_gen_target(config, design, out, io);
  if (*train) return cmd_train(config, target, out, over, io);
  if (*eval) return cmd_evaluate(config, target, out, over, io);
  std::optional<std::vector<double>> w;
  if (!design.empty()) w = design;
  std::optional<fs::path> pf;
  if (!params.empty()) pf = params;
  return cmd_simulate(config, w, pf, out, io);
}
