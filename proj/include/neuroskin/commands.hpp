#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neuroskin/objective.hpp"

namespace neuroskin {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O and other runtime failures
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitOptimizerAbort = 4;

/// Command-line overrides; unset fields fall back to the config file.
struct Overrides {
  std::optional<std::size_t> workers;
  std::optional<double> fd_delta;
  std::optional<DesignScaling> scaling;
  std::optional<std::size_t> maxiter;
  std::optional<std::size_t> maxfun;
  std::optional<double> factr;
  std::optional<double> pgtol;
  std::optional<std::vector<double>> x0;
  bool keep_evals = false;
};

struct Console {
  std::ostream& out;
  std::ostream& err;
};

/// Simulates broadcast_design(w_star) and writes the probe series to out.
int cmd_gen_target(const std::filesystem::path& config, const std::vector<double>& w_star,
                   const std::filesystem::path& out, Console io);

/// Runs the training loop. out_dir receives manifest.json, result.csv and
/// summary.json; per-evaluation directories live under out_dir/evals.
int cmd_train(const std::filesystem::path& config, const std::filesystem::path& target,
              const std::filesystem::path& out_dir, const Overrides& over, Console io);

/// Re-evaluates every design row of a result file and rewrites it with
/// rmse and mse columns.
int cmd_evaluate(const std::filesystem::path& config, const std::filesystem::path& target,
                 const std::filesystem::path& result_file, const Overrides& over, Console io);

/// One forward run into out_dir (output.out and params.csv). Exactly one of
/// w (design vector) or params_file (per-element weights) may be given;
/// neither means the config's default design.
int cmd_simulate(const std::filesystem::path& config, const std::optional<std::vector<double>>& w,
                 const std::optional<std::filesystem::path>& params_file,
                 const std::filesystem::path& out_dir, Console io);

/// One parsed row of a result file.
struct ResultRow {
  std::size_t iteration = 0;
  std::vector<double> x;
  std::optional<double> rmse;
  std::optional<double> mse;
};

/// Reads a result file holding d design values per row. A header row is
/// optional; with one, the columns are located by name (iter, x_<i>, rmse,
/// mse). Without one, rows hold d values, optionally followed by rmse and mse.
std::vector<ResultRow> read_result_csv(const std::filesystem::path& path, std::size_t d);

/// Writes "iter,x_0..x_{d-1}[,rmse,mse]" plus one line per row. Error
/// columns are written when every row has them.
void write_result_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows,
                      std::size_t d);

}  // namespace neuroskin
