#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuroskin/lbfgsb.hpp"
#include "neuroskin/simulation.hpp"

namespace neuroskin {

/// sqrt(mean((yhat - y)^2)). Throws ShapeError on length mismatch or empty input.
double rmse(std::span<const double> yhat, std::span<const double> y);
/// mean((yhat - y)^2).
double mse(std::span<const double> yhat, std::span<const double> y);

double rmse(const TimeSeries& yhat, const TimeSeries& y);
double mse(const TimeSeries& yhat, const TimeSeries& y);

enum class DesignScaling { raw, normalized };

DesignScaling parse_scaling(std::string_view name);
std::string to_string(DesignScaling scaling);

/// Maps a raw design vector to an output history. eval_index is 0 for the
/// base point and i + 1 for the perturbation of variable i (or the item
/// index inside a batch); plants may use it to pick a working directory.
using Plant = std::function<std::vector<double>(std::span<const double> x_raw, std::size_t eval_index)>;

/// Simulation-backed plant. With eval_root set, every evaluation runs through
/// run_and_write in eval_root/<eval_index>.
Plant make_simulation_plant(SimConfig config, std::optional<std::filesystem::path> eval_root = {});

struct TrainingProblem {
  Plant plant;
  std::vector<double> target;
  Bounds bounds;  // raw units
  double fd_delta = 1e-2;
  DesignScaling scaling = DesignScaling::normalized;
  std::size_t worker_count = 0;  // 0: one worker per simulation (d + 1)

  std::size_t dim() const { return bounds.size(); }
  /// Bounds seen by the optimizer: [0, 1]^d when normalized, raw otherwise.
  Bounds optimizer_bounds() const;
  Eigen::VectorXd to_raw(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_raw(const Eigen::VectorXd& x_raw) const;
  void validate() const;
};

/// Builds a problem around the simulation plant; target length must equal
/// config.n_steps.
TrainingProblem make_training_problem(const SimConfig& config, std::vector<double> target,
                                      Bounds bounds, double fd_delta, DesignScaling scaling,
                                      std::size_t worker_count,
                                      std::optional<std::filesystem::path> eval_root = {});

struct EvalResult {
  double f = 0.0;           // RMSE at x
  double mse = 0.0;
  Eigen::VectorXd g;        // forward-difference gradient in optimizer coordinates
  std::size_t n_sims = 0;   // d + 1
};

/// Runs the base point and d forward perturbations concurrently.
/// x is in optimizer coordinates and must lie in optimizer_bounds() (DomainError).
/// A failing simulation raises EvaluationError carrying its index.
EvalResult objective_and_gradient(const Eigen::VectorXd& x, const TrainingProblem& problem);

struct BatchItem {
  bool ok = false;
  double rmse = 0.0;
  double mse = 0.0;
  std::string error;
};

/// RMSE/MSE for each raw design vector, concurrently and in input order.
/// Per-item failures are reported in place; the batch always completes.
/// Throws DomainError when any vector lies outside the raw bounds.
std::vector<BatchItem> evaluate_batch(const std::vector<Eigen::VectorXd>& xs_raw,
                                      const TrainingProblem& problem);

}  // namespace neuroskin
