#include "neuroskin/objective.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "neuroskin/errors.hpp"
#include "neuroskin/neuro.hpp"
#include "neuroskin/worker_pool.hpp"

namespace neuroskin {

double mse(std::span<const double> yhat, std::span<const double> y) {
  if (yhat.size() != y.size())
    throw ShapeError("series lengths differ: " + std::to_string(yhat.size()) + " vs " +
                     std::to_string(y.size()));
  if (y.empty()) throw ShapeError("series are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = yhat[i] - y[i];
    sum += r * r;
  }
  return sum / static_cast<double>(y.size());
}

double rmse(std::span<const double> yhat, std::span<const double> y) {
  return std::sqrt(mse(yhat, y));
}

double rmse(const TimeSeries& yhat, const TimeSeries& y) { return rmse(yhat.values, y.values); }
double mse(const TimeSeries& yhat, const TimeSeries& y) { return mse(yhat.values, y.values); }

DesignScaling parse_scaling(std::string_view name) {
  if (name == "raw") return DesignScaling::raw;
  if (name == "normalized") return DesignScaling::normalized;
  throw InvalidArgument("unknown design scaling '" + std::string(name) + "'");
}

std::string to_string(DesignScaling scaling) {
  return scaling == DesignScaling::raw ? "raw" : "normalized";
}

Plant make_simulation_plant(SimConfig config, std::optional<std::filesystem::path> eval_root) {
  return [config = std::move(config), eval_root = std::move(eval_root)](
             std::span<const double> x_raw, std::size_t eval_index) {
    if (eval_root) return run_and_write(*eval_root / std::to_string(eval_index), config, x_raw).values;
    return simulate(config, broadcast_design(x_raw, config.element_count())).values;
  };
}

Bounds TrainingProblem::optimizer_bounds() const {
  if (scaling == DesignScaling::raw) return bounds;
  return Bounds::uniform(dim(), 0.0, 1.0);
}

Eigen::VectorXd TrainingProblem::to_raw(const Eigen::VectorXd& x) const {
  if (scaling == DesignScaling::raw) return x;
  return bounds.lower.array() + x.array() * (bounds.upper - bounds.lower).array();
}

Eigen::VectorXd TrainingProblem::from_raw(const Eigen::VectorXd& x_raw) const {
  if (scaling == DesignScaling::raw) return x_raw;
  return (x_raw - bounds.lower).array() / (bounds.upper - bounds.lower).array();
}

void TrainingProblem::validate() const {
  if (!plant) throw InvalidArgument("training problem: no plant");
  bounds.validate();
  if (bounds.size() == 0) throw InvalidArgument("training problem: empty design vector");
  if (!(fd_delta > 0.0)) throw InvalidArgument("training problem: fd_delta must be > 0");
  if (target.empty()) throw InvalidArgument("training problem: empty target");
}

TrainingProblem make_training_problem(const SimConfig& config, std::vector<double> target,
                                      Bounds bounds, double fd_delta, DesignScaling scaling,
                                      std::size_t worker_count,
                                      std::optional<std::filesystem::path> eval_root) {
  if (target.size() != config.n_steps)
    throw ConfigError("target has " + std::to_string(target.size()) + " samples but the config runs " +
                      std::to_string(config.n_steps) + " steps");
  if (bounds.size() != config.design_dim)
    throw ConfigError("bounds dimension does not match design_dim");
  TrainingProblem p{make_simulation_plant(config, std::move(eval_root)), std::move(target),
                    std::move(bounds), fd_delta, scaling, worker_count};
  p.validate();
  return p;
}

namespace {

std::size_t resolve_workers(std::size_t requested, std::size_t tasks) {
  return requested == 0 ? tasks : requested;
}

std::string describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

EvalResult objective_and_gradient(const Eigen::VectorXd& x, const TrainingProblem& problem) {
  problem.validate();
  const std::size_t d = problem.dim();
  if (static_cast<std::size_t>(x.size()) != d) throw ShapeError("objective: design dimension mismatch");
  if (!problem.optimizer_bounds().contains(x)) throw DomainError("design out of bounds");

  // Raw design vectors: index 0 is the base point, i + 1 perturbs variable i.
  std::vector<Eigen::VectorXd> designs(d + 1);
  designs[0] = problem.to_raw(x);
  for (std::size_t i = 0; i < d; ++i) {
    Eigen::VectorXd xi = x;
    xi(static_cast<Eigen::Index>(i)) += problem.fd_delta;
    designs[i + 1] = problem.to_raw(xi);
  }

  std::vector<std::vector<double>> outputs(d + 1);
  const auto errors = run_indexed(d + 1, resolve_workers(problem.worker_count, d + 1), [&](std::size_t i) {
    outputs[i] = problem.plant(std::span<const double>(designs[i].data(), designs[i].size()), i);
  });
  for (std::size_t i = 0; i <= d; ++i) {
    if (errors[i]) {
      const std::string which = i == 0 ? "base point" : "perturbation of variable " + std::to_string(i - 1);
      throw EvaluationError(i, "simulation failed at " + which + ": " + describe(errors[i]));
    }
  }

  EvalResult res;
  res.mse = mse(outputs[0], problem.target);
  res.f = std::sqrt(res.mse);
  res.g.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    res.g(static_cast<Eigen::Index>(i)) = (rmse(outputs[i + 1], problem.target) - res.f) / problem.fd_delta;
  res.n_sims = d + 1;
  return res;
}

std::vector<BatchItem> evaluate_batch(const std::vector<Eigen::VectorXd>& xs_raw,
                                      const TrainingProblem& problem) {
  problem.validate();
  for (std::size_t k = 0; k < xs_raw.size(); ++k)
    if (!problem.bounds.contains(xs_raw[k]))
      throw DomainError("design out of bounds (batch item " + std::to_string(k) + ")");

  std::vector<BatchItem> items(xs_raw.size());
  const auto errors = run_indexed(xs_raw.size(), resolve_workers(problem.worker_count, xs_raw.size()),
                                  [&](std::size_t k) {
                                    const auto& x = xs_raw[k];
                                    const auto y = problem.plant(std::span<const double>(x.data(), x.size()), k);
                                    items[k].mse = mse(y, problem.target);
                                    items[k].rmse = std::sqrt(items[k].mse);
                                    items[k].ok = true;
                                  });
  for (std::size_t k = 0; k < items.size(); ++k)
    if (errors[k]) items[k] = BatchItem{false, 0.0, 0.0, describe(errors[k])};
  return items;
}

}  // namespace neuroskin
