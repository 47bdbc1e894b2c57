#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace neuroskin {

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds uniform(std::size_t dim, double lower, double upper);
  std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
  /// Throws InvalidArgument unless sizes agree and lower < upper everywhere.
  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;
};

/// Componentwise clamp onto [lower, upper].
Eigen::VectorXd project(const Eigen::VectorXd& x, const Bounds& bounds);

/// Infinity norm of the projected gradient P(x - g) - x.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Bounds& bounds);

struct LbfgsbOptions {
  std::size_t history_size = 10;
  // Stop when (f_k - f_{k+1}) <= factr * eps * max(|f_k|, |f_{k+1}|, 1).
  double factr = 1.0e12;
  double pgtol = 1.0e-5;
  std::size_t maxfun = 100;
  std::size_t maxiter = 5;
  // Function evaluations allowed inside one line search.
  std::size_t max_linesearch = 20;
  // Known lower bound of f; reaching it ends the run as converged.
  double f_target = -std::numeric_limits<double>::infinity();

  void validate() const;
};

enum class LbfgsbStatus { converged, max_iterations, max_evaluations, degraded_convergence, aborted };

std::string to_string(LbfgsbStatus status);

struct IterateRecord {
  std::size_t iteration = 0;
  Eigen::VectorXd x;
  double f = 0.0;
  double projected_gradient_norm = 0.0;
  std::size_t n_evaluations = 0;
};

struct LbfgsbResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  LbfgsbStatus status = LbfgsbStatus::converged;
  std::string message;
  std::size_t n_iterations = 0;
  std::size_t n_evaluations = 0;
  /// Iteration 0 is the (projected) starting point; later entries are the
  /// accepted iterates in order.
  std::vector<IterateRecord> trace;
};

/// Returns f(x) and writes the gradient into grad (already sized).
using ValueGradFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Called once per accepted iterate (not for the starting point).
using IterateCallback = std::function<void(const Eigen::VectorXd& x)>;

/// Limited-memory BFGS for box constraints: compact (W, M) representation of
/// the quasi-Newton matrix, generalized Cauchy point along the projected
/// steepest-descent path, direct primal subspace minimization over the free
/// variables and a More-Thuente line search for the strong Wolfe conditions.
///
/// Exceptions thrown by valgrad propagate unchanged.
LbfgsbResult minimize(const ValueGradFn& valgrad, const Eigen::VectorXd& x0, const Bounds& bounds,
                      const LbfgsbOptions& opts = {}, const IterateCallback& on_iterate = {});

namespace detail {

/// More-Thuente line search state machine (MINPACK-2 dcsrch semantics).
/// Feed it (f, g'd) at the current trial step; it answers with the next step
/// or reports that the search has finished.
class MoreThuente {
 public:
  enum class Task { evaluate, converged, warning, error };

  MoreThuente(double ftol, double gtol, double xtol, double stpmin, double stpmax);

  /// Starts at stp with f(0) = f0 and derivative g0 < 0.
  Task start(double f0, double g0, double& stp);
  /// Reports the value/derivative at the stp last handed out; updates stp.
  Task next(double f, double g, double& stp);

  const std::string& message() const { return message_; }

 private:
  double ftol_, gtol_, xtol_, stpmin_, stpmax_;
  bool brackt_ = false;
  int stage_ = 1;
  double finit_ = 0, ginit_ = 0, gtest_ = 0, width_ = 0, width1_ = 0;
  double stx_ = 0, fx_ = 0, gx_ = 0;
  double sty_ = 0, fy_ = 0, gy_ = 0;
  double stmin_ = 0, stmax_ = 0;
  std::string message_;
};

/// One safeguarded cubic/quadratic interpolation step (MINPACK-2 dcstep).
void more_thuente_step(double& stx, double& fx, double& dx, double& sty, double& fy, double& dy,
                       double& stp, double fp, double dp, bool& brackt, double stpmin,
                       double stpmax);

}  // namespace detail

}  // namespace neuroskin
