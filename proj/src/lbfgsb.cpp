#include "neuroskin/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "neuroskin/errors.hpp"

namespace neuroskin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Line-search constants of the reference L-BFGS-B code.
constexpr double kFtol = 1e-3;
constexpr double kGtol = 0.9;
constexpr double kXtol = 0.1;

}  // namespace

Bounds Bounds::uniform(std::size_t dim, double lower, double upper) {
  const auto n = static_cast<Eigen::Index>(dim);
  return {Eigen::VectorXd::Constant(n, lower), Eigen::VectorXd::Constant(n, upper)};
}

void Bounds::validate() const {
  if (lower.size() != upper.size()) throw InvalidArgument("bounds: lower/upper sizes differ");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower(i) < upper(i)))
      throw InvalidArgument("bounds: lower must be < upper for variable " + std::to_string(i));
}

bool Bounds::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const Bounds& bounds) {
  if (x.size() != bounds.lower.size()) throw ShapeError("project: dimension mismatch");
  return x.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Bounds& bounds) {
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double gi = g(i);
    if (gi < 0.0)
      gi = std::max(x(i) - bounds.upper(i), gi);
    else
      gi = std::min(x(i) - bounds.lower(i), gi);
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

void LbfgsbOptions::validate() const {
  if (history_size == 0) throw InvalidArgument("lbfgsb: history size must be >= 1");
  if (!(factr > 0.0)) throw InvalidArgument("lbfgsb: factr must be > 0");
  if (!(pgtol > 0.0)) throw InvalidArgument("lbfgsb: pgtol must be > 0");
  if (maxfun == 0) throw InvalidArgument("lbfgsb: maxfun must be >= 1");
  if (maxiter == 0) throw InvalidArgument("lbfgsb: maxiter must be >= 1");
  if (max_linesearch == 0) throw InvalidArgument("lbfgsb: max_linesearch must be >= 1");
}

std::string to_string(LbfgsbStatus status) {
  switch (status) {
    case LbfgsbStatus::converged: return "converged";
    case LbfgsbStatus::max_iterations: return "max_iterations";
    case LbfgsbStatus::max_evaluations: return "max_evaluations";
    case LbfgsbStatus::degraded_convergence: return "degraded_convergence";
    case LbfgsbStatus::aborted: return "aborted";
  }
  return "unknown";
}

namespace detail {

void more_thuente_step(double& stx, double& fx, double& dx, double& sty, double& fy, double& dy,
                       double& stp, double fp, double dp, bool& brackt, double stpmin,
                       double stpmax) {
  const double sgnd = dp * (dx / std::abs(dx));
  double stpf = 0.0;

  if (fp > fx) {
    // Higher function value: the minimum is bracketed.
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
    if (stp < stx) gamma = -gamma;
    const double p = (gamma - dx) + theta;
    const double q = ((gamma - dx) + gamma) + dp;
    const double r = p / q;
    const double stpc = stx + r * (stp - stx);
    const double stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx);
    if (std::abs(stpc - stx) < std::abs(stpq - stx))
      stpf = stpc;
    else
      stpf = stpc + (stpq - stpc) / 2.0;
    brackt = true;
  } else if (sgnd < 0.0) {
    // Derivatives of opposite sign: bracketed.
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = ((gamma - dp) + gamma) + dx;
    const double r = p / q;
    const double stpc = stp + r * (stx - stp);
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    stpf = std::abs(stpc - stp) > std::abs(stpq - stp) ? stpc : stpq;
    brackt = true;
  } else if (std::abs(dp) < std::abs(dx)) {
    // Same sign, derivative magnitude decreases.
    const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
    const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
    double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
    if (stp > stx) gamma = -gamma;
    const double p = (gamma - dp) + theta;
    const double q = (gamma + (dx - dp)) + gamma;
    const double r = p / q;
    double stpc;
    if (r < 0.0 && gamma != 0.0)
      stpc = stp + r * (stx - stp);
    else if (stp > stx)
      stpc = stpmax;
    else
      stpc = stpmin;
    const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
    if (brackt) {
      stpf = std::abs(stpc - stp) < std::abs(stpq - stp) ? stpc : stpq;
      if (stp > stx)
        stpf = std::min(stp + 0.66 * (sty - stp), stpf);
      else
        stpf = std::max(stp + 0.66 * (sty - stp), stpf);
    } else {
      stpf = std::abs(stpc - stp) > std::abs(stpq - stp) ? stpc : stpq;
      stpf = std::clamp(stpf, stpmin, stpmax);
    }
  } else {
    // Same sign, derivative magnitude does not decrease.
    if (brackt) {
      const double theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp;
      const double s = std::max({std::abs(theta), std::abs(dy), std::abs(dp)});
      double gamma = s * std::sqrt((theta / s) * (theta / s) - (dy / s) * (dp / s));
      if (stp > sty) gamma = -gamma;
      const double p = (gamma - dp) + theta;
      const double q = ((gamma - dp) + gamma) + dy;
      const double r = p / q;
      stpf = stp + r * (sty - stp);
    } else if (stp > stx) {
      stpf = stpmax;
    } else {
      stpf = stpmin;
    }
  }

  if (fp > fx) {
    sty = stp;
    fy = fp;
    dy = dp;
  } else {
    if (sgnd < 0.0) {
      sty = stx;
      fy = fx;
      dy = dx;
    }
    stx = stp;
    fx = fp;
    dx = dp;
  }
  stp = stpf;
}

MoreThuente::MoreThuente(double ftol, double gtol, double xtol, double stpmin, double stpmax)
    : ftol_(ftol), gtol_(gtol), xtol_(xtol), stpmin_(stpmin), stpmax_(stpmax) {}

MoreThuente::Task MoreThuente::start(double f0, double g0, double& stp) {
  if (stp < stpmin_) { message_ = "step below stpmin"; return Task::error; }
  if (stp > stpmax_) { message_ = "step above stpmax"; return Task::error; }
  if (g0 >= 0.0) { message_ = "initial derivative is not negative"; return Task::error; }

  brackt_ = false;
  stage_ = 1;
  finit_ = f0;
  ginit_ = g0;
  gtest_ = ftol_ * ginit_;
  width_ = stpmax_ - stpmin_;
  width1_ = width_ / 0.5;
  stx_ = 0.0; fx_ = finit_; gx_ = ginit_;
  sty_ = 0.0; fy_ = finit_; gy_ = ginit_;
  stmin_ = 0.0;
  stmax_ = stp + 4.0 * stp;
  message_.clear();
  return Task::evaluate;
}

MoreThuente::Task MoreThuente::next(double f, double g, double& stp) {
  constexpr double xtrapl = 1.1;
  constexpr double xtrapu = 4.0;

  const double ftest = finit_ + stp * gtest_;
  if (stage_ == 1 && f <= ftest && g >= 0.0) stage_ = 2;

  if (brackt_ && (stp <= stmin_ || stp >= stmax_)) { message_ = "rounding errors prevent progress"; return Task::warning; }
  if (brackt_ && stmax_ - stmin_ <= xtol_ * stmax_) { message_ = "xtol test satisfied"; return Task::warning; }
  if (stp == stpmax_ && f <= ftest && g <= gtest_) { message_ = "step at stpmax"; return Task::warning; }
  if (stp == stpmin_ && (f > ftest || g >= gtest_)) { message_ = "step at stpmin"; return Task::warning; }
  if (f <= ftest && std::abs(g) <= gtol_ * (-ginit_)) { message_ = "strong Wolfe conditions hold"; return Task::converged; }

  if (stage_ == 1 && f <= fx_ && f > ftest) {
    // Modified function psi(stp) = f(stp) - f(0) - stp * gtest.
    double fm = f - stp * gtest_;
    double fxm = fx_ - stx_ * gtest_;
    double fym = fy_ - sty_ * gtest_;
    double gm = g - gtest_;
    double gxm = gx_ - gtest_;
    double gym = gy_ - gtest_;
    more_thuente_step(stx_, fxm, gxm, sty_, fym, gym, stp, fm, gm, brackt_, stmin_, stmax_);
    fx_ = fxm + stx_ * gtest_;
    fy_ = fym + sty_ * gtest_;
    gx_ = gxm + gtest_;
    gy_ = gym + gtest_;
  } else {
    more_thuente_step(stx_, fx_, gx_, sty_, fy_, gy_, stp, f, g, brackt_, stmin_, stmax_);
  }

  if (brackt_) {
    if (std::abs(sty_ - stx_) >= 0.66 * width1_) stp = stx_ + 0.5 * (sty_ - stx_);
    width1_ = width_;
    width_ = std::abs(sty_ - stx_);
    stmin_ = std::min(stx_, sty_);
    stmax_ = std::max(stx_, sty_);
  } else {
    stmin_ = stp + xtrapl * (stp - stx_);
    stmax_ = stp + xtrapu * (stp - stx_);
  }

  stp = std::clamp(stp, stpmin_, stpmax_);
  if ((brackt_ && (stp <= stmin_ || stp >= stmax_)) || (brackt_ && stmax_ - stmin_ <= xtol_ * stmax_))
    stp = stx_;
  return Task::evaluate;
}

}  // namespace detail

namespace {

// Limited-memory quasi-Newton matrix B = theta I - W M W^T with
// W = [Y, theta S] and M = [[-D, L^T], [L, theta S^T S]]^{-1}.
class CompactBfgs {
 public:
  CompactBfgs(Eigen::Index n, std::size_t capacity) : n_(n), capacity_(static_cast<Eigen::Index>(capacity)) {
    reset();
  }

  void reset() {
    s_.resize(n_, 0);
    y_.resize(n_, 0);
    theta_ = 1.0;
    w_.resize(n_, 0);
    m_.resize(0, 0);
  }

  Eigen::Index pairs() const { return s_.cols(); }
  double theta() const { return theta_; }
  const Eigen::MatrixXd& w() const { return w_; }
  const Eigen::MatrixXd& m() const { return m_; }

  void push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    const Eigen::Index k = s_.cols();
    if (k < capacity_) {
      s_.conservativeResize(Eigen::NoChange, k + 1);
      y_.conservativeResize(Eigen::NoChange, k + 1);
    } else {
      s_.leftCols(k - 1) = s_.rightCols(k - 1).eval();
      y_.leftCols(k - 1) = y_.rightCols(k - 1).eval();
    }
    s_.rightCols(1) = s;
    y_.rightCols(1) = y;
    theta_ = y.squaredNorm() / s.dot(y);

    const Eigen::Index p = s_.cols();
    w_.resize(n_, 2 * p);
    w_ << y_, theta_ * s_;

    const Eigen::MatrixXd sy = s_.transpose() * y_;
    Eigen::MatrixXd middle = Eigen::MatrixXd::Zero(2 * p, 2 * p);
    for (Eigen::Index i = 0; i < p; ++i) {
      middle(i, i) = -sy(i, i);
      for (Eigen::Index j = 0; j < i; ++j) {
        middle(p + i, j) = sy(i, j);  // L
        middle(j, p + i) = sy(i, j);  // L^T
      }
    }
    middle.bottomRightCorner(p, p) = theta_ * (s_.transpose() * s_);
    m_ = middle.fullPivLu().inverse();
  }

 private:
  Eigen::Index n_;
  Eigen::Index capacity_;
  Eigen::MatrixXd s_, y_, w_, m_;
  double theta_ = 1.0;
};

struct CauchyResult {
  Eigen::VectorXd xc;
  Eigen::VectorXd c;  // W^T (xc - x)
};

CauchyResult generalized_cauchy_point(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                      const Bounds& bounds, const CompactBfgs& bfgs) {
  const Eigen::Index n = x.size();
  const double theta = bfgs.theta();
  const Eigen::MatrixXd& W = bfgs.w();
  const Eigen::MatrixXd& M = bfgs.m();

  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  std::vector<std::pair<double, Eigen::Index>> breaks;
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = kInf;
    if (g(i) < 0.0)
      t = (x(i) - bounds.upper(i)) / g(i);
    else if (g(i) > 0.0)
      t = (x(i) - bounds.lower(i)) / g(i);
    if (g(i) != 0.0 && t > 0.0) {
      d(i) = -g(i);
      if (t < kInf) breaks.emplace_back(t, i);
    }
  }
  // Ascending breakpoints; ties broken by index.
  std::stable_sort(breaks.begin(), breaks.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  CauchyResult out{x, Eigen::VectorXd::Zero(W.cols())};
  if (d.isZero(0.0)) return out;

  Eigen::VectorXd p = W.transpose() * d;
  double fp = -d.squaredNorm();
  double fpp = -theta * fp - p.dot(M * p);
  const double fpp0 = fpp;
  double dtmin = -fp / fpp;
  double told = 0.0;

  std::size_t k = 0;
  for (; k < breaks.size(); ++k) {
    const auto [t, b] = breaks[k];
    const double dt = t - told;
    if (dtmin < dt) break;

    out.xc(b) = d(b) > 0.0 ? bounds.upper(b) : bounds.lower(b);
    const double zb = out.xc(b) - x(b);
    out.c += dt * p;
    const double gb = g(b);
    const Eigen::VectorXd wb = W.row(b).transpose();
    fp += dt * fpp + gb * gb + theta * gb * zb - gb * wb.dot(M * out.c);
    fpp -= theta * gb * gb + 2.0 * gb * wb.dot(M * p) + gb * gb * wb.dot(M * wb);
    fpp = std::max(kEps * fpp0, fpp);
    p += gb * wb;
    d(b) = 0.0;
    told = t;
    dtmin = -fp / fpp;
  }
  if (d.isZero(0.0)) dtmin = 0.0;
  dtmin = std::max(dtmin, 0.0);
  told += dtmin;
  for (Eigen::Index i = 0; i < n; ++i)
    if (d(i) != 0.0) out.xc(i) = x(i) + told * d(i);
  out.xc = project(out.xc, bounds);
  out.c += dtmin * p;
  return out;
}

// Minimizes the quadratic model over the variables that are free at xc
// (direct primal method), then truncates the step to stay in the box.
Eigen::VectorXd subspace_minimum(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                 const CauchyResult& cp, const Bounds& bounds,
                                 const CompactBfgs& bfgs) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i)
    if (cp.xc(i) > bounds.lower(i) && cp.xc(i) < bounds.upper(i)) free.push_back(i);
  if (free.empty()) return cp.xc;

  const double theta = bfgs.theta();
  const Eigen::MatrixXd& W = bfgs.w();
  const Eigen::MatrixXd& M = bfgs.m();

  Eigen::VectorXd reduced_grad = g + theta * (cp.xc - x);
  if (W.cols() > 0) reduced_grad -= W * (M * cp.c);

  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd r(nf);
  Eigen::MatrixXd wz(nf, W.cols());
  for (Eigen::Index k = 0; k < nf; ++k) {
    r(k) = reduced_grad(free[static_cast<std::size_t>(k)]);
    wz.row(k) = W.row(free[static_cast<std::size_t>(k)]);
  }

  Eigen::VectorXd du = -r / theta;
  if (W.cols() > 0) {
    Eigen::VectorXd v = M * (wz.transpose() * r);
    const Eigen::MatrixXd nmat =
        Eigen::MatrixXd::Identity(W.cols(), W.cols()) - (M * (wz.transpose() * wz)) / theta;
    v = nmat.fullPivLu().solve(v);
    du -= (wz * v) / (theta * theta);
  }

  double alpha = 1.0;
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = free[static_cast<std::size_t>(k)];
    if (du(k) > 0.0)
      alpha = std::min(alpha, (bounds.upper(i) - cp.xc(i)) / du(k));
    else if (du(k) < 0.0)
      alpha = std::min(alpha, (bounds.lower(i) - cp.xc(i)) / du(k));
  }
  Eigen::VectorXd z = cp.xc;
  for (Eigen::Index k = 0; k < nf; ++k) z(free[static_cast<std::size_t>(k)]) += alpha * du(k);
  return project(z, bounds);
}

double max_feasible_step(const Eigen::VectorXd& x, const Eigen::VectorXd& d, const Bounds& bounds) {
  double stp = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d(i) > 0.0)
      stp = std::min(stp, (bounds.upper(i) - x(i)) / d(i));
    else if (d(i) < 0.0)
      stp = std::min(stp, (bounds.lower(i) - x(i)) / d(i));
  }
  return stp;
}

bool all_finite(double f, const Eigen::VectorXd& g) { return std::isfinite(f) && g.allFinite(); }

}  // namespace

LbfgsbResult minimize(const ValueGradFn& valgrad, const Eigen::VectorXd& x0, const Bounds& bounds,
                      const LbfgsbOptions& opts, const IterateCallback& on_iterate) {
  bounds.validate();
  opts.validate();
  if (x0.size() != bounds.lower.size()) throw ShapeError("lbfgsb: x0 and bounds differ in size");

  const Eigen::Index n = x0.size();
  LbfgsbResult res;
  res.x = project(x0, bounds);
  res.g = Eigen::VectorXd::Zero(n);
  res.f = valgrad(res.x, res.g);
  res.n_evaluations = 1;

  auto record = [&](std::size_t iteration) {
    res.trace.push_back({iteration, res.x, res.f, projected_gradient_norm(res.x, res.g, bounds),
                         res.n_evaluations});
  };

  if (!all_finite(res.f, res.g)) {
    res.status = LbfgsbStatus::aborted;
    res.message = "non-finite objective or gradient at the starting point";
    return res;
  }
  record(0);
  if (res.trace.back().projected_gradient_norm <= opts.pgtol) {
    res.status = LbfgsbStatus::converged;
    res.message = "projected gradient below pgtol";
    return res;
  }
  if (res.f <= opts.f_target) {
    res.status = LbfgsbStatus::converged;
    res.message = "objective reached its target value";
    return res;
  }

  CompactBfgs bfgs(n, opts.history_size);
  Eigen::VectorXd x_trial(n), g_trial(n);

  while (true) {
    const CauchyResult cp = generalized_cauchy_point(res.x, res.g, bounds, bfgs);
    const Eigen::VectorXd z = subspace_minimum(res.x, res.g, cp, bounds, bfgs);
    const Eigen::VectorXd d = z - res.x;
    const double gd = res.g.dot(d);

    bool accepted = false;
    bool budget_hit = false;
    double f_trial = res.f;
    std::string ls_message;

    if (gd < 0.0) {
      const double stpmax = std::max(1.0, max_feasible_step(res.x, d, bounds));
      double stp = bfgs.pairs() == 0 ? std::min(1.0 / d.norm(), stpmax) : 1.0;
      detail::MoreThuente search(kFtol, kGtol, kXtol, 0.0, stpmax);
      auto task = search.start(res.f, gd, stp);
      for (std::size_t evals = 0; task == detail::MoreThuente::Task::evaluate; ++evals) {
        if (evals >= opts.max_linesearch) {
          ls_message = "line search exceeded its evaluation limit";
          break;
        }
        if (res.n_evaluations >= opts.maxfun) {
          budget_hit = true;
          break;
        }
        x_trial = stp == 1.0 ? z : project(res.x + stp * d, bounds);
        g_trial.setZero();
        f_trial = valgrad(x_trial, g_trial);
        ++res.n_evaluations;
        if (!all_finite(f_trial, g_trial)) {
          res.status = LbfgsbStatus::aborted;
          res.message = "non-finite objective or gradient during line search";
          res.n_iterations = res.trace.back().iteration;
          return res;
        }
        task = search.next(f_trial, g_trial.dot(d), stp);
      }
      if (task == detail::MoreThuente::Task::converged || task == detail::MoreThuente::Task::warning)
        accepted = f_trial <= res.f;
      else if (budget_hit || task == detail::MoreThuente::Task::evaluate)
        // Budget or evaluation cap reached mid-search: keep a decreasing trial.
        accepted = f_trial < res.f;
      if (ls_message.empty()) ls_message = search.message();
    } else {
      ls_message = "search direction is not a descent direction";
    }

    if (!accepted) {
      if (budget_hit) {
        res.status = LbfgsbStatus::max_evaluations;
        res.message = "evaluation budget exhausted during line search";
        break;
      }
      if (bfgs.pairs() == 0) {
        res.status = LbfgsbStatus::degraded_convergence;
        res.message = "line search failed: " + ls_message;
        break;
      }
      // Discard curvature history and retry from steepest descent.
      bfgs.reset();
      continue;
    }

    const Eigen::VectorXd s = x_trial - res.x;
    const Eigen::VectorXd y = g_trial - res.g;
    const double f_old = res.f;
    const double descent = -res.g.dot(s);
    res.x = x_trial;
    res.f = f_trial;
    res.g = g_trial;
    const std::size_t iteration = res.trace.back().iteration + 1;
    record(iteration);
    res.n_iterations = iteration;
    if (on_iterate) on_iterate(res.x);

    if (res.trace.back().projected_gradient_norm <= opts.pgtol) {
      res.status = LbfgsbStatus::converged;
      res.message = "projected gradient below pgtol";
      break;
    }
    if (f_old - res.f <= opts.factr * kEps * std::max({std::abs(f_old), std::abs(res.f), 1.0})) {
      res.status = LbfgsbStatus::converged;
      res.message = "relative reduction of f below factr * eps";
      break;
    }
    if (res.f <= opts.f_target) {
      res.status = LbfgsbStatus::converged;
      res.message = "objective reached its target value";
      break;
    }
    if (budget_hit) {
      res.status = LbfgsbStatus::max_evaluations;
      res.message = "evaluation budget exhausted";
      break;
    }
    if (iteration >= opts.maxiter) {
      res.status = LbfgsbStatus::max_iterations;
      res.message = "iteration limit reached";
      break;
    }
    if (res.n_evaluations >= opts.maxfun) {
      res.status = LbfgsbStatus::max_evaluations;
      res.message = "evaluation budget exhausted";
      break;
    }

    // Curvature pairs that are not safely positive are skipped.
    if (s.dot(y) > kEps * descent) bfgs.push(s, y);
  }
  res.n_iterations = res.trace.back().iteration;
  return res;
}

}  // namespace neuroskin
