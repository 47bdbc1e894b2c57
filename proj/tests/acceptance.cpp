// Acceptance checks. Prints one line per criterion:
//   criterion N: PASS|FAIL (details)
// Usage: acceptance [--criterion N]   (default: all)
// Exit status is 0 only when every selected criterion passes.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "neuroskin/commands.hpp"
#include "neuroskin/fe.hpp"
#include "neuroskin/lbfgsb.hpp"
#include "neuroskin/mesh.hpp"
#include "neuroskin/neuro.hpp"
#include "neuroskin/objective.hpp"
#include "neuroskin/series_io.hpp"
#include "neuroskin/simulation.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace neuroskin;
namespace fs = std::filesystem;
using nlohmann::json;
using Eigen::VectorXd;

namespace {

// Pinned tolerances.
constexpr double kC1XTol = 1500.0;           // 1% of the 150000 box
constexpr double kC1Reduction = 1e-3;        // final / initial RMSE
constexpr double kC2XTol = 3000.0;           // 2% of the box
constexpr double kC2Reduction = 1e-2;        // at least 100x
constexpr double kC3RelTol = 0.05;
constexpr double kC3Floor = 1e-8;            // |g_i| > floor * (1 + |f|)
constexpr double kC4QuadTol = 1e-6;
constexpr double kC4RosenTol = 1e-5;
constexpr std::size_t kC4RosenMaxIter = 200;
constexpr double kC5StiffRel = 1e-12;
constexpr double kC5RigidRel = 1e-9;
constexpr double kC5SdofTol = 1e-3;
constexpr double kC5EnergyDrift = 1e-8;
constexpr double kC8Reduction = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json plate_config(std::size_t d) {
  json c = json::parse(R"({
    "length_unit": "mm",
    "mesh": {"nx": 10, "ny": 20, "elem_size": 50},
    "material": {"E": 2.0e9, "nu": 0.3, "rho": 1200, "thickness": 5, "rayleigh_a0": 0.5, "rayleigh_a1": 1.0e-4},
    "neurons": {"activation": "tanh", "input_weights": 1000},
    "excitation": {"nodes": [224, 225, 226], "direction": "x", "amplitude": 50,
                   "waveform": "half_sine", "t_start": 0.0, "t_end": 0.05},
    "time": {"dt": 0.001, "n_steps": 500},
    "output": {"node": 225, "dof": "x"},
    "training": {"bounds": [[400000, 550000]], "fd_delta": 0.01, "scaling": "normalized",
                 "lbfgsb": {"factr": 1.0e12, "pgtol": 1.0e-5, "maxfun": 100, "maxiter": 5}}
  })");
  c["neurons"]["design_dim"] = d;
  c["neurons"]["default_design"] = std::vector<double>(d, 450000.0);
  c["training"]["x0"] = std::vector<double>(d, 450000.0);
  return c;
}

struct TrainRun {
  int code = -1;
  std::vector<ResultRow> rows;
  json summary;
  double seconds = 0.0;
  std::string log;
};

// gen-target followed by train, both through the command layer.
TrainRun train_inverse_crime(const fs::path& dir, const json& config, const std::vector<double>& w_star,
                             const Overrides& over) {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config.dump(2);
  std::ostringstream out, err;
  TrainRun run;
  if (cmd_gen_target(cfg, w_star, dir / "target.out", {out, err}) != kExitOk) {
    run.log = err.str();
    return run;
  }
  const auto t0 = std::chrono::steady_clock::now();
  run.code = cmd_train(cfg, dir / "target.out", dir / "run", over, {out, err});
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.log = out.str() + err.str();
  if (run.code != kExitOk) return run;
  run.rows = read_result_csv(dir / "run" / "result.csv", w_star.size());
  run.summary = json::parse(slurp(dir / "run" / "summary.json"));
  return run;
}

std::string vec_str(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

Outcome criterion1() {
  TempDir tmp;
  json cfg = plate_config(1);
  Overrides o;
  o.maxiter = 50;
  const auto run = train_inverse_crime(tmp.path(), cfg, {500000.0}, o);
  if (run.code != kExitOk || run.rows.empty()) return {false, "train failed: " + run.log};
  const double x = run.summary["xopt"][0].get<double>();
  const double f0 = *run.rows.front().rmse;
  const double f = run.summary["fopt"].get<double>();
  const bool ok = std::abs(x - 500000.0) <= kC1XTol && f <= kC1Reduction * f0;
  return {ok, "xopt=" + fmt(x) + " |err|=" + fmt(std::abs(x - 500000.0)) + " (tol " + fmt(kC1XTol) +
                  "), rmse " + fmt(f0) + " -> " + fmt(f) + " ratio=" + fmt(f / f0) + " (tol " +
                  fmt(kC1Reduction) + "), status=" + run.summary["status"].get<std::string>() +
                  ", evals=" + std::to_string(run.summary["n_evaluations"].get<int>()) + ", " +
                  fmt(run.seconds) + " s"};
}

Outcome criterion2() {
  TempDir tmp;
  const std::vector<double> w_star{430000.0, 470000.0, 510000.0, 540000.0};
  Overrides o;
  o.maxiter = 50;
  o.workers = 5;
  const auto run = train_inverse_crime(tmp.path(), plate_config(4), w_star, o);
  if (run.code != kExitOk || run.rows.empty()) return {false, "train failed: " + run.log};
  std::vector<double> x, err;
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    x.push_back(run.summary["xopt"][i].get<double>());
    err.push_back(std::abs(x[i] - w_star[i]));
    worst = std::max(worst, err[i]);
  }
  const double f0 = *run.rows.front().rmse;
  const double f = run.summary["fopt"].get<double>();
  const bool ok = worst <= kC2XTol && f <= kC2Reduction * f0;
  return {ok, "xopt=" + vec_str(x) + " max|err|=" + fmt(worst) + " (tol " + fmt(kC2XTol) + "), rmse " + fmt(f0) +
                  " -> " + fmt(f) + " ratio=" + fmt(f / f0) + " (tol " + fmt(kC2Reduction) +
                  "), status=" + run.summary["status"].get<std::string>() + ", " + fmt(run.seconds) + " s"};
}

SimConfig plate_sim(std::size_t d) {
  SimConfig c;
  c.design_dim = d;
  c.default_design.assign(d, 450000.0);
  return c;
}

Outcome criterion3() {
  const SimConfig c = plate_sim(4);
  const std::vector<double> w_star{430000.0, 470000.0, 510000.0, 540000.0};
  const auto target = simulate(c, broadcast_design(w_star, c.element_count())).values;
  const double delta = 1e-2, h = delta / 10.0;
  const auto p = make_training_problem(c, target, Bounds::uniform(4, 4e5, 5.5e5), delta, DesignScaling::normalized, 0);

  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(h, 1.0 - delta);
  double worst = 0.0;
  std::size_t compared = 0;
  for (int point = 0; point < 5; ++point) {
    VectorXd x(4);
    for (auto& v : x) v = u(rng);
    const auto r = objective_and_gradient(x, p);
    std::vector<VectorXd> probes;
    for (int i = 0; i < 4; ++i) {
      VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      probes.push_back(p.to_raw(xp));
      probes.push_back(p.to_raw(xm));
    }
    const auto items = evaluate_batch(probes, p);
    for (int i = 0; i < 4; ++i) {
      const auto& fp = items[static_cast<std::size_t>(2 * i)];
      const auto& fm = items[static_cast<std::size_t>(2 * i + 1)];
      if (!fp.ok || !fm.ok) return {false, "central-difference probe failed: " + fp.error + fm.error};
      const double central = (fp.rmse - fm.rmse) / (2.0 * h);
      if (std::abs(central) <= kC3Floor * (1.0 + std::abs(r.f))) continue;
      worst = std::max(worst, std::abs(r.g(i) - central) / std::abs(central));
      ++compared;
    }
  }
  return {worst <= kC3RelTol && compared > 0,
          std::to_string(compared) + " components compared, worst relative deviation " + fmt(worst) + " (tol " +
              fmt(kC3RelTol) + ")"};
}

// Trace feasible and f non-increasing.
bool trace_ok(const LbfgsbResult& r, const Bounds& b) {
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    if (!b.contains(r.trace[k].x)) return false;
    if (k > 0 && r.trace[k].f > r.trace[k - 1].f) return false;
  }
  return !r.trace.empty();
}

Outcome criterion4() {
  bool ok = true;
  std::string detail;

  // Interior minimum of a strictly convex quadratic.
  {
    const int d = 5;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd R(d, d);
    for (auto& v : R.reshaped()) v = n(rng);
    const Eigen::MatrixXd A = R.transpose() * R + Eigen::MatrixXd::Identity(d, d);
    VectorXd b(d);
    for (auto& v : b) v = n(rng);
    const VectorXd xs = A.ldlt().solve(b);
    const ValueGradFn fg = [&](const VectorXd& x, VectorXd& g) {
      g = A * x - b;
      return 0.5 * x.dot(A * x) - b.dot(x);
    };
    const Bounds box = Bounds::uniform(d, -10.0, 10.0);
    LbfgsbOptions o;
    o.maxiter = 200;
    o.maxfun = 1000;
    o.factr = 10.0;
    o.pgtol = 1e-10;
    const auto r = minimize(fg, VectorXd::Zero(d), box, o);
    const double err = (r.x - xs).cwiseAbs().maxCoeff();
    const bool pass = err <= kC4QuadTol && trace_ok(r, box);
    ok = ok && pass;
    detail += "quadratic err=" + fmt(err);
  }

  // Quadratic whose unconstrained minimum lies outside the box.
  {
    Eigen::Matrix2d A;
    A << 2.0, 0.5, 0.5, 1.0;
    const VectorXd c = (VectorXd(2) << 3.0, -1.0).finished();
    // f = 0.5 (x-c)^T A (x-c), box [0,2] x [-2,2]: x0 pinned at 2, x1 = c1 - A10 (2 - c0) / A11.
    const VectorXd xs = (VectorXd(2) << 2.0, c(1) - A(1, 0) * (2.0 - c(0)) / A(1, 1)).finished();
    const ValueGradFn fg = [&](const VectorXd& x, VectorXd& g) {
      g = A * (x - c);
      return 0.5 * (x - c).dot(A * (x - c));
    };
    Bounds box;
    box.lower = (VectorXd(2) << 0.0, -2.0).finished();
    box.upper = (VectorXd(2) << 2.0, 2.0).finished();
    LbfgsbOptions o;
    o.maxiter = 200;
    o.maxfun = 1000;
    o.factr = 10.0;
    o.pgtol = 1e-10;
    const auto r = minimize(fg, (VectorXd(2) << 0.5, 0.5).finished(), box, o);
    VectorXd g(2);
    fg(r.x, g);
    const double pg = projected_gradient_norm(r.x, g, box);
    const double err = (r.x - xs).cwiseAbs().maxCoeff();
    const bool pass = r.x(0) == 2.0 && err <= kC4QuadTol && pg <= kC4QuadTol && trace_ok(r, box);
    ok = ok && pass;
    detail += ", active-bound err=" + fmt(err) + " pg=" + fmt(pg);

    // One-dimensional form with an exactly representable answer.
    const ValueGradFn f1 = [](const VectorXd& x, VectorXd& gg) {
      gg(0) = 2.0 * (x(0) - 5.0);
      return (x(0) - 5.0) * (x(0) - 5.0);
    };
    const Bounds b1 = Bounds::uniform(1, 6.0, 10.0);
    const auto r1 = minimize(f1, VectorXd::Constant(1, 9.0), b1, o);
    VectorXd g1(1);
    f1(r1.x, g1);
    const bool pass1 = r1.x(0) == 6.0 && projected_gradient_norm(r1.x, g1, b1) == 0.0 && trace_ok(r1, b1);
    ok = ok && pass1;
    detail += pass1 ? ", 1-d active bound exact" : ", 1-d active bound x=" + fmt(r1.x(0));
  }

  // Rosenbrock on [-2,2]^2.
  {
    const ValueGradFn fg = [](const VectorXd& x, VectorXd& g) {
      const double a = x(1) - x(0) * x(0), b = 1.0 - x(0);
      g(0) = -400.0 * x(0) * a - 2.0 * b;
      g(1) = 200.0 * a;
      return 100.0 * a * a + b * b;
    };
    const Bounds box = Bounds::uniform(2, -2.0, 2.0);
    LbfgsbOptions o;
    o.maxiter = kC4RosenMaxIter;
    o.maxfun = 2000;
    o.factr = 10.0;
    o.pgtol = 1e-10;
    const auto r = minimize(fg, (VectorXd(2) << -1.2, 1.0).finished(), box, o);
    const double err = (r.x - VectorXd::Ones(2)).cwiseAbs().maxCoeff();
    const bool pass = err <= kC4RosenTol && r.n_iterations <= kC4RosenMaxIter && trace_ok(r, box);
    ok = ok && pass;
    detail += ", rosenbrock err=" + fmt(err) + " in " + std::to_string(r.n_iterations) + " iterations";
  }
  return {ok, detail};
}

Outcome criterion5() {
  bool ok = true;
  std::string detail;

  // Element stiffness against the oracle.
  double worst = 0.0;
  for (const auto& [a, E, nu, t] : {std::array<double, 4>{0.05, 2e9, 0.3, 0.005}, {1.0, 1.0, 0.25, 1.0},
                                    {0.2, 7e10, 0.33, 0.002}}) {
    Material m;
    m.E = E;
    m.nu = nu;
    m.thickness = t;
    const Matrix8 k = q4_membrane_stiffness(a, m);
    const auto ref = oracle::q4_stiffness(a, E, nu, t);
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        scale = std::max(scale, std::abs(ref[i][j]));
        diff = std::max(diff, std::abs(k(i, j) - ref[i][j]));
      }
    worst = std::max(worst, diff / scale);
  }
  ok = ok && worst <= kC5StiffRel;
  detail += "stiffness rel=" + fmt(worst);

  // Rigid modes and mass of the default plate.
  const SimConfig cfg;
  const Mesh mesh(cfg.nx, cfg.ny, cfg.elem_size);
  const GlobalSystem sys = assemble_global(mesh, cfg.material);
  const SparseMatrix& K = sys.stiffness();
  double kinf = 0.0;
  for (Eigen::Index r = 0; r < K.rows(); ++r) kinf = std::max(kinf, K.row(r).cwiseAbs().sum());
  double rigid = 0.0;
  for (int mode = 0; mode < 3; ++mode) {
    VectorXd v = VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
      const auto p = mesh.node_coords()[n];
      const auto ix = static_cast<Eigen::Index>(DofMap::dof(n, Axis::x));
      if (mode == 0) v(ix) = 1.0;
      if (mode == 1) v(ix + 1) = 1.0;
      if (mode == 2) {
        v(ix) = -p.y;
        v(ix + 1) = p.x;
      }
    }
    rigid = std::max(rigid, (K * v).cwiseAbs().maxCoeff() / kinf);
  }
  ok = ok && rigid <= kC5RigidRel;
  detail += ", rigid=" + fmt(rigid);

  // Total mass. With dyadic inputs every product and sum is representable,
  // so equality must hold bit for bit. With the physical plate the nodal
  // masses are rounded, and the deviation must stay within the worst-case
  // rounding of (nodes + 8) floating-point operations.
  const auto x_mass = [](const GlobalSystem& s) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.mass().size(); i += 2) total += s.mass()(i);
    return total;
  };
  {
    Material dyadic = cfg.material;
    dyadic.rho = 8.0;
    dyadic.thickness = 0.25;
    const Mesh dmesh(4, 8, 0.125);  // 0.5 m x 1 m
    const double total = x_mass(assemble_global(dmesh, dyadic));
    const double expect = dyadic.rho * dyadic.thickness * 0.5;
    ok = ok && total == expect;
    detail += std::string(", dyadic mass ") + (total == expect ? "exact" : "inexact: " + fmt(total - expect));
  }
  const double mass = x_mass(sys);
  const double expect = cfg.material.rho * cfg.material.thickness * 0.5;
  const double rounding = static_cast<double>(mesh.node_count() + 8) * 0x1p-53 * expect;
  ok = ok && std::abs(mass - expect) <= rounding;
  detail += ", plate mass deviation " + fmt(mass - expect) + " (rounding bound " + fmt(rounding) + ")";

  // Undamped oscillator, one period at dt = T / 1000.
  {
    const double k = 4.0 * std::numbers::pi * std::numbers::pi;  // T = 1
    SparseMatrix Ks(1, 1);
    Ks.insert(0, 0) = k;
    const GlobalSystem one(Ks, VectorXd::Ones(1), {}, 0.0, 0.0);
    const NewmarkIntegrator nm(one, 1e-3);
    const VectorXd u0 = VectorXd::Ones(1), z = VectorXd::Zero(1);
    DynState s = nm.initial_state(u0, z, z);
    for (int i = 0; i < 1000; ++i) s = nm.step(s, z);
    const double err = std::abs(s.u(0) - std::cos(2.0 * std::numbers::pi * s.t));
    ok = ok && err <= kC5SdofTol;
    detail += ", sdof err=" + fmt(err);
  }

  // Undamped free vibration energy on the default plate.
  {
    Material m = cfg.material;
    m.rayleigh_a0 = 0.0;
    m.rayleigh_a1 = 0.0;
    const GlobalSystem free_sys = assemble_global(mesh, m);
    const NewmarkIntegrator nm(free_sys, cfg.dt);
    const auto n = static_cast<Eigen::Index>(free_sys.ndof());
    VectorXd u0 = VectorXd::Zero(n), v0 = VectorXd::Zero(n);
    const VectorXd zero = VectorXd::Zero(n);
    for (std::size_t d : free_sys.free_dofs()) {
      u0(static_cast<Eigen::Index>(d)) = 1e-4 * std::sin(0.37 * static_cast<double>(d));
      v0(static_cast<Eigen::Index>(d)) = 1e-2 * std::cos(0.11 * static_cast<double>(d));
    }
    const auto energy = [&](const DynState& s) {
      return 0.5 * s.v.dot(free_sys.mass().cwiseProduct(s.v)) + 0.5 * s.u.dot(free_sys.stiffness() * s.u);
    };
    DynState s = nm.initial_state(u0, v0, zero);
    const double e0 = energy(s);
    double drift = 0.0;
    for (int i = 0; i < 10000; ++i) {
      s = nm.step(s, zero);
      drift = std::max(drift, std::abs(energy(s) - e0) / e0);
    }
    ok = ok && drift <= kC5EnergyDrift;
    detail += ", energy drift=" + fmt(drift);
  }
  return {ok, detail};
}

Outcome criterion6() {
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(6);

  std::cauchy_distribution<double> wide(0.0, 10.0);
  std::size_t outside = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double z = wide(rng);
    for (ActivationKind kind : {ActivationKind::tanh, ActivationKind::bipolar_sigmoid, ActivationKind::hard_limit,
                              ActivationKind::saturating_linear}) {
      const double v = activation_eval(kind, z);
      if (!(v >= -1.0 && v <= 1.0)) ++outside;
    }
  }
  ok = ok && outside == 0;
  detail += "activations outside [-1,1]: " + std::to_string(outside);

  const SimConfig cfg;
  const Mesh mesh(cfg.nx, cfg.ny, cfg.elem_size);
  auto layout = NeuroLayout::uniform(cfg.element_count(), ActivationKind::tanh, cfg.input_weights, 1);
  std::uniform_real_distribution<double> wdist(4e5, 5.5e5);
  std::vector<double> w(cfg.element_count());
  for (auto& v : w) v = wdist(rng);
  layout.set_output_weights(w);
  std::normal_distribution<double> udist(0.0, 1e-3);
  std::size_t asym = 0;
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd u(static_cast<Eigen::Index>(mesh.dof_count()));
    for (auto& v : u) v = udist(rng);
    const VectorXd fp = assemble_neuro_force_vector(mesh, layout, u);
    const VectorXd fm = assemble_neuro_force_vector(mesh, layout, -u);
    for (Eigen::Index i = 0; i < fp.size(); ++i)
      if (fp(i) != -fm(i)) ++asym;
  }
  ok = ok && asym == 0;
  detail += ", odd-symmetry violations: " + std::to_string(asym);

  std::size_t inverse_fail = 0, divisors = 0;
  for (std::size_t d = 1; d <= 200; ++d) {
    if (200 % d) continue;
    ++divisors;
    std::vector<double> x(d);
    for (auto& v : x) v = wdist(rng);
    if (block_average(broadcast_design(x, 200), d) != x) ++inverse_fail;
  }
  ok = ok && inverse_fail == 0;
  detail += ", left-inverse failures: " + std::to_string(inverse_fail) + "/" + std::to_string(divisors);

  std::size_t bound_fail = 0;
  std::normal_distribution<double> wn(0.0, 5e5);
  for (int trial = 0; trial < 100000; ++trial) {
    Neuron neuron;
    neuron.output_weight = wn(rng);
    neuron.activation = trial % 2 ? ActivationKind::tanh : ActivationKind::bipolar_sigmoid;
    const std::array<double, 4> ux{wide(rng) * 1e-3, wide(rng) * 1e-3, wide(rng) * 1e-3, wide(rng) * 1e-3};
    const auto f = element_neuro_forces(neuron, ux, mesh.elem_area());
    const double total = std::abs(f[0] + f[1] + f[2] + f[3]);
    if (total > std::abs(neuron.output_weight) * mesh.elem_area()) ++bound_fail;
  }
  ok = ok && bound_fail == 0;
  detail += ", force-bound violations: " + std::to_string(bound_fail);
  return {ok, detail};
}

Outcome criterion7() {
  bool ok = true;
  std::string detail;
  const SimConfig c = plate_sim(4);
  const auto target = simulate(c, broadcast_design(std::vector<double>{430000, 470000, 510000, 540000}, 200)).values;
  auto p = make_training_problem(c, target, Bounds::uniform(4, 4e5, 5.5e5), 1e-2, DesignScaling::normalized, 1);
  const VectorXd x = (VectorXd(4) << 0.15, 0.35, 0.55, 0.75).finished();
  const auto serial = objective_and_gradient(x, p);
  p.worker_count = 5;
  const auto parallel = objective_and_gradient(x, p);
  const bool same = serial.f == parallel.f && serial.mse == parallel.mse && serial.g == parallel.g;
  ok = ok && same;
  detail += same ? "objective bit-identical for 1 and 5 workers" : "objective differs between 1 and 5 workers";

  TempDir a, b;
  const auto ra = train_inverse_crime(a.path(), plate_config(1), {500000.0}, {});
  const auto rb = train_inverse_crime(b.path(), plate_config(1), {500000.0}, {});
  if (ra.code != kExitOk || rb.code != kExitOk) return {false, detail + ", train failed: " + ra.log + rb.log};
  for (const char* name : {"result.csv", "summary.json"}) {
    const bool eq = slurp(a.path() / "run" / name) == slurp(b.path() / "run" / name);
    ok = ok && eq;
    detail += std::string(", ") + name + (eq ? " identical" : " differs");
  }
  return {ok, detail};
}

Outcome criterion8() {
  TempDir tmp;
  Overrides o;
  o.scaling = DesignScaling::raw;
  o.fd_delta = 1e-2;
  o.maxiter = 5;
  o.maxfun = 100;
  o.factr = 1e12;
  const auto run = train_inverse_crime(tmp.path(), plate_config(1), {500000.0}, o);
  if (run.code != kExitOk || run.rows.empty()) return {false, "train failed: " + run.log};
  const double f0 = *run.rows.front().rmse;
  const double f = run.summary["fopt"].get<double>();
  return {f <= kC8Reduction * f0, "rmse " + fmt(f0) + " -> " + fmt(f) + " ratio=" + fmt(f / f0) + " (tol " +
                                      fmt(kC8Reduction) + "), xopt=" + fmt(run.summary["xopt"][0].get<double>()) +
                                      ", status=" + run.summary["status"].get<std::string>() + ", iterations=" +
                                      std::to_string(run.summary["n_iterations"].get<int>())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::cerr << "unknown criterion " << n << "\n";
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (selected.empty())
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

  bool all = true;
  for (std::size_t n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")" << std::endl;
  }
  return all ? 0 : 1;
}
