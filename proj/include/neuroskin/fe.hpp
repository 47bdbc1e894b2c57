#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstddef>
#include <vector>

#include "neuroskin/mesh.hpp"

namespace neuroskin {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Linear elastic plane-stress membrane with Rayleigh damping, SI units.
struct Material {
  double E = 2.0e9;            // Pa
  double nu = 0.3;
  double rho = 1200.0;         // kg/m^3
  double thickness = 0.005;    // m
  double rayleigh_a0 = 0.5;    // 1/s, multiplies M
  double rayleigh_a1 = 1.0e-4; // s, multiplies K

  /// Throws InvalidArgument on E <= 0, nu outside [0, 0.5), rho <= 0,
  /// thickness <= 0 or negative damping coefficients.
  void validate() const;
};

/// Bilinear isoparametric plane-stress stiffness of a square element of side
/// elem_size, 2x2 Gauss quadrature. DOF order (ux1, uy1, ..., ux4, uy4) with
/// corners counter-clockwise from the lower-left.
Matrix8 q4_membrane_stiffness(double elem_size, const Material& material);

/// Row-sum lumped mass: each diagonal entry is rho * t * elem_size^2 / 4.
Matrix8 q4_lumped_mass(double elem_size, const Material& material);

/// Assembled K, lumped M and Rayleigh C over all DOFs. Constraints are only
/// recorded here; elimination happens when an integrator is built.
class GlobalSystem {
 public:
  /// Builds from explicit matrices. mass_diag must be strictly positive.
  /// Throws AssemblyRankError when K restricted to the free DOFs is singular.
  GlobalSystem(SparseMatrix stiffness, Eigen::VectorXd mass_diag,
               std::vector<std::size_t> constrained_dofs, double rayleigh_a0, double rayleigh_a1);

  std::size_t ndof() const { return static_cast<std::size_t>(mass_.size()); }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& damping() const { return damping_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  const std::vector<std::size_t>& constrained_dofs() const { return constrained_; }
  const std::vector<std::size_t>& free_dofs() const { return free_; }

 private:
  SparseMatrix stiffness_;
  SparseMatrix damping_;
  Eigen::VectorXd mass_;
  std::vector<std::size_t> constrained_;
  std::vector<std::size_t> free_;
};

GlobalSystem assemble_global(const Mesh& mesh, const Material& material);

struct DynState {
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd a;

  static DynState at_rest(std::size_t ndof);
};

/// Newmark-beta integrator on the free DOFs of a GlobalSystem.
///
/// The effective matrix K + gamma/(beta dt) C + 1/(beta dt^2) M is factored
/// once in the constructor; dt is fixed for the lifetime of the object.
/// Requires dt > 0 and 2 beta >= gamma >= 1/2.
class NewmarkIntegrator {
 public:
  NewmarkIntegrator(const GlobalSystem& system, double dt, double beta = 0.25, double gamma = 0.5);

  double dt() const { return dt_; }

  /// State at t0 with u0, v0 given and acceleration from equilibrium with
  /// f0: M a0 = f0 - C v0 - K u0 (free DOFs only).
  DynState initial_state(const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                         const Eigen::VectorXd& f0, double t0 = 0.0) const;

  /// Advances one step; f_next is the full-length load at t + dt. Entries at
  /// constrained DOFs are ignored and the returned state is zero there.
  DynState step(const DynState& state, const Eigen::VectorXd& f_next) const;

 private:
  Eigen::VectorXd gather(const Eigen::VectorXd& full) const;
  void scatter(const Eigen::VectorXd& reduced, Eigen::VectorXd& full) const;

  const GlobalSystem* system_;
  double dt_;
  double beta_;
  double gamma_;
  SparseMatrix k_ff_;
  SparseMatrix c_ff_;
  Eigen::VectorXd m_ff_;
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

/// One-off step; factors the effective matrix on every call.
DynState newmark_step(const GlobalSystem& system, const DynState& state,
                      const Eigen::VectorXd& f_next, double dt, double beta = 0.25,
                      double gamma = 0.5);

}  // namespace neuroskin
