#include "neuroskin/fe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuroskin/errors.hpp"

namespace neuroskin {

namespace {

constexpr std::array<double, 4> kCornerXi = {-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kCornerEta = {-1.0, -1.0, 1.0, 1.0};

std::vector<std::size_t> complement(std::size_t ndof, const std::vector<std::size_t>& fixed) {
  std::vector<bool> is_fixed(ndof, false);
  for (auto d : fixed) is_fixed[d] = true;
  std::vector<std::size_t> out;
  out.reserve(ndof - fixed.size());
  for (std::size_t d = 0; d < ndof; ++d)
    if (!is_fixed[d]) out.push_back(d);
  return out;
}

// Restriction of a sparse matrix to rows/cols listed in keep.
SparseMatrix restrict_to(const SparseMatrix& full, const std::vector<std::size_t>& keep) {
  std::vector<Eigen::Index> position(static_cast<std::size_t>(full.rows()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) position[keep[i]] = static_cast<Eigen::Index>(i);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (Eigen::Index col = 0; col < full.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const auto r = position[static_cast<std::size_t>(it.row())];
      const auto c = position[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  SparseMatrix out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

void Material::validate() const {
  if (!(E > 0.0)) throw InvalidArgument("material: E must be > 0");
  if (!(nu >= 0.0 && nu < 0.5)) throw InvalidArgument("material: nu must lie in [0, 0.5)");
  if (!(rho > 0.0)) throw InvalidArgument("material: rho must be > 0");
  if (!(thickness > 0.0)) throw InvalidArgument("material: thickness must be > 0");
  if (!(rayleigh_a0 >= 0.0) || !(rayleigh_a1 >= 0.0))
    throw InvalidArgument("material: Rayleigh coefficients must be >= 0");
}

Matrix8 q4_membrane_stiffness(double elem_size, const Material& material) {
  material.validate();
  if (!(elem_size > 0.0)) throw InvalidArgument("q4 stiffness: element size must be > 0");

  const double nu = material.nu;
  Eigen::Matrix3d D;
  D << 1.0, nu, 0.0,
       nu, 1.0, 0.0,
       0.0, 0.0, 0.5 * (1.0 - nu);
  D *= material.E / (1.0 - nu * nu);

  // Square element: x = (a/2) xi, so d/dx = (2/a) d/dxi and detJ = a^2/4.
  const double inv_jac = 2.0 / elem_size;
  const double det_jac = 0.25 * elem_size * elem_size;
  const double gp = 1.0 / std::sqrt(3.0);

  Matrix8 k = Matrix8::Zero();
  for (double xi : {-gp, gp}) {
    for (double eta : {-gp, gp}) {
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int n = 0; n < 4; ++n) {
        const double dndx = 0.25 * kCornerXi[n] * (1.0 + kCornerEta[n] * eta) * inv_jac;
        const double dndy = 0.25 * kCornerEta[n] * (1.0 + kCornerXi[n] * xi) * inv_jac;
        B(0, 2 * n) = dndx;
        B(1, 2 * n + 1) = dndy;
        B(2, 2 * n) = dndy;
        B(2, 2 * n + 1) = dndx;
      }
      k.noalias() += B.transpose() * D * B * (det_jac * material.thickness);
    }
  }
  return 0.5 * (k + k.transpose());
}

Matrix8 q4_lumped_mass(double elem_size, const Material& material) {
  material.validate();
  if (!(elem_size > 0.0)) throw InvalidArgument("q4 mass: element size must be > 0");
  const double nodal = material.rho * material.thickness * elem_size * elem_size / 4.0;
  return Matrix8::Identity() * nodal;
}

GlobalSystem::GlobalSystem(SparseMatrix stiffness, Eigen::VectorXd mass_diag,
                           std::vector<std::size_t> constrained_dofs, double rayleigh_a0,
                           double rayleigh_a1)
    : stiffness_(std::move(stiffness)), mass_(std::move(mass_diag)),
      constrained_(std::move(constrained_dofs)) {
  const auto n = mass_.size();
  if (stiffness_.rows() != n || stiffness_.cols() != n)
    throw ShapeError("global system: stiffness and mass sizes differ");
  if ((mass_.array() <= 0.0).any()) throw InvalidArgument("global system: lumped mass must be > 0");
  if (rayleigh_a0 < 0.0 || rayleigh_a1 < 0.0)
    throw InvalidArgument("global system: Rayleigh coefficients must be >= 0");

  std::sort(constrained_.begin(), constrained_.end());
  constrained_.erase(std::unique(constrained_.begin(), constrained_.end()), constrained_.end());
  for (auto d : constrained_)
    if (d >= static_cast<std::size_t>(n)) throw IndexError("constrained DOF out of range");
  free_ = complement(static_cast<std::size_t>(n), constrained_);

  SparseMatrix mass_matrix(n, n);
  mass_matrix.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i) mass_matrix.insert(i, i) = mass_(i);
  damping_ = rayleigh_a0 * mass_matrix + rayleigh_a1 * stiffness_;

  if (free_.empty()) return;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(restrict_to(stiffness_, free_));
  if (ldlt.info() != Eigen::Success)
    throw AssemblyRankError("stiffness on free DOFs could not be factored");
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double scale = pivots.cwiseAbs().maxCoeff();
  if (!(pivots.minCoeff() > 1e-12 * scale))
    throw AssemblyRankError("stiffness on free DOFs is singular; supports are insufficient");
}

GlobalSystem assemble_global(const Mesh& mesh, const Material& material) {
  const Matrix8 ke = q4_membrane_stiffness(mesh.elem_size(), material);
  const Matrix8 me = q4_lumped_mass(mesh.elem_size(), material);
  const auto ndof = static_cast<Eigen::Index>(mesh.dof_count());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.element_count() * 64);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(ndof);
  for (const auto& nodes : mesh.connectivity()) {
    std::array<Eigen::Index, 8> dofs{};
    for (int n = 0; n < 4; ++n) {
      dofs[2 * n] = static_cast<Eigen::Index>(DofMap::dof(nodes[n], Axis::x));
      dofs[2 * n + 1] = static_cast<Eigen::Index>(DofMap::dof(nodes[n], Axis::y));
    }
    for (int i = 0; i < 8; ++i) {
      mass(dofs[i]) += me(i, i);
      for (int j = 0; j < 8; ++j) trips.emplace_back(dofs[i], dofs[j], ke(i, j));
    }
  }
  SparseMatrix k(ndof, ndof);
  k.setFromTriplets(trips.begin(), trips.end());
  return GlobalSystem(std::move(k), std::move(mass), mesh.constrained_dofs(),
                      material.rayleigh_a0, material.rayleigh_a1);
}

DynState DynState::at_rest(std::size_t ndof) {
  const auto n = static_cast<Eigen::Index>(ndof);
  return {0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

NewmarkIntegrator::NewmarkIntegrator(const GlobalSystem& system, double dt, double beta,
                                     double gamma)
    : system_(&system), dt_(dt), beta_(beta), gamma_(gamma) {
  if (!(dt > 0.0)) throw InvalidArgument("newmark: dt must be > 0");
  if (!(gamma >= 0.5) || !(2.0 * beta >= gamma))
    throw InvalidArgument("newmark: require 2*beta >= gamma >= 1/2");

  const auto& free = system.free_dofs();
  k_ff_ = restrict_to(system.stiffness(), free);
  c_ff_ = restrict_to(system.damping(), free);
  m_ff_ = gather(system.mass());

  const auto n = static_cast<Eigen::Index>(free.size());
  SparseMatrix m_diag(n, n);
  m_diag.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i) m_diag.insert(i, i) = m_ff_(i);

  const SparseMatrix k_eff =
      k_ff_ + (gamma / (beta * dt)) * c_ff_ + (1.0 / (beta * dt * dt)) * m_diag;
  solver_.compute(k_eff);
  if (solver_.info() != Eigen::Success)
    throw SingularSystemError("newmark: effective matrix factorization failed");
}

Eigen::VectorXd NewmarkIntegrator::gather(const Eigen::VectorXd& full) const {
  const auto& free = system_->free_dofs();
  Eigen::VectorXd out(static_cast<Eigen::Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(free[i]));
  return out;
}

void NewmarkIntegrator::scatter(const Eigen::VectorXd& reduced, Eigen::VectorXd& full) const {
  const auto& free = system_->free_dofs();
  full.setZero(static_cast<Eigen::Index>(system_->ndof()));
  for (std::size_t i = 0; i < free.size(); ++i)
    full(static_cast<Eigen::Index>(free[i])) = reduced(static_cast<Eigen::Index>(i));
}

DynState NewmarkIntegrator::initial_state(const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                          const Eigen::VectorXd& f0, double t0) const {
  const auto n = static_cast<Eigen::Index>(system_->ndof());
  if (u0.size() != n || v0.size() != n || f0.size() != n)
    throw ShapeError("newmark: initial vectors must have ndof entries");
  const Eigen::VectorXd u = gather(u0);
  const Eigen::VectorXd v = gather(v0);
  const Eigen::VectorXd rhs = gather(f0) - c_ff_ * v - k_ff_ * u;
  const Eigen::VectorXd a = rhs.cwiseQuotient(m_ff_);

  DynState s;
  s.t = t0;
  scatter(u, s.u);
  scatter(v, s.v);
  scatter(a, s.a);
  return s;
}

DynState NewmarkIntegrator::step(const DynState& state, const Eigen::VectorXd& f_next) const {
  const auto n = static_cast<Eigen::Index>(system_->ndof());
  if (state.u.size() != n || f_next.size() != n)
    throw ShapeError("newmark: state/load size does not match the system");

  const double b = beta_;
  const double g = gamma_;
  const double dt = dt_;
  const double c0 = 1.0 / (b * dt * dt);
  const double c1 = g / (b * dt);
  const double c2 = 1.0 / (b * dt);
  const double c3 = 0.5 / b - 1.0;
  const double c4 = g / b - 1.0;
  const double c5 = 0.5 * dt * (g / b - 2.0);

  const Eigen::VectorXd u = gather(state.u);
  const Eigen::VectorXd v = gather(state.v);
  const Eigen::VectorXd a = gather(state.a);

  const Eigen::VectorXd inertial = c0 * u + c2 * v + c3 * a;
  const Eigen::VectorXd viscous = c1 * u + c4 * v + c5 * a;
  const Eigen::VectorXd rhs = gather(f_next) + m_ff_.cwiseProduct(inertial) + c_ff_ * viscous;

  const Eigen::VectorXd u_next = solver_.solve(rhs);
  const Eigen::VectorXd a_next = c0 * (u_next - u) - c2 * v - c3 * a;
  const Eigen::VectorXd v_next = v + dt * ((1.0 - g) * a + g * a_next);

  DynState next;
  next.t = state.t + dt;
  scatter(u_next, next.u);
  scatter(v_next, next.v);
  scatter(a_next, next.a);
  return next;
}

DynState newmark_step(const GlobalSystem& system, const DynState& state,
                      const Eigen::VectorXd& f_next, double dt, double beta, double gamma) {
  return NewmarkIntegrator(system, dt, beta, gamma).step(state, f_next);
}

}  // namespace neuroskin
