#include "neuroskin/neuro.hpp"

#include <algorithm>
#include <cmath>

#include "neuroskin/errors.hpp"

namespace neuroskin {

ActivationKind parse_activation(std::string_view name) {
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "bipolar_sigmoid") return ActivationKind::bipolar_sigmoid;
  if (name == "hard_limit") return ActivationKind::hard_limit;
  if (name == "saturating_linear") return ActivationKind::saturating_linear;
  throw InvalidArgument("unknown activation kind '" + std::string(name) + "'");
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::bipolar_sigmoid: return "bipolar_sigmoid";
    case ActivationKind::hard_limit: return "hard_limit";
    case ActivationKind::saturating_linear: return "saturating_linear";
  }
  return "unknown";
}

double activation_eval(ActivationKind kind, double z) {
  if (!std::isfinite(z)) throw InvalidArgument("activation: non-finite potential");
  // Odd kinds are evaluated on |z| and re-signed so f(-z) == -f(z) bit for bit.
  const double mag = std::abs(z);
  switch (kind) {
    case ActivationKind::tanh:
      return std::copysign(std::tanh(mag), z);
    case ActivationKind::bipolar_sigmoid:
      return std::copysign(2.0 / (1.0 + std::exp(-mag)) - 1.0, z);
    case ActivationKind::hard_limit:
      return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case ActivationKind::saturating_linear:
      return std::clamp(z, -1.0, 1.0);
  }
  return 0.0;
}

double neuron_potential(const std::array<double, 4>& u_x, const std::array<double, 4>& input_weights) {
  double z = 0.0;
  for (std::size_t k = 0; k < 4; ++k) z += input_weights[k] * u_x[k];
  return z;
}

std::array<double, 4> element_neuro_forces(const Neuron& neuron, const std::array<double, 4>& u_x,
                                           double area) {
  if (!(area > 0.0)) throw InvalidArgument("neuro forces: area must be > 0");
  const double z = neuron_potential(u_x, neuron.input_weights);
  const double total = activation_eval(neuron.activation, z) * neuron.output_weight * area;
  const double per_node = total / 4.0;
  return {per_node, per_node, per_node, per_node};
}

std::vector<double> broadcast_design(std::span<const double> x, std::size_t element_count) {
  const std::size_t d = x.size();
  if (d == 0 || element_count == 0)
    throw InvalidArgument("broadcast: design and element counts must be >= 1");
  if (element_count % d != 0)
    throw InvalidArgument("broadcast: design dimension " + std::to_string(d) +
                          " does not divide element count " + std::to_string(element_count));
  const std::size_t block = element_count / d;
  std::vector<double> w(element_count);
  for (std::size_t i = 0; i < d; ++i)
    std::fill_n(w.begin() + static_cast<std::ptrdiff_t>(i * block), block, x[i]);
  return w;
}

std::vector<double> block_average(std::span<const double> w, std::size_t design_dim) {
  if (design_dim == 0 || w.empty() || w.size() % design_dim != 0)
    throw InvalidArgument("block average: design dimension must divide the element count");
  const std::size_t block = w.size() / design_dim;
  std::vector<double> x(design_dim);
  for (std::size_t i = 0; i < design_dim; ++i) {
    // Extended precision keeps sums of equal values exact for any realistic block.
    long double s = 0.0L;
    for (std::size_t j = 0; j < block; ++j) s += w[i * block + j];
    x[i] = static_cast<double>(s / static_cast<long double>(block));
  }
  return x;
}

NeuroLayout NeuroLayout::uniform(std::size_t element_count, ActivationKind kind,
                                 const std::array<double, 4>& input_weights, std::size_t design_dim) {
  if (design_dim == 0 || element_count % design_dim != 0)
    throw InvalidArgument("neuro layout: design dimension must divide the element count");
  for (double w : input_weights)
    if (!std::isfinite(w)) throw InvalidArgument("neuro layout: input weights must be finite");
  NeuroLayout layout;
  layout.neurons.assign(element_count, Neuron{input_weights, kind, 0.0});
  layout.design_dim = design_dim;
  return layout;
}

void NeuroLayout::set_output_weights(std::span<const double> w_o) {
  if (w_o.size() != neurons.size())
    throw ShapeError("neuro layout: expected " + std::to_string(neurons.size()) +
                     " output weights, got " + std::to_string(w_o.size()));
  for (std::size_t e = 0; e < neurons.size(); ++e) neurons[e].output_weight = w_o[e];
}

Eigen::VectorXd assemble_neuro_force_vector(const Mesh& mesh, const NeuroLayout& layout,
                                            const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.dof_count())
    throw ShapeError("neuro forces: displacement vector must have ndof entries");
  if (layout.neurons.size() != mesh.element_count())
    throw ShapeError("neuro forces: one neuron per element required");

  Eigen::VectorXd f = Eigen::VectorXd::Zero(u.size());
  const double area = mesh.elem_area();
  const auto& conn = mesh.connectivity();
  for (std::size_t e = 0; e < conn.size(); ++e) {
    std::array<double, 4> ux{};
    for (std::size_t k = 0; k < 4; ++k)
      ux[k] = u(static_cast<Eigen::Index>(DofMap::dof(conn[e][k], Axis::x)));
    const auto fe = element_neuro_forces(layout.neurons[e], ux, area);
    for (std::size_t k = 0; k < 4; ++k)
      f(static_cast<Eigen::Index>(DofMap::dof(conn[e][k], Axis::x))) += fe[k];
  }
  return f;
}

}  // namespace neuroskin
