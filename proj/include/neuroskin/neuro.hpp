#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroskin/mesh.hpp"

namespace neuroskin {

/// Bounded activations; each maps R into [-1, 1] and 0 to 0.
enum class ActivationKind { tanh, bipolar_sigmoid, hard_limit, saturating_linear };

ActivationKind parse_activation(std::string_view name);
std::string to_string(ActivationKind kind);

/// Throws InvalidArgument for non-finite z.
double activation_eval(ActivationKind kind, double z);

struct Neuron {
  std::array<double, 4> input_weights{1000.0, 1000.0, 1000.0, 1000.0};  // 1/m, on u_x
  ActivationKind activation = ActivationKind::tanh;
  double output_weight = 0.0;  // Pa per unit activation
};

/// z = sum_k input_weights[k] * u_x[k].
double neuron_potential(const std::array<double, 4>& u_x, const std::array<double, 4>& input_weights);

/// x-direction nodal forces: f(z) * w_o * area split equally over the 4 nodes.
std::array<double, 4> element_neuro_forces(const Neuron& neuron, const std::array<double, 4>& u_x,
                                           double area);

/// Block-constant expansion of a length-d design vector onto P elements.
/// Throws InvalidArgument unless d >= 1, P >= 1 and d divides P.
std::vector<double> broadcast_design(std::span<const double> x, std::size_t element_count);

/// Mean of each contiguous block; the left inverse of broadcast_design.
std::vector<double> block_average(std::span<const double> w, std::size_t design_dim);

/// One neuron per element plus the design-vector dimension that feeds the
/// output weights in contiguous blocks of P / d elements.
struct NeuroLayout {
  std::vector<Neuron> neurons;
  std::size_t design_dim = 1;

  static NeuroLayout uniform(std::size_t element_count, ActivationKind kind,
                             const std::array<double, 4>& input_weights, std::size_t design_dim);

  std::size_t block_size() const { return neurons.size() / design_dim; }

  /// Sets every neuron's output weight; w_o must have one entry per element.
  void set_output_weights(std::span<const double> w_o);
};

/// Global force vector (length ndof) from every element's neuron; only x
/// DOFs receive load. Constrained DOFs are not masked here.
Eigen::VectorXd assemble_neuro_force_vector(const Mesh& mesh, const NeuroLayout& layout,
                                            const Eigen::VectorXd& u);

}  // namespace neuroskin
