#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "neuroskin/fe.hpp"
#include "neuroskin/mesh.hpp"
#include "neuroskin/neuro.hpp"

namespace neuroskin {

enum class Waveform { half_sine, sine, step };

Waveform parse_waveform(std::string_view name);
std::string to_string(Waveform w);

/// Nodal load applied along one axis to every listed node; each node
/// receives the full signal value.
struct Excitation {
  std::vector<std::size_t> node_ids{224, 225, 226};
  Axis direction = Axis::x;
  double amplitude = 50.0;  // N
  Waveform waveform = Waveform::half_sine;
  double t_start = 0.0;
  double t_end = 0.05;
  double frequency = 0.0;  // Hz, sine only
};

/// Scalar signal value at time t; zero outside [t_start, t_end].
double excitation_force(const Excitation& ex, double t);

struct SimConfig {
  // mesh
  std::size_t nx = 10;
  std::size_t ny = 20;
  double elem_size = 0.05;

  Material material;

  // neurons
  ActivationKind activation = ActivationKind::tanh;
  std::array<double, 4> input_weights{1000.0, 1000.0, 1000.0, 1000.0};
  std::size_t design_dim = 1;
  std::vector<double> default_design{450000.0};

  Excitation excitation;

  // time stepping
  double dt = 1e-3;
  std::size_t n_steps = 500;
  double newmark_beta = 0.25;
  double newmark_gamma = 0.5;

  // probe
  std::size_t output_node = 225;
  Axis output_dof = Axis::x;

  std::size_t element_count() const { return nx * ny; }

  /// Throws InvalidArgument/ConfigError describing the first violated rule.
  void validate() const;
};

/// Uniformly sampled scalar history; values[i] is the sample at t0 + i * dt.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Runs the coupled neuro/FE model from rest. w_o holds one output weight per
/// element. Neuro forces for step n+1 are computed from u_n (staggered
/// explicit coupling). The returned series holds u at the probe after each
/// step, so it starts at t = dt and has n_steps samples.
/// Throws SimulationDiverged naming the first step with a non-finite state.
TimeSeries simulate(const SimConfig& config, std::span<const double> w_o);

/// Creates run_dir if needed, writes params.csv (expanded w_o per element),
/// simulates with broadcast_design(x) and writes output.out.
TimeSeries run_and_write(const std::filesystem::path& run_dir, const SimConfig& config,
                         std::span<const double> x);

}  // namespace neuroskin
