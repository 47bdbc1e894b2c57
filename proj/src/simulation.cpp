#include "neuroskin/simulation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "neuroskin/errors.hpp"
#include "neuroskin/series_io.hpp"

namespace neuroskin {

Waveform parse_waveform(std::string_view name) {
  if (name == "half_sine") return Waveform::half_sine;
  if (name == "sine") return Waveform::sine;
  if (name == "step") return Waveform::step;
  throw InvalidArgument("unknown waveform '" + std::string(name) + "'");
}

std::string to_string(Waveform w) {
  switch (w) {
    case Waveform::half_sine: return "half_sine";
    case Waveform::sine: return "sine";
    case Waveform::step: return "step";
  }
  return "unknown";
}

double excitation_force(const Excitation& ex, double t) {
  if (t < ex.t_start || t > ex.t_end) return 0.0;
  const double local = t - ex.t_start;
  switch (ex.waveform) {
    case Waveform::half_sine:
      return ex.amplitude * std::sin(std::numbers::pi * local / (ex.t_end - ex.t_start));
    case Waveform::sine:
      return ex.amplitude * std::sin(2.0 * std::numbers::pi * ex.frequency * local);
    case Waveform::step:
      return ex.amplitude;
  }
  return 0.0;
}

void SimConfig::validate() const {
  if (nx == 0 || ny == 0) throw InvalidArgument("config: mesh element counts must be >= 1");
  if (!(elem_size > 0.0)) throw InvalidArgument("config: element size must be > 0");
  material.validate();
  if (design_dim == 0 || element_count() % design_dim != 0)
    throw InvalidArgument("config: design_dim must divide the element count " +
                          std::to_string(element_count()));
  if (!default_design.empty() && default_design.size() != design_dim)
    throw InvalidArgument("config: default design vector must have design_dim entries");
  for (double w : input_weights)
    if (!std::isfinite(w)) throw InvalidArgument("config: input weights must be finite");

  if (!(dt > 0.0)) throw InvalidArgument("config: dt must be > 0");
  if (n_steps == 0) throw InvalidArgument("config: n_steps must be >= 1");
  if (!(newmark_gamma >= 0.5) || !(2.0 * newmark_beta >= newmark_gamma))
    throw InvalidArgument("config: Newmark parameters need 2*beta >= gamma >= 1/2");

  const std::size_t nodes = (nx + 1) * (ny + 1);
  if (output_node >= nodes) throw InvalidArgument("config: output node out of range");

  const auto& ex = excitation;
  if (!(ex.t_end > ex.t_start) || !(ex.t_start >= 0.0))
    throw InvalidArgument("config: excitation window needs t_end > t_start >= 0");
  if (!std::isfinite(ex.amplitude)) throw InvalidArgument("config: excitation amplitude not finite");
  if (ex.waveform == Waveform::sine && !(ex.frequency > 0.0))
    throw InvalidArgument("config: sine excitation needs frequency > 0");
  for (auto n : ex.node_ids) {
    if (n >= nodes) throw InvalidArgument("config: excitation node out of range");
    if (n <= nx) throw InvalidArgument("config: excitation node " + std::to_string(n) + " is supported");
  }
}

TimeSeries simulate(const SimConfig& config, std::span<const double> w_o) {
  config.validate();
  const Mesh mesh(config.nx, config.ny, config.elem_size);
  if (w_o.size() != mesh.element_count())
    throw ShapeError("simulate: expected " + std::to_string(mesh.element_count()) +
                     " output weights, got " + std::to_string(w_o.size()));

  const GlobalSystem system = assemble_global(mesh, config.material);
  const NewmarkIntegrator integrator(system, config.dt, config.newmark_beta, config.newmark_gamma);

  NeuroLayout layout = NeuroLayout::uniform(mesh.element_count(), config.activation,
                                            config.input_weights, config.design_dim);
  layout.set_output_weights(w_o);

  const auto ndof = static_cast<Eigen::Index>(system.ndof());
  std::vector<Eigen::Index> load_dofs;
  for (auto n : config.excitation.node_ids)
    load_dofs.push_back(static_cast<Eigen::Index>(DofMap::dof(n, config.excitation.direction)));
  auto external_load = [&](double t) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
    const double value = excitation_force(config.excitation, t);
    for (auto d : load_dofs) f(d) += value;
    return f;
  };

  const auto probe = static_cast<Eigen::Index>(DofMap::dof(config.output_node, config.output_dof));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ndof);
  DynState state = integrator.initial_state(zero, zero, external_load(0.0));

  TimeSeries out;
  out.t0 = config.dt;
  out.dt = config.dt;
  out.values.reserve(config.n_steps);
  for (std::size_t n = 0; n < config.n_steps; ++n) {
    const double t_next = static_cast<double>(n + 1) * config.dt;
    Eigen::VectorXd load = external_load(t_next);
    load += assemble_neuro_force_vector(mesh, layout, state.u);
    state = integrator.step(state, load);
    if (!state.u.allFinite() || !state.v.allFinite() || !state.a.allFinite())
      throw SimulationDiverged(n + 1, "simulation diverged at step " + std::to_string(n + 1));
    out.values.push_back(state.u(probe));
  }
  return out;
}

TimeSeries run_and_write(const std::filesystem::path& run_dir, const SimConfig& config,
                         std::span<const double> x) {
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + run_dir.string() + ": " + ec.message());

  const auto w_o = broadcast_design(x, config.element_count());
  write_params_csv(run_dir / "params.csv", w_o);
  TimeSeries series = simulate(config, w_o);
  write_series(run_dir / "output.out", series.values);
  return series;
}

}  // namespace neuroskin
