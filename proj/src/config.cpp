#include "neuroskin/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "neuroskin/errors.hpp"

namespace neuroskin {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "/" + key + ": " + e.what());
  }
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& s = root.at(key);
  if (!s.is_object()) throw ConfigError(std::string("/") + key + ": expected an object");
  return s;
}

Axis parse_axis(const std::string& name, const std::string& where) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  throw ConfigError(where + ": axis must be \"x\" or \"y\"");
}

std::array<double, 4> parse_input_weights(const json& neurons) {
  std::array<double, 4> w{1000.0, 1000.0, 1000.0, 1000.0};
  if (!neurons.contains("input_weights")) return w;
  const json& v = neurons.at("input_weights");
  if (v.is_number()) {
    w.fill(v.get<double>());
  } else if (v.is_array() && v.size() == 4) {
    for (std::size_t k = 0; k < 4; ++k) w[k] = v.at(k).get<double>();
  } else {
    throw ConfigError("/neurons/input_weights: expected a number or an array of 4 numbers");
  }
  return w;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig cfg;
  cfg.source_text = json_text;
  SimConfig& sim = cfg.sim;

  try {
    const std::string unit = get_or<std::string>(root, "length_unit", "", "m");
    double to_m = 1.0;
    if (unit == "mm")
      to_m = 1e-3;
    else if (unit != "m")
      throw ConfigError("/length_unit: expected \"m\" or \"mm\"");

    const json& mesh = section(root, "mesh");
    sim.nx = get_or<std::size_t>(mesh, "nx", "/mesh", sim.nx);
    sim.ny = get_or<std::size_t>(mesh, "ny", "/mesh", sim.ny);
    sim.elem_size = get_or<double>(mesh, "elem_size", "/mesh", sim.elem_size / to_m) * to_m;

    const json& mat = section(root, "material");
    Material& m = sim.material;
    m.E = get_or<double>(mat, "E", "/material", m.E);
    m.nu = get_or<double>(mat, "nu", "/material", m.nu);
    m.rho = get_or<double>(mat, "rho", "/material", m.rho);
    m.thickness = get_or<double>(mat, "thickness", "/material", m.thickness / to_m) * to_m;
    m.rayleigh_a0 = get_or<double>(mat, "rayleigh_a0", "/material", m.rayleigh_a0);
    m.rayleigh_a1 = get_or<double>(mat, "rayleigh_a1", "/material", m.rayleigh_a1);

    const json& neurons = section(root, "neurons");
    sim.activation = parse_activation(get_or<std::string>(neurons, "activation", "/neurons", "tanh"));
    sim.input_weights = parse_input_weights(neurons);
    sim.design_dim = get_or<std::size_t>(neurons, "design_dim", "/neurons", sim.design_dim);
    sim.default_design = get_or<std::vector<double>>(neurons, "default_design", "/neurons",
                                                     std::vector<double>(sim.design_dim, 450000.0));

    const json& ex = section(root, "excitation");
    Excitation& e = sim.excitation;
    e.node_ids = get_or<std::vector<std::size_t>>(ex, "nodes", "/excitation", {224, 225, 226});
    e.direction = parse_axis(get_or<std::string>(ex, "direction", "/excitation", "x"), "/excitation/direction");
    e.amplitude = get_or<double>(ex, "amplitude", "/excitation", e.amplitude);
    e.waveform = parse_waveform(get_or<std::string>(ex, "waveform", "/excitation", "half_sine"));
    e.t_start = get_or<double>(ex, "t_start", "/excitation", e.t_start);
    e.t_end = get_or<double>(ex, "t_end", "/excitation", e.t_end);
    e.frequency = get_or<double>(ex, "frequency", "/excitation", e.frequency);

    const json& time = section(root, "time");
    sim.dt = get_or<double>(time, "dt", "/time", sim.dt);
    sim.n_steps = get_or<std::size_t>(time, "n_steps", "/time", sim.n_steps);
    sim.newmark_beta = get_or<double>(time, "newmark_beta", "/time", sim.newmark_beta);
    sim.newmark_gamma = get_or<double>(time, "newmark_gamma", "/time", sim.newmark_gamma);

    const json& out = section(root, "output");
    sim.output_node = get_or<std::size_t>(out, "node", "/output", sim.output_node);
    sim.output_dof = parse_axis(get_or<std::string>(out, "dof", "/output", "x"), "/output/dof");

    const json& tr = section(root, "training");
    TrainingSettings& t = cfg.training;
    t.x0 = get_or<std::vector<double>>(tr, "x0", "/training", sim.default_design);
    const auto d = static_cast<Eigen::Index>(sim.design_dim);
    if (tr.contains("bounds")) {
      const auto pairs = get_or<std::vector<std::vector<double>>>(tr, "bounds", "/training", {});
      if (pairs.size() == 1 && d > 1) {
        if (pairs[0].size() != 2) throw ConfigError("/training/bounds: expected [lower, upper] pairs");
        t.bounds = Bounds::uniform(sim.design_dim, pairs[0][0], pairs[0][1]);
      } else {
        if (static_cast<Eigen::Index>(pairs.size()) != d)
          throw ConfigError("/training/bounds: need one [lower, upper] pair per design variable");
        t.bounds.lower.resize(d);
        t.bounds.upper.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) {
          const auto& p = pairs[static_cast<std::size_t>(i)];
          if (p.size() != 2) throw ConfigError("/training/bounds: expected [lower, upper] pairs");
          t.bounds.lower(i) = p[0];
          t.bounds.upper(i) = p[1];
        }
      }
    } else {
      t.bounds = Bounds::uniform(sim.design_dim, 400000.0, 550000.0);
    }
    t.fd_delta = get_or<double>(tr, "fd_delta", "/training", t.fd_delta);
    t.scaling = parse_scaling(get_or<std::string>(tr, "scaling", "/training", "normalized"));
    t.workers = get_or<std::size_t>(tr, "workers", "/training", t.workers);

    const json& lb = section(tr, "lbfgsb");
    LbfgsbOptions& o = t.lbfgsb;
    o.history_size = get_or<std::size_t>(lb, "history_size", "/training/lbfgsb", o.history_size);
    o.factr = get_or<double>(lb, "factr", "/training/lbfgsb", o.factr);
    o.pgtol = get_or<double>(lb, "pgtol", "/training/lbfgsb", o.pgtol);
    o.maxfun = get_or<std::size_t>(lb, "maxfun", "/training/lbfgsb", o.maxfun);
    o.maxiter = get_or<std::size_t>(lb, "maxiter", "/training/lbfgsb", o.maxiter);
    o.max_linesearch = get_or<std::size_t>(lb, "max_linesearch", "/training/lbfgsb", o.max_linesearch);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  try {
    sim.validate();
    cfg.training.bounds.validate();
    cfg.training.lbfgsb.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.training.x0.size() != sim.design_dim)
    throw ConfigError("/training/x0: need design_dim entries");
  if (!(cfg.training.fd_delta > 0.0)) throw ConfigError("/training/fd_delta: must be > 0");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace neuroskin
