#include "neuroskin/commands.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "neuroskin/config.hpp"
#include "neuroskin/errors.hpp"
#include "neuroskin/neuro.hpp"
#include "neuroskin/series_io.hpp"

namespace neuroskin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig load_with(const fs::path& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  TrainingSettings& t = cfg.training;
  if (o.workers) t.workers = *o.workers;
  if (o.fd_delta) t.fd_delta = *o.fd_delta;
  if (o.scaling) t.scaling = *o.scaling;
  if (o.maxiter) t.lbfgsb.maxiter = *o.maxiter;
  if (o.maxfun) t.lbfgsb.maxfun = *o.maxfun;
  if (o.factr) t.lbfgsb.factr = *o.factr;
  if (o.pgtol) t.lbfgsb.pgtol = *o.pgtol;
  if (o.x0) t.x0 = *o.x0;
  try {
    t.lbfgsb.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(t.fd_delta > 0.0)) throw ConfigError("fd_delta must be > 0");
  if (t.x0.size() != cfg.sim.design_dim) throw ConfigError("x0 needs design_dim entries");
  return cfg;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::string join_values(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

std::string csv_header(std::size_t d, bool with_errors) {
  std::string h = "iter";
  for (std::size_t i = 0; i < d; ++i) h += ",x_" + std::to_string(i);
  if (with_errors) h += ",rmse,mse";
  return h;
}

std::string csv_row(std::size_t iter, const std::vector<double>& x) {
  std::string line = std::to_string(iter);
  for (double v : x) line += "," + format_double(v);
  return line;
}

// Maps exceptions onto exit codes; every command body runs inside this.
template <typename Body>
int guarded(Console io, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    io.err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationDiverged& e) {
    io.err << "simulation diverged at step " << e.step() << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const EvaluationError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::optional<double> parse_number(std::string_view tok) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  if (tok.empty()) return std::nullopt;
  if (tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ResultRow> read_result_csv(const fs::path& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  // Column positions; npos when absent.
  constexpr auto none = std::string::npos;
  std::size_t col_iter = none, col_rmse = none, col_mse = none;
  std::vector<std::size_t> col_x;
  bool have_layout = false;

  std::vector<ResultRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const auto where = [&] { return path.string() + ":" + std::to_string(line_no); };

    if (!have_layout) {
      have_layout = true;
      if (!parse_number(fields.front())) {
        col_x.assign(d, none);
        for (std::size_t c = 0; c < fields.size(); ++c) {
          const std::string name = trim(fields[c]);
          if (name == "iter") {
            col_iter = c;
          } else if (name == "rmse") {
            col_rmse = c;
          } else if (name == "mse") {
            col_mse = c;
          } else if (name.rfind("x_", 0) == 0) {
            const auto idx = parse_number(name.substr(2));
            if (!idx || *idx < 0 || *idx >= static_cast<double>(d) || *idx != std::floor(*idx))
              throw IoError(where() + ": unexpected column '" + name + "'");
            col_x[static_cast<std::size_t>(*idx)] = c;
          } else {
            throw IoError(where() + ": unexpected column '" + name + "'");
          }
        }
        for (std::size_t i = 0; i < d; ++i)
          if (col_x[i] == none) throw IoError(where() + ": missing column x_" + std::to_string(i));
        continue;
      }
      // Headerless: the column count decides the layout.
      const std::size_t n = fields.size();
      const bool iter_first = n == d + 1 || n == d + 3;
      const bool errors = n == d + 2 || n == d + 3;
      if (n < d || n > d + 3) throw IoError(where() + ": expected " + std::to_string(d) + " design values");
      const std::size_t x0 = iter_first ? 1 : 0;
      if (iter_first) col_iter = 0;
      for (std::size_t i = 0; i < d; ++i) col_x.push_back(x0 + i);
      if (errors) {
        col_rmse = x0 + d;
        col_mse = x0 + d + 1;
      }
    }

    const auto field = [&](std::size_t c) -> double {
      if (c >= fields.size()) throw IoError(where() + ": too few columns");
      const auto v = parse_number(fields[c]);
      if (!v) throw IoError(where() + ": not a number: '" + trim(fields[c]) + "'");
      return *v;
    };
    ResultRow row;
    row.iteration = col_iter == none ? rows.size() : static_cast<std::size_t>(field(col_iter));
    row.x.reserve(d);
    for (std::size_t c : col_x) row.x.push_back(field(c));
    if (col_rmse != none) row.rmse = field(col_rmse);
    if (col_mse != none) row.mse = field(col_mse);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_result_csv(const fs::path& path, const std::vector<ResultRow>& rows, std::size_t d) {
  bool with_errors = !rows.empty();
  for (const auto& r : rows) with_errors = with_errors && r.rmse && r.mse;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << csv_header(d, with_errors) << '\n';
  for (const auto& r : rows) {
    if (r.x.size() != d) throw ShapeError("result row has the wrong design dimension");
    out << csv_row(r.iteration, r.x);
    if (with_errors) out << ',' << format_double(*r.rmse) << ',' << format_double(*r.mse);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

int cmd_gen_target(const fs::path& config, const std::vector<double>& w_star, const fs::path& out,
                   Console io) {
  return guarded(io, [&] {
    const RunConfig cfg = load_with(config, {});
    if (w_star.size() != cfg.sim.design_dim)
      throw ConfigError("design has " + std::to_string(w_star.size()) + " values, design_dim is " +
                        std::to_string(cfg.sim.design_dim));
    if (!cfg.training.bounds.contains(to_eigen(w_star))) throw DomainError("design out of bounds");

    const auto y = simulate(cfg.sim, broadcast_design(w_star, cfg.sim.element_count()));
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_series(out, y.values);

    double sq = 0.0;
    for (double v : y.values) sq += v * v;
    io.out << "wrote " << out.string() << ": N = " << y.size()
           << ", RMS amplitude = " << format_double(std::sqrt(sq / static_cast<double>(y.size()))) << '\n';
    return kExitOk;
  });
}

int cmd_train(const fs::path& config, const fs::path& target_path, const fs::path& out_dir,
              const Overrides& over, Console io) {
  return guarded(io, [&] {
    const auto wall_start = std::chrono::steady_clock::now();
    RunConfig cfg = load_with(config, over);
    const std::size_t d = cfg.sim.design_dim;
    auto target = read_series(target_path);

    fs::create_directories(out_dir);
    const fs::path result_path = out_dir / "result.csv";
    const fs::path summary_path = out_dir / "summary.json";
    const fs::path manifest_path = out_dir / "manifest.json";
    const fs::path evals_dir = out_dir / "evals";
    fs::remove(result_path);
    fs::remove(summary_path);
    fs::remove_all(evals_dir);

    TrainingSettings& ts = cfg.training;
    LbfgsbOptions opts = ts.lbfgsb;
    opts.f_target = 0.0;  // RMSE cannot go below zero

    TrainingProblem problem = make_training_problem(cfg.sim, std::move(target), ts.bounds, ts.fd_delta,
                                                    ts.scaling, ts.workers, evals_dir);
    const Eigen::VectorXd x0_raw = to_eigen(ts.x0);
    if (!problem.bounds.contains(x0_raw)) throw DomainError("x0 out of bounds");

    json manifest = {
        {"command", "train"},
        {"config_path", fs::absolute(config).string()},
        {"config_hash", "fnv1a64:" + fnv1a64_hex(cfg.source_text)},
        {"started_at", utc_timestamp()},
        {"design_dim", d},
        {"scaling", to_string(ts.scaling)},
        {"fd_delta", ts.fd_delta},
        {"workers", ts.workers == 0 ? d + 1 : ts.workers},
        {"x0", ts.x0},
        {"optimizer",
         {{"history_size", opts.history_size},
          {"factr", opts.factr},
          {"pgtol", opts.pgtol},
          {"maxfun", opts.maxfun},
          {"maxiter", opts.maxiter},
          {"max_linesearch", opts.max_linesearch}}},
        {"outputs",
         {{"result", result_path.string()}, {"summary", summary_path.string()}, {"evals", evals_dir.string()}}},
    };
    write_json(manifest_path, manifest);

    // Line-buffered log of accepted iterates; an interrupted run leaves every
    // complete row readable.
    std::ofstream log(result_path, std::ios::binary | std::ios::trunc);
    if (!log) throw IoError("cannot write " + result_path.string());
    log << csv_header(d, false) << '\n' << std::flush;
    std::size_t iteration = 0;
    const auto log_row = [&](const Eigen::VectorXd& x_opt) {
      log << csv_row(iteration++, to_std(problem.to_raw(x_opt))) << '\n' << std::flush;
      if (!log) throw IoError("write failed: " + result_path.string());
    };

    const Bounds opt_bounds = problem.optimizer_bounds();
    const Eigen::VectorXd start = project(problem.from_raw(x0_raw), opt_bounds);
    log_row(start);

    Eigen::VectorXd last_x = start;
    std::size_t n_sims = 0;
    const ValueGradFn valgrad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      last_x = x;
      const EvalResult r = objective_and_gradient(x, problem);
      n_sims += r.n_sims;
      g = r.g;
      return r.f;
    };

    LbfgsbResult res;
    try {
      res = minimize(valgrad, start, opt_bounds, opts, log_row);
    } catch (const EvaluationError& e) {
      log.close();
      write_json(summary_path, {{"status", "simulation_diverged"},
                                {"message", e.what()},
                                {"failing_design", to_std(problem.to_raw(last_x))},
                                {"failing_evaluation", e.index()},
                                {"n_simulations", n_sims}});
      io.err << "training aborted: " << e.what() << '\n';
      return kExitDiverged;
    }
    log.close();

    // Re-evaluate every logged iterate and rewrite the log with error columns.
    auto rows = read_result_csv(result_path, d);
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(rows.size());
    for (const auto& r : rows) xs.push_back(to_eigen(r.x));
    TrainingProblem batch = problem;
    batch.plant = make_simulation_plant(cfg.sim, evals_dir / "batch");
    const auto items = evaluate_batch(xs, batch);
    bool batch_ok = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      batch_ok = batch_ok && items[k].ok;
      rows[k].rmse = items[k].ok ? items[k].rmse : std::nan("");
      rows[k].mse = items[k].ok ? items[k].mse : std::nan("");
      if (!items[k].ok) io.err << "re-evaluation of row " << k << " failed: " << items[k].error << '\n';
    }
    write_result_csv(result_path, rows, d);

    const std::vector<double> xopt = to_std(problem.to_raw(res.x));
    write_json(summary_path, {{"xopt", xopt},
                              {"fopt", res.f},
                              {"status", to_string(res.status)},
                              {"message", res.message},
                              {"n_iterations", res.n_iterations},
                              {"n_evaluations", res.n_evaluations},
                              {"n_simulations", n_sims}});

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    manifest["finished_at"] = utc_timestamp();
    manifest["wall_time_s"] = wall;
    write_json(manifest_path, manifest);

    if (!over.keep_evals && batch_ok) fs::remove_all(evals_dir);

    io.out << "status: " << to_string(res.status) << " (" << res.message << ")\n"
           << "xopt = " << join_values(xopt) << '\n'
           << "fopt = " << format_double(res.f) << '\n';
    if (res.status == LbfgsbStatus::aborted) return kExitOptimizerAbort;
    return batch_ok ? kExitOk : kExitDiverged;
  });
}

int cmd_evaluate(const fs::path& config, const fs::path& target_path, const fs::path& result_file,
                 const Overrides& over, Console io) {
  return guarded(io, [&] {
    const RunConfig cfg = load_with(config, over);
    const std::size_t d = cfg.sim.design_dim;
    auto target = read_series(target_path);
    auto rows = read_result_csv(result_file, d);
    if (rows.empty()) {
      io.err << "error: no iterates in " << result_file.string() << '\n';
      return kExitConfig;
    }

    const auto& ts = cfg.training;
    const TrainingProblem problem =
        make_training_problem(cfg.sim, std::move(target), ts.bounds, ts.fd_delta, ts.scaling, ts.workers);
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(rows.size());
    for (const auto& r : rows) xs.push_back(to_eigen(r.x));
    const auto items = evaluate_batch(xs, problem);

    bool ok = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ok = ok && items[k].ok;
      rows[k].rmse = items[k].ok ? items[k].rmse : std::nan("");
      rows[k].mse = items[k].ok ? items[k].mse : std::nan("");
      if (!items[k].ok) io.err << "row " << k << " failed: " << items[k].error << '\n';
    }
    write_result_csv(result_file, rows, d);
    io.out << "evaluated " << rows.size() << " iterates into " << result_file.string() << '\n';
    return ok ? kExitOk : kExitDiverged;
  });
}

int cmd_simulate(const fs::path& config, const std::optional<std::vector<double>>& w,
                 const std::optional<fs::path>& params_file, const fs::path& out_dir, Console io) {
  return guarded(io, [&] {
    if (w && params_file) throw ConfigError("give either a design vector or a params file, not both");
    const RunConfig cfg = load_with(config, {});
    TimeSeries y;
    if (params_file) {
      const auto w_o = read_params_csv(*params_file);
      if (w_o.size() != cfg.sim.element_count())
        throw ConfigError("params file has " + std::to_string(w_o.size()) + " rows for " +
                          std::to_string(cfg.sim.element_count()) + " elements");
      fs::create_directories(out_dir);
      write_params_csv(out_dir / "params.csv", w_o);
      y = simulate(cfg.sim, w_o);
      write_series(out_dir / "output.out", y.values);
    } else {
      const std::vector<double> x = w ? *w : cfg.sim.default_design;
      if (x.size() != cfg.sim.design_dim)
        throw ConfigError("design has " + std::to_string(x.size()) + " values, design_dim is " +
                          std::to_string(cfg.sim.design_dim));
      y = run_and_write(out_dir, cfg.sim, x);
    }
    double peak = 0.0;
    for (double v : y.values) peak = std::max(peak, std::abs(v));
    io.out << "wrote " << (out_dir / "output.out").string() << ": N = " << y.size()
           << ", peak |u| = " << format_double(peak) << '\n';
    return kExitOk;
  });
}

}  // namespace neuroskin
