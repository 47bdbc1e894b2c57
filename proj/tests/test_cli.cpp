#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "neuroskin/commands.hpp"
#include "neuroskin/config.hpp"
#include "neuroskin/errors.hpp"
#include "neuroskin/series_io.hpp"
#include "temp_dir.hpp"

using namespace neuroskin;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "length_unit": "mm",
    "mesh": {"nx": 2, "ny": 4, "elem_size": 50},
    "neurons": {"activation": "tanh", "input_weights": 1000, "design_dim": 1, "default_design": [450000]},
    "excitation": {"nodes": [13, 14], "direction": "x", "amplitude": 50, "waveform": "half_sine",
                   "t_start": 0, "t_end": 0.05},
    "time": {"dt": 0.001, "n_steps": 120},
    "output": {"node": 13, "dof": "x"},
    "training": {"x0": [450000], "bounds": [[400000, 550000]], "lbfgsb": {"maxiter": 20}}
  })");
}

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

fs::path write_config(const fs::path& dir, const json& cfg, const std::string& name = "config.json") {
  return write_text(dir / name, cfg.dump(2));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Captured {
  std::ostringstream out, err;
  Console io() { return {out, err}; }
};

}  // namespace

TEST_SUITE("cli_orchestrator") {
  TEST_CASE("config: units, defaults and hash") {
    const RunConfig cfg = parse_config(small_config().dump());
    CHECK(cfg.sim.elem_size == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(cfg.sim.material.thickness == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(cfg.sim.material.E == 2.0e9);
    CHECK(cfg.sim.input_weights[3] == 1000.0);
    CHECK(cfg.training.bounds.lower(0) == 400000.0);
    CHECK(cfg.training.lbfgsb.maxiter == 20);
    CHECK(cfg.training.lbfgsb.factr == 1e12);

    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("config: errors carry their location") {
    try {
      parse_config("{\"mesh\": {\"nx\": 2,,}}");
      FAIL("expected a parse error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
    json bad = small_config();
    bad["material"]["nu"] = "soft";
    try {
      parse_config(bad.dump());
      FAIL("expected a type error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("/material/nu") != std::string::npos);
    }
    bad = small_config();
    bad["length_unit"] = "in";
    CHECK_THROWS_AS(parse_config(bad.dump()), ConfigError);
    bad = small_config();
    bad["excitation"]["nodes"] = {0};
    CHECK_THROWS_AS(parse_config(bad.dump()), ConfigError);
    bad = small_config();
    bad["training"]["x0"] = {1, 2};
    CHECK_THROWS_AS(parse_config(bad.dump()), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("series files") {
    TempDir tmp;
    const std::vector<double> v{0.1, -1.0 / 3.0, 6.02e23, 0.0, -5e-324};
    write_series(tmp.path() / "s.out", v);
    CHECK(read_series(tmp.path() / "s.out") == v);
    CHECK(slurp(tmp.path() / "s.out").find('\r') == std::string::npos);
    CHECK(format_double(0.1) == "0.10000000000000001");
    write_text(tmp.path() / "bad.out", "1.0\nabc\n");
    CHECK_THROWS_AS(read_series(tmp.path() / "bad.out"), IoError);
    CHECK_THROWS_AS(read_series(tmp.path() / "missing.out"), IoError);

    write_params_csv(tmp.path() / "p.csv", std::vector<double>{1.5, 2.5});
    CHECK(slurp(tmp.path() / "p.csv") == "element_index,w_o\n0,1.5\n1,2.5\n");
    CHECK(read_params_csv(tmp.path() / "p.csv") == std::vector<double>{1.5, 2.5});
  }

  TEST_CASE("result files with and without headers") {
    TempDir tmp;
    write_text(tmp.path() / "a.csv", "iter,x_0,x_1,rmse,mse\n0,1,2,0.5,0.25\n1,3,4,0.1,0.01\n");
    auto rows = read_result_csv(tmp.path() / "a.csv", 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].x == std::vector<double>{3, 4});
    CHECK(*rows[0].rmse == 0.5);

    write_text(tmp.path() / "b.csv", "450000\n460000.5\n");
    rows = read_result_csv(tmp.path() / "b.csv", 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].iteration == 1);
    CHECK(rows[1].x[0] == 460000.5);
    CHECK(!rows[1].rmse);

    write_text(tmp.path() / "c.csv", "450000,0.2,0.04\n");
    rows = read_result_csv(tmp.path() / "c.csv", 1);
    CHECK(*rows[0].mse == 0.04);

    write_text(tmp.path() / "d.csv", "iter,x_0\n0,oops\n");
    CHECK_THROWS_AS(read_result_csv(tmp.path() / "d.csv", 1), IoError);
    write_text(tmp.path() / "e.csv", "iter,x_0,x_2\n");
    CHECK_THROWS_AS(read_result_csv(tmp.path() / "e.csv", 2), IoError);

    rows = read_result_csv(tmp.path() / "a.csv", 2);
    write_result_csv(tmp.path() / "f.csv", rows, 2);
    CHECK(slurp(tmp.path() / "f.csv") == "iter,x_0,x_1,rmse,mse\n0,1,2,0.5,0.25\n1,3,4,0.10000000000000001,0.01\n");
  }

  TEST_CASE("simulate") {
    TempDir tmp;
    Captured c;
    const fs::path cfg = write_config(tmp.path(), small_config());
    CHECK(cmd_simulate(cfg, std::vector<double>{450000.0}, {}, tmp.path() / "run", c.io()) == kExitOk);
    CHECK(read_series(tmp.path() / "run" / "output.out").size() == 120);
    CHECK(read_params_csv(tmp.path() / "run" / "params.csv").size() == 8);

    CHECK(cmd_simulate(cfg, {}, {}, tmp.path() / "default", c.io()) == kExitOk);
    CHECK(slurp(tmp.path() / "default" / "output.out") == slurp(tmp.path() / "run" / "output.out"));

    CHECK(cmd_simulate(cfg, {}, tmp.path() / "run" / "params.csv", tmp.path() / "fromparams", c.io()) == kExitOk);
    CHECK(slurp(tmp.path() / "fromparams" / "output.out") == slurp(tmp.path() / "run" / "output.out"));

    const fs::path broken = write_text(tmp.path() / "broken.json", "{\"mesh\": [1, 2,}");
    Captured e;
    CHECK(cmd_simulate(broken, {}, {}, tmp.path() / "x", e.io()) == kExitConfig);
    CHECK(e.err.str().find("byte") != std::string::npos);
  }

  TEST_CASE("simulate reports the diverging step") {
    TempDir tmp;
    json cfg = small_config();
    cfg["excitation"]["waveform"] = "step";
    cfg["excitation"]["amplitude"] = 1e308;
    Captured c;
    CHECK(cmd_simulate(write_config(tmp.path(), cfg), {}, {}, tmp.path() / "run", c.io()) == kExitDiverged);
    CHECK(c.err.str().find("step") != std::string::npos);
  }

  TEST_CASE("gen-target") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    Captured c;
    CHECK(cmd_gen_target(cfg, {500000.0}, tmp.path() / "t" / "target.out", c.io()) == kExitOk);
    CHECK(read_series(tmp.path() / "t" / "target.out").size() == 120);
    CHECK(c.out.str().find("N = 120") != std::string::npos);
    CHECK(c.out.str().find("RMS amplitude") != std::string::npos);

    Captured e;
    CHECK(cmd_gen_target(cfg, {600000.0}, tmp.path() / "oob.out", e.io()) == kExitConfig);
    CHECK(e.err.str().find("design out of bounds") != std::string::npos);
    CHECK(!fs::exists(tmp.path() / "oob.out"));

    json zero = small_config();
    zero["excitation"]["amplitude"] = 0.0;
    CHECK(cmd_gen_target(write_config(tmp.path(), zero, "zero.json"), {500000.0}, tmp.path() / "z.out", c.io()) ==
          kExitOk);
    for (double v : read_series(tmp.path() / "z.out")) CHECK(v == 0.0);
  }

  TEST_CASE("train, rerun and evaluate") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    Captured c;
    REQUIRE(cmd_gen_target(cfg, {500000.0}, tmp.path() / "target.out", c.io()) == kExitOk);
    const fs::path out = tmp.path() / "run";
    REQUIRE(cmd_train(cfg, tmp.path() / "target.out", out, {}, c.io()) == kExitOk);
    CHECK(c.out.str().find("xopt") != std::string::npos);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(!fs::exists(out / "evals"));

    const auto rows = read_result_csv(out / "result.csv", 1);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0].x[0] == 450000.0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(*rows[k].rmse == doctest::Approx(std::sqrt(*rows[k].mse)).epsilon(1e-12));
      if (k > 0) CHECK(*rows[k].rmse <= *rows[k - 1].rmse);
    }
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["fopt"].get<double>() == *rows.back().rmse);
    CHECK(summary["xopt"][0].get<double>() == rows.back().x[0]);
    CHECK(summary.contains("n_evaluations"));
    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["config_hash"] == "fnv1a64:" + fnv1a64_hex(slurp(cfg)));
    CHECK(manifest.contains("wall_time_s"));

    // A rerun replaces the log rather than appending to it.
    const std::string first = slurp(out / "result.csv");
    REQUIRE(cmd_train(cfg, tmp.path() / "target.out", out, {}, c.io()) == kExitOk);
    CHECK(slurp(out / "result.csv") == first);
    CHECK(slurp(out / "summary.json").size() > 0);

    // Re-evaluating the trace reproduces the logged errors.
    const fs::path copy = tmp.path() / "copy.csv";
    fs::copy_file(out / "result.csv", copy);
    CHECK(cmd_evaluate(cfg, tmp.path() / "target.out", copy, {}, c.io()) == kExitOk);
    const auto again = read_result_csv(copy, 1);
    REQUIRE(again.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
      CHECK(std::abs(*again[k].rmse - *rows[k].rmse) <= 1e-12 * std::max(1.0, *rows[k].rmse));

    const fs::path single = write_text(tmp.path() / "single.csv", format_double(rows.back().x[0]) + "\n");
    CHECK(cmd_evaluate(cfg, tmp.path() / "target.out", single, {}, c.io()) == kExitOk);
    CHECK(*read_result_csv(single, 1)[0].rmse == summary["fopt"].get<double>());
  }

  TEST_CASE("train from the generating design") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    Captured c;
    REQUIRE(cmd_gen_target(cfg, {450000.0}, tmp.path() / "target.out", c.io()) == kExitOk);
    Overrides o;
    o.maxiter = 1;
    REQUIRE(cmd_train(cfg, tmp.path() / "target.out", tmp.path() / "run", o, c.io()) == kExitOk);
    const auto rows = read_result_csv(tmp.path() / "run" / "result.csv", 1);
    REQUIRE(!rows.empty());
    CHECK(*rows[0].rmse <= 1e-12);
    CHECK(rows.size() == 1);
    CHECK(json::parse(slurp(tmp.path() / "run" / "summary.json"))["status"] == "converged");
  }

  TEST_CASE("train keeps evaluation directories on request") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    Captured c;
    REQUIRE(cmd_gen_target(cfg, {500000.0}, tmp.path() / "target.out", c.io()) == kExitOk);
    Overrides o;
    o.keep_evals = true;
    o.maxiter = 1;
    REQUIRE(cmd_train(cfg, tmp.path() / "target.out", tmp.path() / "run", o, c.io()) == kExitOk);
    CHECK(fs::exists(tmp.path() / "run" / "evals" / "0" / "params.csv"));
    CHECK(fs::exists(tmp.path() / "run" / "evals" / "1" / "output.out"));
  }

  TEST_CASE("train input errors") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    write_series(tmp.path() / "short.out", std::vector<double>(10, 0.0));
    Captured c;
    CHECK(cmd_train(cfg, tmp.path() / "short.out", tmp.path() / "run", {}, c.io()) == kExitConfig);
    CHECK(c.err.str().find("120") != std::string::npos);

    Overrides o;
    o.x0 = std::vector<double>{1.0};
    write_series(tmp.path() / "t.out", std::vector<double>(120, 0.0));
    CHECK(cmd_train(cfg, tmp.path() / "t.out", tmp.path() / "run", o, c.io()) == kExitConfig);
  }

  TEST_CASE("evaluate rejects empty and malformed files") {
    TempDir tmp;
    const fs::path cfg = write_config(tmp.path(), small_config());
    write_series(tmp.path() / "t.out", std::vector<double>(120, 0.0));
    Captured c;
    CHECK(cmd_evaluate(cfg, tmp.path() / "t.out", write_text(tmp.path() / "empty.csv", ""), {}, c.io()) != 0);
    CHECK(c.err.str().find("no iterates") != std::string::npos);
    CHECK(cmd_evaluate(cfg, tmp.path() / "t.out", write_text(tmp.path() / "bad.csv", "x,y\n1,2\n"), {}, c.io()) != 0);
  }
}
