#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "neuroskin/lbfgsb.hpp"
#include "neuroskin/objective.hpp"
#include "neuroskin/simulation.hpp"

namespace neuroskin {

struct TrainingSettings {
  std::vector<double> x0{450000.0};
  Bounds bounds = Bounds::uniform(1, 400000.0, 550000.0);
  double fd_delta = 1e-2;
  DesignScaling scaling = DesignScaling::normalized;
  std::size_t workers = 0;
  LbfgsbOptions lbfgsb;
};

struct RunConfig {
  SimConfig sim;
  TrainingSettings training;
  std::string source_text;  // raw bytes of the file it was loaded from
};

/// Parses a JSON config. Lengths under "mesh.elem_size" and
/// "material.thickness" are in "length_unit" ("m" default, or "mm") and are
/// converted to meters. Throws ConfigError with the offending JSON pointer or
/// the parser's byte offset.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace neuroskin
