#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adiaspec/dynamics.hpp"
#include "adiaspec/filter.hpp"
#include "adiaspec/lattice.hpp"
#include "adiaspec/spectral.hpp"

namespace adiaspec {

std::vector<std::string> list_experiments();

struct RunConfig {
  std::string experiment;
  std::string model;
  std::string schedule;
  std::string lattice = "chain";  // "chain" or "grid:W" (L x W for each L in the grid)
  nlohmann::json custom;           // terms for the custom model
  std::vector<double> eps_grid;
  std::vector<int> l_grid;
  std::vector<int> n_grid;
  std::vector<double> s_grid;
  double gamma = 0.5;
  std::string interp = "linear";
  int dressing_n = 1;
  double fd_step = 1e-3;
  std::string integrator = "magnus4";
  double max_step = 0.0;
  nlohmann::json patch;  // {"select": "lowest_k", "k": 1} etc.
  std::string observable = "current";
  nlohmann::json params;      // experiment-specific settings
  nlohmann::json tolerances;  // pass/fail thresholds
  std::uint64_t seed = 1234;
  std::string output = "out";
};

// Fills experiment defaults; throws ConfigError on anything invalid.
RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
// Builds every lattice and model the run would touch, without computing.
void validate_config(const RunConfig& cfg);

struct RunResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json summary;
  bool pass = false;
};

RunResult run_experiment(const RunConfig& cfg, int threads = 1);
// writes <dir>/<experiment>.csv and <dir>/<experiment>.summary.json
void write_outputs(const RunConfig& cfg, const RunResult& res, const std::string& dir);

// helpers shared with tests
Selector selector_from_json(const nlohmann::json& j);
Lattice lattice_for(const RunConfig& cfg, int length);
// "current", "sx", "sy", "sz", "zz" around the middle site of the lattice
LocalOperator named_observable(const std::string& id, const Lattice& lat);
std::string format_number(double x);

}  // namespace adiaspec
