#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adiaspec/experiments.hpp"

using namespace adiaspec;

namespace {

enum Exit { kPass = 0, kConfig = 1, kAssert = 2, kNumerical = 3 };

RunConfig load(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config '" + file + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  return parse_config(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adiaspec: adiabatic evolution, dressing and response experiments"};
  app.require_subcommand(1);

  std::string config, out_dir;
  int threads = 1;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config, "config file")->required();
  run->add_option("--out", out_dir, "output directory (defaults to the config's output key)");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-experiments", "print the experiment names");

  std::string vconfig;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", vconfig, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (*list) {
      for (const auto& name : list_experiments()) std::cout << name << "\n";
      return kPass;
    }
    if (*validate) {
      RunConfig cfg = load(vconfig);
      validate_config(cfg);
      std::cout << "ok: " << cfg.experiment << "\n";
      return kPass;
    }
    RunConfig cfg = load(config);
    RunResult res = run_experiment(cfg, threads);
    const std::string dir = out_dir.empty() ? cfg.output : out_dir;
    write_outputs(cfg, res, dir);
    std::cout << cfg.experiment << ": " << (res.pass ? "PASS" : "FAIL") << " (" << res.rows.size() << " rows, written to "
              << dir << ")\n";
    return res.pass ? kPass : kAssert;
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kConfig;
  } catch (const NumericalError& ex) {
    std::cerr << "numerical error: " << ex.what() << "\n";
    return kNumerical;
  } catch (const DomainError& ex) {
    std::cerr << "invalid input: " << ex.what() << "\n";
    return kConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kNumerical;
  }
}
