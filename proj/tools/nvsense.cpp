// nvsense: run one experiment of the NV relaxometry model and write its artifacts.
//
//   nvsense t1-sweep --config run.toml --out out/ --seed 7
//   nvsense calibrate --workers 4

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvsense/nvsense.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string escape(const std::string& s) { return nlohmann::json(s).dump(); }

// One line on stderr: error kind=<kind> [key=<path>] [line=<n>] message="<text>"
int fail(int status, const char* kind, const std::string& message, const std::string& key = "",
         std::size_t line = 0) {
  std::string out = std::string("error kind=") + kind;
  if (!key.empty()) out += " key=" + key;
  if (line) out += " line=" + std::to_string(line);
  out += " message=" + escape(message);
  std::fprintf(stderr, "%s\n", out.c_str());
  return status;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json calibration_json(const nvsense::CalibrationResult& r) {
  return {{"gd_rate_coeff", r.gd_rate_coeff}, {"defect_rate", r.defect_rate},
          {"contrast", r.contrast},           {"photons_per_meas", r.photons},
          {"balanced_accuracy", r.balanced_accuracy}, {"min_molecules", r.min_molecules}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-nanodiamond relaxometry experiments"};
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;

  app.add_option("command", command,
                 "t1-sweep | sensitivity-map | sensitivity-dist | ensemble-hist | fnr-curve | calibrate "
                 "(default: config 'experiment')");
  app.add_option("--config", config_path, "configuration file (TOML subset)");
  app.add_option("--seed", seed, "master RNG seed")->default_val(0);
  app.add_option("--workers", workers, "worker threads, 0 = all cores")->default_val(0);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--format", format, "csv | json (overrides output.format)")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitUsage, "usage", e.what());
  }

  nvsense::RunConfig config;
  try {
    if (!config_path.empty()) config = nvsense::parse_config(read_file(config_path));
    if (out_dir) config.output.dir = *out_dir;
    if (format) config.output.format = *format;
    config.validate();
  } catch (const nvsense::ParseError& e) {
    return fail(kExitUsage, "parse", e.what(), e.key(), e.line());
  } catch (const nvsense::ValidationError& e) {
    return fail(kExitUsage, "validation", e.what(), e.key());
  } catch (const std::exception& e) {
    return fail(kExitUsage, "config", e.what());
  }

  try {
    if (command == "calibrate") {
      const auto grid = nvsense::CalibrationGrid::coarse();
      const auto r = nvsense::calibrate(grid, config.ensemble_for(seed), config.physics, config.readout, workers);
      std::printf("%s\n", calibration_json(r).dump(2).c_str());
      return 0;
    }
    std::optional<nvsense::Experiment> experiment = config.experiment;
    if (!command.empty()) {
      experiment = nvsense::experiment_from_name(command);
      if (!experiment) return fail(kExitUsage, "usage", "unknown experiment '" + command + "'");
    }
    if (!experiment) return fail(kExitUsage, "usage", "no experiment given on the command line or in the config");

    const auto record = nvsense::run_to_directory(config, *experiment, seed, workers);
    for (const auto& f : record.files) std::printf("%s\n", f.string().c_str());
    return 0;
  } catch (const nvsense::ValidationError& e) {
    return fail(kExitUsage, "validation", e.what(), e.key());
  } catch (const nvsense::DomainError& e) {
    return fail(kExitRuntime, "domain", e.what());
  } catch (const std::exception& e) {
    return fail(kExitRuntime, "runtime", e.what());
  }
}
