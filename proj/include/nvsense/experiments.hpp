#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nvsense/classifier.hpp"
#include "nvsense/config.hpp"
#include "nvsense/parallel.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/sensitivity.hpp"

namespace nvsense {

using Cell = std::variant<std::int64_t, double, std::string>;

/// One output artifact: fixed column order, one row per record.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Tables plus classification summaries destined for the run manifest.
struct ExperimentOutput {
  std::vector<Table> tables;
  nlohmann::json reports = nlohmann::json::array();
};

namespace detail {

inline std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }

inline nlohmann::json report_json(const ClassificationReport& r) {
  return {{"threshold", r.threshold},     {"fnr", r.fnr},
          {"fpr", r.fpr},                 {"balanced_accuracy", r.balanced_accuracy},
          {"fnr_worst", r.fnr_worst},     {"fpr_worst", r.fpr_worst},
          {"fnr_best", r.fnr_best},       {"fpr_best", r.fpr_best},
          {"degenerate", r.degenerate}};
}

}  // namespace detail

inline Table run_t1_sweep(const RunConfig& config) {
  Table t{"t1_sweep", {"gd_density_nm2", "gamma_bulk_s1", "gamma_surface_s1", "gamma_gd_s1", "t1_seconds"}, {}};
  for (double n : config.t1_sweep.densities) {
    SensorConfig s = config.sensor;
    s.gd_density = n;
    const auto r = relaxation_rate(s, config.physics);
    t.rows.push_back({n, r.gamma_bulk, r.gamma_surface, r.gamma_gd, r.t1()});
  }
  return t;
}

inline Table run_sensitivity_map(const RunConfig& config, std::size_t workers) {
  const auto& grid = config.sensitivity_map;
  const std::size_t cols = grid.standoffs.size();
  std::vector<SensitivityResult> results(grid.diameters.size() * cols);
  parallel_for(results.size(), workers, [&](std::size_t i) {
    SensorConfig s = config.sensor;
    s.diameter = grid.diameters[i / cols];
    s.gd_standoff = grid.standoffs[i % cols];
    results[i] = optimal_sensitivity(s, config.physics, config.readout, grid.integration_time);
  });
  Table t{"sensitivity_map",
          {"diameter_nm", "standoff_nm", "tau_opt_s", "eta_density", "min_molecules", "min_rna_copies"},
          {}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    t.rows.push_back({grid.diameters[i / cols], grid.standoffs[i % cols], r.tau_opt, r.eta_density,
                      r.min_molecules, r.min_rna_copies});
  }
  return t;
}

inline Table run_sensitivity_dist(const RunConfig& config, std::uint64_t seed, std::size_t workers) {
  const auto dist = sensitivity_distribution(config.ensemble_for(seed), config.physics, config.readout,
                                             config.sensitivity_dist.integration_time, workers);
  Table t{"sensitivity_dist",
          {"sensor_index", "diameter_nm", "gd_density_nm2", "standoff_nm", "nv_offset_nm", "min_molecules",
           "detectable_flag"},
          {}};
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& [s, r] = dist[i];
    t.rows.push_back({static_cast<std::int64_t>(i), s.diameter, s.gd_density, s.gd_standoff, s.nv_offset,
                      r.min_molecules, std::int64_t{r.detectable ? 1 : 0}});
  }
  return t;
}

inline ExperimentOutput run_ensemble_hist(const RunConfig& config, std::uint64_t seed, std::size_t workers) {
  const auto spec = config.ensemble_for(seed);
  ExperimentOutput out;
  Table t{"ensemble_hist", {"sample_index", "class", "group_size", "noisy_flag", "pl_value"}, {}};

  std::vector<bool> modes{false};
  if (config.ensemble_hist.include_noisy) modes.push_back(true);
  for (bool noisy : modes) {
    const auto per_sensor = per_sensor_pl(spec, config.physics, config.readout, noisy, workers);
    for (auto k : config.ensemble_hist.group_sizes) {
      const auto pop = group_population(per_sensor, k, noisy);
      for (std::size_t i = 0; i < pop.values_negative.size(); ++i)
        t.rows.push_back({static_cast<std::int64_t>(i), std::string("neg"), detail::as_int(k),
                          std::int64_t{noisy ? 1 : 0}, pop.values_negative[i]});
      for (std::size_t i = 0; i < pop.values_positive.size(); ++i)
        t.rows.push_back({static_cast<std::int64_t>(i), std::string("pos"), detail::as_int(k),
                          std::int64_t{noisy ? 1 : 0}, pop.values_positive[i]});

      nlohmann::json entry = {{"group_size", k}, {"noisy", noisy}, {"dropped_sensors", pop.dropped}};
      if (noisy) {
        const auto r = optimize_threshold(pop);
        entry["threshold"] = r.threshold;
        entry["fnr"] = r.fnr;
        entry["fpr"] = r.fpr;
        entry["balanced_accuracy"] = r.balanced_accuracy;
        entry["degenerate"] = r.degenerate;
      } else {
        entry.update(detail::report_json(classify(pop, config.readout)));
      }
      out.reports.push_back(std::move(entry));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

inline ExperimentOutput run_fnr_curve(const RunConfig& config, std::uint64_t seed, std::size_t workers) {
  const auto spec = config.ensemble_for(seed);
  std::vector<RnaLoadSpec> loads;
  for (auto v : config.fnr_curve.copies) loads.push_back({v, Allocation::pooled_hypergeometric});

  ExperimentOutput out;
  Table t{"fnr_curve",
          {"rna_copies", "group_size", "threshold", "fnr", "fpr", "fnr_worst", "fpr_worst", "fnr_best", "fpr_best",
           "balanced_accuracy"},
          {}};
  for (auto k : config.fnr_curve.group_sizes) {
    for (const auto& p : fnr_fpr_vs_copies(spec, config.physics, config.readout, k, loads, workers)) {
      const auto& r = p.report;
      t.rows.push_back({detail::as_int(p.copies), detail::as_int(p.group_size), r.threshold, r.fnr, r.fpr,
                        r.fnr_worst, r.fpr_worst, r.fnr_best, r.fpr_best, r.balanced_accuracy});
      auto entry = detail::report_json(r);
      entry["rna_copies"] = p.copies;
      entry["group_size"] = p.group_size;
      out.reports.push_back(std::move(entry));
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

/// Runs one experiment. Output is a pure function of (config, seed).
inline ExperimentOutput run_experiment(const RunConfig& config, Experiment experiment, std::uint64_t seed,
                                       std::size_t workers) {
  config.validate();
  switch (experiment) {
    case Experiment::t1_sweep: return {{run_t1_sweep(config)}, nlohmann::json::array()};
    case Experiment::sensitivity_map: return {{run_sensitivity_map(config, workers)}, nlohmann::json::array()};
    case Experiment::sensitivity_dist:
      return {{run_sensitivity_dist(config, seed, workers)}, nlohmann::json::array()};
    case Experiment::ensemble_hist: return run_ensemble_hist(config, seed, workers);
    case Experiment::fnr_curve: return run_fnr_curve(config, seed, workers);
  }
  throw std::logic_error("unhandled experiment");
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return detail::format_double(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      cell);
}

/// CSV with a header row; doubles with 17 significant digits.
inline std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

/// {"columns": [...], "rows": [[...], ...]}; non-finite doubles become strings.
inline std::string to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v))
                r.push_back(v);
              else
                r.push_back(detail::format_double(v));
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"name", table.name}, {"columns", table.columns}, {"rows", std::move(rows)}}.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Run orchestration

inline constexpr std::string_view kToolName = "nvsense";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunRecord {
  std::vector<std::filesystem::path> files;  ///< artifacts, manifest last
  double wall_time_s = 0.0;
};

namespace detail {

// Records `path` in `created` once it exists, so cleanup never touches files it did not write.
inline void write_file(const std::filesystem::path& path, const std::string& text,
                       std::vector<std::filesystem::path>& created) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  created.push_back(path);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

/// Runs `experiment` and writes its tables to config.output.dir in
/// config.output.format, followed by manifest.json. Files already written are
/// removed if anything fails.
inline RunRecord run_to_directory(RunConfig config, Experiment experiment, std::uint64_t seed, std::size_t workers) {
  const auto start = std::chrono::steady_clock::now();
  config.experiment = experiment;
  config.validate();
  const auto output = run_experiment(config, experiment, seed, workers);

  const std::filesystem::path dir = config.output.dir;
  std::filesystem::create_directories(dir);
  RunRecord record;
  try {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& table : output.tables) {
      const bool csv = config.output.format == "csv";
      const auto path = dir / (table.name + (csv ? ".csv" : ".json"));
      detail::write_file(path, csv ? to_csv(table) : to_json(table), record.files);
      outputs.push_back({{"table", table.name}, {"file", path.filename().string()}, {"rows", table.rows.size()}});
    }
    record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const nlohmann::json manifest = {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"experiment", experiment_name(experiment)},
        {"seed", seed},
        {"workers", resolve_workers(workers)},
        {"config", dump_config(config)},
        {"outputs", std::move(outputs)},
        {"classification", output.reports},
        {"wall_time_s", record.wall_time_s},
    };
    const auto path = dir / "manifest.json";
    detail::write_file(path, manifest.dump(2) + "\n", record.files);
  } catch (...) {
    std::error_code ec;
    for (const auto& f : record.files) std::filesystem::remove(f, ec);
    throw;
  }
  return record;
}

}  // namespace nvsense
