#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "nvsense/errors.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/readout.hpp"
#include "nvsense/sampling.hpp"

namespace nvsense {

enum class Experiment { t1_sweep, sensitivity_map, sensitivity_dist, ensemble_hist, fnr_curve };

inline constexpr std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::t1_sweep: return "t1-sweep";
    case Experiment::sensitivity_map: return "sensitivity-map";
    case Experiment::sensitivity_dist: return "sensitivity-dist";
    case Experiment::ensemble_hist: return "ensemble-hist";
    case Experiment::fnr_curve: return "fnr-curve";
  }
  return "";
}

inline std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (auto e : {Experiment::t1_sweep, Experiment::sensitivity_map, Experiment::sensitivity_dist,
                 Experiment::ensemble_hist, Experiment::fnr_curve})
    if (experiment_name(e) == name) return e;
  return std::nullopt;
}

/// Everything one CLI run needs besides the seed and the worker count.
struct RunConfig {
  std::optional<Experiment> experiment;
  PhysicsModel physics{};
  /// Reference sensor. Its geometry drives t1-sweep; its defect density, bulk
  /// T1 and Gd-per-c-DNA apply to every sampled sensor as well.
  SensorConfig sensor{};
  EnsembleSpec ensemble{};
  ReadoutParams readout{};

  struct T1Sweep {
    std::vector<double> densities = {0.0,  0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1,
                                     0.12, 0.14, 0.16, 0.18, 0.2,  0.22, 0.24, 0.26, 0.28, 0.3};
    bool operator==(const T1Sweep&) const = default;
  } t1_sweep;

  struct SensitivityMap {
    std::vector<double> diameters = {10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<double> standoffs = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    double integration_time = 1.0;
    bool operator==(const SensitivityMap&) const = default;
  } sensitivity_map;

  struct SensitivityDist {
    double integration_time = 1.0;
    bool operator==(const SensitivityDist&) const = default;
  } sensitivity_dist;

  struct EnsembleHist {
    std::vector<std::uint64_t> group_sizes = {1, 10};
    bool include_noisy = true;
    bool operator==(const EnsembleHist&) const = default;
  } ensemble_hist;

  struct FnrCurve {
    std::vector<std::uint64_t> group_sizes = {1, 10};
    std::vector<std::uint64_t> copies = {0, 100, 300, 1000, 3000, 10000, 30000, 100000};
    bool operator==(const FnrCurve&) const = default;
  } fnr_curve;

  struct Output {
    std::string dir = "out";
    std::string format = "csv";
    bool operator==(const Output&) const = default;
  } output;

  /// Ensemble with the reference sensor's non-sampled fields and the run seed.
  EnsembleSpec ensemble_for(std::uint64_t seed) const {
    EnsembleSpec spec = ensemble;
    spec.fixed = sensor;
    spec.seed = seed;
    return spec;
  }

  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

using FieldRef = std::variant<double*, std::uint64_t*, bool*, std::string*, std::vector<double>*,
                              std::vector<std::uint64_t>*>;

struct Field {
  std::string_view path;
  FieldRef ref;
};

// Single source of truth for key names, their order in the canonical dump and
// their storage. The dipolar prefactor is derived, never read.
inline std::vector<Field> fields_of(RunConfig& c) {
  return {
      {"physics.gamma_e", &c.physics.constants.gamma_e},
      {"physics.gamma_gd", &c.physics.constants.gamma_gd},
      {"physics.spin_gd", &c.physics.constants.spin_gd},
      {"physics.omega0", &c.physics.constants.omega0},
      {"physics.kappa_angular", &c.physics.constants.kappa_angular},
      {"physics.gd_bath.intrinsic_rate", &c.physics.gd_bath.intrinsic_rate},
      {"physics.gd_bath.rate_density_coeff", &c.physics.gd_bath.rate_density_coeff},
      {"physics.gd_bath.standoff", &c.physics.gd_bath.standoff},
      {"physics.defect_bath.intrinsic_rate", &c.physics.defect_bath.intrinsic_rate},
      {"physics.defect_bath.rate_density_coeff", &c.physics.defect_bath.rate_density_coeff},
      {"physics.defect_bath.standoff", &c.physics.defect_bath.standoff},
      {"sensor.diameter", &c.sensor.diameter},
      {"sensor.nv_offset", &c.sensor.nv_offset},
      {"sensor.gd_standoff", &c.sensor.gd_standoff},
      {"sensor.gd_density", &c.sensor.gd_density},
      {"sensor.defect_density", &c.sensor.defect_density},
      {"sensor.t1_bulk", &c.sensor.t1_bulk},
      {"sensor.gd_per_cdna", &c.sensor.gd_per_cdna},
      {"ensemble.count", &c.ensemble.count},
      {"ensemble.d_mean", &c.ensemble.d_mean},
      {"ensemble.d_sd", &c.ensemble.d_sd},
      {"ensemble.n_mean", &c.ensemble.n_mean},
      {"ensemble.n_sd", &c.ensemble.n_sd},
      {"ensemble.l_mean", &c.ensemble.l_mean},
      {"ensemble.l_sd", &c.ensemble.l_sd},
      {"ensemble.nv_confinement", &c.ensemble.nv_confinement},
      {"readout.contrast", &c.readout.contrast},
      {"readout.photons_per_meas", &c.readout.photons_per_meas},
      {"readout.dead_time", &c.readout.dead_time},
      {"readout.dark_time", &c.readout.dark_time},
      {"readout.meas_time", &c.readout.meas_time},
      {"t1_sweep.densities", &c.t1_sweep.densities},
      {"sensitivity_map.diameters", &c.sensitivity_map.diameters},
      {"sensitivity_map.standoffs", &c.sensitivity_map.standoffs},
      {"sensitivity_map.integration_time", &c.sensitivity_map.integration_time},
      {"sensitivity_dist.integration_time", &c.sensitivity_dist.integration_time},
      {"ensemble_hist.group_sizes", &c.ensemble_hist.group_sizes},
      {"ensemble_hist.include_noisy", &c.ensemble_hist.include_noisy},
      {"fnr_curve.group_sizes", &c.fnr_curve.group_sizes},
      {"fnr_curve.copies", &c.fnr_curve.copies},
      {"output.dir", &c.output.dir},
      {"output.format", &c.output.format},
  };
}
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "ensemble.count is bound as a u64 field");

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_string && ch == '\\') {
      ++i;
    } else if (ch == '"') {
      in_string = !in_string;
    } else if (ch == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

inline bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    const char ch = key[i];
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                    ch == '-' || ch == '.';
    if (!ok || (ch == '.' && key[i + 1] == '.')) return false;
  }
  return true;
}

struct LineContext {
  std::size_t line;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line, key, what); }
};

inline double parse_number(std::string_view text, const LineContext& ctx) {
  const std::string s(trim(text));
  if (s.empty()) ctx.fail("expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    ctx.fail("malformed number '" + s + "'");
  return v;
}

inline std::uint64_t parse_count(std::string_view text, const LineContext& ctx) {
  const double v = parse_number(text, ctx);
  if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15) ctx.fail("expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

inline std::vector<std::string_view> split_array(std::string_view text, const LineContext& ctx) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') ctx.fail("expected an array [a, b, ...]");
  text = trim(text.substr(1, text.size() - 2));
  std::vector<std::string_view> items;
  if (text.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (item.empty()) {
      // a single trailing comma is allowed
      if (comma == std::string_view::npos && !items.empty()) break;
      ctx.fail("empty array element");
    }
    items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

inline std::string parse_string(std::string_view text, const LineContext& ctx) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '"' || text.back() != '"') ctx.fail("expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < text.size(); ++i) {
    char ch = text[i];
    if (ch == '"') ctx.fail("unescaped quote in string");
    if (ch == '\\') {
      if (i + 2 >= text.size()) ctx.fail("dangling escape");
      const char esc = text[++i];
      switch (esc) {
        case '"': ch = '"'; break;
        case '\\': ch = '\\'; break;
        case 'n': ch = '\n'; break;
        case 't': ch = '\t'; break;
        default: ctx.fail(std::string("unsupported escape \\") + esc);
      }
    }
    out.push_back(ch);
  }
  return out;
}

inline bool parse_bool(std::string_view text, const LineContext& ctx) {
  text = trim(text);
  if (text == "true") return true;
  if (text == "false") return false;
  ctx.fail("expected true or false");
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(ch);
    }
  }
  return out + "\"";
}

inline void assign(const FieldRef& ref, std::string_view value, const LineContext& ctx) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, double>) {
          *target = parse_number(value, ctx);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          *target = parse_count(value, ctx);
        } else if constexpr (std::is_same_v<T, bool>) {
          *target = parse_bool(value, ctx);
        } else if constexpr (std::is_same_v<T, std::string>) {
          *target = parse_string(value, ctx);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          target->clear();
          for (auto item : split_array(value, ctx)) target->push_back(parse_number(item, ctx));
        } else {
          target->clear();
          for (auto item : split_array(value, ctx)) target->push_back(parse_count(item, ctx));
        }
      },
      ref);
}

inline std::string render(const FieldRef& ref) {
  return std::visit(
      [](auto* source) -> std::string {
        using T = std::remove_pointer_t<decltype(source)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(*source);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          return std::to_string(*source);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *source ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(*source);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < source->size(); ++i) {
            if (i) out += ", ";
            if constexpr (std::is_same_v<T, std::vector<double>>)
              out += format_double((*source)[i]);
            else
              out += std::to_string((*source)[i]);
          }
          return out + "]";
        }
      },
      ref);
}

template <class T>
void require_nonempty(const std::vector<T>& v, const char* key) {
  if (v.empty()) throw ValidationError(key, "must not be empty");
}

}  // namespace detail

inline void RunConfig::validate() const {
  physics.validate();
  sensor.validate();
  ensemble.validate();
  readout.validate();
  detail::require_nonempty(t1_sweep.densities, "t1_sweep.densities");
  for (double n : t1_sweep.densities)
    if (!(n >= 0)) throw ValidationError("t1_sweep.densities", "densities must be >= 0");
  detail::require_nonempty(sensitivity_map.diameters, "sensitivity_map.diameters");
  detail::require_nonempty(sensitivity_map.standoffs, "sensitivity_map.standoffs");
  for (double d : sensitivity_map.diameters)
    if (!(d > 0) || !(sensor.nv_offset < 0.5 * d))
      throw ValidationError("sensitivity_map.diameters", "diameters must be > 0 and exceed 2 * sensor.nv_offset");
  for (double l : sensitivity_map.standoffs)
    if (!(l > 0)) throw ValidationError("sensitivity_map.standoffs", "standoffs must be > 0");
  if (!(sensitivity_map.integration_time > 0))
    throw ValidationError("sensitivity_map.integration_time", "must be > 0");
  if (!(sensitivity_dist.integration_time > 0))
    throw ValidationError("sensitivity_dist.integration_time", "must be > 0");
  detail::require_nonempty(ensemble_hist.group_sizes, "ensemble_hist.group_sizes");
  for (auto k : ensemble_hist.group_sizes)
    if (k < 1 || k > ensemble.count)
      throw ValidationError("ensemble_hist.group_sizes", "group sizes must be in [1, ensemble.count]");
  detail::require_nonempty(fnr_curve.group_sizes, "fnr_curve.group_sizes");
  for (auto k : fnr_curve.group_sizes)
    if (k < 1 || k > ensemble.count)
      throw ValidationError("fnr_curve.group_sizes", "group sizes must be in [1, ensemble.count]");
  detail::require_nonempty(fnr_curve.copies, "fnr_curve.copies");
  if (output.format != "csv" && output.format != "json")
    throw ValidationError("output.format", "must be \"csv\" or \"json\"");
}

/// Parses the TOML-style key/value document. Keys may be dotted and/or placed
/// under [section] headers; missing keys keep their defaults.
inline RunConfig parse_config(std::string_view text) {
  RunConfig config;
  auto fields = detail::fields_of(config);
  std::set<std::string, std::less<>> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "", "unterminated section header");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::valid_key(name)) throw ParseError(line_no, std::string(name), "invalid section name");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "", "expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    if (!detail::valid_key(key)) throw ParseError(line_no, std::string(key), "invalid key");
    const std::string path = section.empty() ? std::string(key) : section + "." + std::string(key);
    const detail::LineContext ctx{line_no, path};
    const auto value = detail::trim(line.substr(eq + 1));
    if (!seen.insert(path).second) ctx.fail("duplicate key");

    if (path == "experiment") {
      const auto name = detail::parse_string(value, ctx);
      if (name.empty()) {
        config.experiment.reset();
      } else {
        config.experiment = experiment_from_name(name);
        if (!config.experiment) ctx.fail("unknown experiment '" + name + "'");
      }
      continue;
    }
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.path == path; });
    if (it == fields.end()) ctx.fail("unknown key");
    detail::assign(it->ref, value, ctx);
  }
  auto& c = config.physics.constants;
  c.dipolar_prefactor = PhysicalConstants::prefactor_for(c.gamma_gd, c.spin_gd, c.kappa_angular);
  config.validate();
  return config;
}

/// Canonical serialization: every key, fixed order, 17 significant digits.
inline std::string dump_config(const RunConfig& config) {
  RunConfig copy = config;
  std::ostringstream out;
  if (copy.experiment) out << "experiment = " << detail::quote(experiment_name(*copy.experiment)) << "\n";
  std::string section;
  for (const auto& f : detail::fields_of(copy)) {
    const auto dot = f.path.rfind('.');
    const auto sec = f.path.substr(0, dot);
    if (sec != section) {
      section = std::string(sec);
      out << "\n[" << section << "]\n";
    }
    out << f.path.substr(dot + 1) << " = " << detail::render(f.ref) << "\n";
  }
  return out.str();
}

}  // namespace nvsense
