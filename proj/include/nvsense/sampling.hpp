#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nvsense/errors.hpp"
#include "nvsense/parallel.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/rng.hpp"

namespace nvsense {

/// Distributions defining a Monte Carlo population of nanodiamonds.
/// Spreads are standard deviations in the units of the matching mean.
struct EnsembleSpec {
  std::size_t count = 5000;
  double d_mean = 25.0;
  double d_sd = 3.0;
  double n_mean = 0.1;
  double n_sd = 0.02;
  double l_mean = 1.5;
  double l_sd = 0.2;
  double nv_confinement = 0.2;  ///< NV ball radius as a fraction of the ND radius
  std::uint64_t seed = 0;
  /// Source of the non-sampled sensor fields (defects, bulk T1, Gd per c-DNA).
  SensorConfig fixed{};

  void validate() const {
    if (count < 1) throw ValidationError("ensemble.count", "must be >= 1");
    if (!(d_mean > 0)) throw ValidationError("ensemble.d_mean", "must be > 0");
    if (!(n_mean > 0)) throw ValidationError("ensemble.n_mean", "must be > 0");
    if (!(l_mean > 0)) throw ValidationError("ensemble.l_mean", "must be > 0");
    if (!(d_sd >= 0)) throw ValidationError("ensemble.d_sd", "must be >= 0");
    if (!(n_sd >= 0)) throw ValidationError("ensemble.n_sd", "must be >= 0");
    if (!(l_sd >= 0)) throw ValidationError("ensemble.l_sd", "must be >= 0");
    if (!(nv_confinement > 0 && nv_confinement <= 1))
      throw ValidationError("ensemble.nv_confinement", "must be in (0, 1]");
  }

  bool operator==(const EnsembleSpec&) const = default;
};

inline constexpr double kMinDiameter = 4.0;    // nm, exclusive
inline constexpr double kMinStandoff = 0.3;    // nm, inclusive
inline constexpr int kMaxRejections = 10000;

namespace detail {

template <class Accept>
double truncated_normal(RngStream& rng, double mean, double sd, Accept accept, const char* what) {
  if (sd == 0.0) {
    if (!accept(mean)) throw DomainError(std::string("sample_sensor: degenerate ") + what + " outside support");
    return mean;
  }
  std::normal_distribution<double> normal(mean, sd);
  for (int tries = 0; tries < kMaxRejections; ++tries) {
    const double v = normal(rng);
    if (accept(v)) return v;
  }
  throw DomainError(std::string("sample_sensor: ") + what + " rejected " + std::to_string(kMaxRejections) +
                    " draws; distribution has almost no mass in its support");
}

}  // namespace detail

/// The `index`-th nanodiamond of the population. Pure in (spec, index).
inline SensorConfig sample_sensor(const EnsembleSpec& spec, std::size_t index) {
  RngStream rng(spec.seed, StreamTag::sensor_sampling, index);
  SensorConfig s = spec.fixed;
  s.diameter = detail::truncated_normal(rng, spec.d_mean, spec.d_sd, [](double d) { return d > kMinDiameter; },
                                        "diameter");
  s.gd_density = detail::truncated_normal(rng, spec.n_mean, spec.n_sd, [](double n) { return n >= 0.0; },
                                          "gd_density");
  s.gd_standoff = detail::truncated_normal(rng, spec.l_mean, spec.l_sd,
                                           [](double l) { return l >= kMinStandoff; }, "gd_standoff");
  // uniform in a ball: radial CDF r^3
  const double u = std::cbrt(rng.uniform01());
  s.nv_offset = spec.nv_confinement * s.radius() * u;
  return s;
}

/// All `spec.count` sensors, ordered by index; independent of `workers`.
inline std::vector<SensorConfig> population(const EnsembleSpec& spec, std::size_t workers = 1) {
  spec.validate();
  std::vector<SensorConfig> out(spec.count);
  parallel_for(spec.count, workers, [&](std::size_t i) { out[i] = sample_sensor(spec, i); });
  return out;
}

}  // namespace nvsense
