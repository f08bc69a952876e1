#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "nvsense/errors.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/rng.hpp"

namespace nvsense {

// Calibrated against the single-sensor sensitivity target (`nvsense calibrate`).
inline constexpr double kCalibratedContrast = 0.1;
inline constexpr double kCalibratedPhotons = 1.0;

/// Fixed-dark-time PL readout of one nanodiamond.
struct ReadoutParams {
  double contrast = kCalibratedContrast;
  double photons_per_meas = kCalibratedPhotons;  ///< expected counts per shot at PL = 1
  double dead_time = 2e-6;                       ///< s, per-shot overhead
  double dark_time = 200e-6;                     ///< s
  /// Duration of one full PL measurement (s). It repeats the shot
  /// (dark_time + dead_time) as often as fits; 0 means a single shot.
  double meas_time = 10.0;

  /// Readout shots accumulated in one full measurement (at least one).
  double shots_per_meas() const {
    const double cycle = dark_time + dead_time;
    return cycle > 0.0 ? std::max(1.0, meas_time / cycle) : 1.0;
  }

  /// Expected photons of one full measurement at PL = 1.
  double photons_per_reading() const { return photons_per_meas * shots_per_meas(); }

  void validate() const {
    if (!(contrast > 0 && contrast < 1)) throw ValidationError("readout.contrast", "must be in (0, 1)");
    if (!(photons_per_meas >= 1)) throw ValidationError("readout.photons_per_meas", "must be >= 1");
    if (!(dead_time >= 0)) throw ValidationError("readout.dead_time", "must be >= 0");
    if (!(dark_time >= 0)) throw ValidationError("readout.dark_time", "must be >= 0");
    if (!(meas_time >= 0)) throw ValidationError("readout.meas_time", "must be >= 0");
  }

  bool operator==(const ReadoutParams&) const = default;
};

/// Normalized PL after the dark time: (1 - C) + C exp(-gamma tau), PL(0) = 1.
inline double pl_expected(double gamma_total, const ReadoutParams& params) {
  return (1.0 - params.contrast) + params.contrast * std::exp(-gamma_total * params.dark_time);
}

/// One shot-noise-limited full PL measurement: Poisson counts over the
/// measurement's photon budget, normalized back to PL units.
inline double pl_measured(double gamma_total, const ReadoutParams& params, RngStream& rng) {
  const double budget = params.photons_per_reading();
  std::poisson_distribution<long long> counts(budget * pl_expected(gamma_total, params));
  return static_cast<double>(counts(rng)) / budget;
}

struct PlPair {
  double no_virus = 0.0;    ///< Gd attached
  double with_virus = 0.0;  ///< Gd detached
};

/// PL with only `residual_fraction` of the Gd layer still bound.
inline double pl_with_residual(const SensorConfig& config, const PhysicsModel& model, const ReadoutParams& params,
                               double residual_fraction) {
  SensorConfig c = config;
  c.gd_density = config.gd_density * residual_fraction;
  return pl_expected(relaxation_rate(c, model).gamma_total, params);
}

/// Expected PL before and after full Gd detachment.
inline PlPair virus_pair_pl(const SensorConfig& config, const PhysicsModel& model, const ReadoutParams& params) {
  return {pl_with_residual(config, model, params, 1.0), pl_with_residual(config, model, params, 0.0)};
}

}  // namespace nvsense
