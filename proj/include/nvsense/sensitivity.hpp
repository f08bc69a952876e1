#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "nvsense/parallel.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/readout.hpp"
#include "nvsense/sampling.hpp"

namespace nvsense {

/// Shot-noise-limited sensitivity to the Gd surface density.
struct SensitivityResult {
  double eta_density = 0.0;       ///< nm^-2 sqrt(s)
  double tau_opt = 0.0;           ///< s
  double min_molecules = 0.0;     ///< at integration_time
  double min_rna_copies = 0.0;
  double integration_time = 1.0;  ///< s
  bool detectable = true;
};

inline constexpr double kTauSearchMin = 1e-7;  // s
inline constexpr std::size_t kTauGridPoints = 200;
inline constexpr double kTauRelTolerance = 1e-3;

/// eta = sigma_n(tau) sqrt(tau + dead_time) at tau = readout.dark_time, where
/// sigma_n = sqrt(N) / |dN/dn| for one readout collecting N photons.
/// Returns +inf when the signal has no first-order dependence on n.
inline double density_sensitivity(const SensorConfig& config, const PhysicsModel& model,
                                  const ReadoutParams& readout) {
  const double tau = readout.dark_time;
  const double slope = dgamma_dn(config, model);
  const double gamma = relaxation_rate(config, model).gamma_total;
  const double decay = std::exp(-gamma * tau);
  const double photons = readout.photons_per_meas * pl_expected(gamma, readout);
  const double dphotons = readout.photons_per_meas * readout.contrast * tau * decay * slope;
  if (!(slope > 0) || !(dphotons > 0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(photons) / dphotons * std::sqrt(tau + readout.dead_time);
}

inline double molecules_for(double eta, const SensorConfig& config, double integration_time) {
  const double shell = config.gd_shell_radius();
  return eta / std::sqrt(integration_time) * 4.0 * std::numbers::pi * shell * shell;
}

/// Minimizes eta over the dark time: log grid on [1e-7 s, 10 T1], then
/// golden-section refinement in log(tau) around the best grid point.
inline SensitivityResult optimal_sensitivity(const SensorConfig& config, const PhysicsModel& model,
                                             const ReadoutParams& readout_template, double integration_time) {
  readout_template.validate();
  const double t1 = relaxation_rate(config, model).t1();
  const double lo = std::log(kTauSearchMin);
  const double hi = std::log(std::max(10.0 * t1, 10.0 * kTauSearchMin));

  ReadoutParams readout = readout_template;
  auto eta_at_log = [&](double log_tau) {
    readout.dark_time = std::exp(log_tau);
    return density_sensitivity(config, model, readout);
  };

  const double step = (hi - lo) / static_cast<double>(kTauGridPoints - 1);
  std::size_t best = 0;
  double best_eta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kTauGridPoints; ++i) {
    const double eta = eta_at_log(lo + step * static_cast<double>(i));
    if (eta < best_eta) {
      best_eta = eta;
      best = i;
    }
  }

  SensitivityResult out;
  out.integration_time = integration_time;
  if (!std::isfinite(best_eta)) {
    out.detectable = false;
    out.eta_density = out.min_molecules = out.min_rna_copies = std::numeric_limits<double>::infinity();
    out.tau_opt = std::exp(lo + step * static_cast<double>(best));
    return out;
  }

  double a = lo + step * static_cast<double>(best > 0 ? best - 1 : 0);
  double b = lo + step * static_cast<double>(std::min(best + 1, kTauGridPoints - 1));
  double best_log = lo + step * static_cast<double>(best);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eta_at_log(c);
  double fd = eta_at_log(d);
  // interval width in log(tau) approximates the relative tolerance in tau
  while (b - a > kTauRelTolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eta_at_log(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eta_at_log(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = eta_at_log(mid);
  if (fmid < best_eta) {
    best_eta = fmid;
    best_log = mid;
  }

  out.eta_density = best_eta;
  out.tau_opt = std::exp(best_log);
  out.min_molecules = molecules_for(best_eta, config, integration_time);
  out.min_rna_copies = out.min_molecules / config.gd_per_cdna;
  return out;
}

struct SensorSensitivity {
  SensorConfig sensor;
  SensitivityResult result;
};

/// optimal_sensitivity for every sensor of the population, in index order.
inline std::vector<SensorSensitivity> sensitivity_distribution(const EnsembleSpec& spec, const PhysicsModel& model,
                                                               const ReadoutParams& readout_template,
                                                               double integration_time, std::size_t workers = 1) {
  spec.validate();
  std::vector<SensorSensitivity> out(spec.count);
  parallel_for(spec.count, workers, [&](std::size_t i) {
    out[i].sensor = sample_sensor(spec, i);
    out[i].result = optimal_sensitivity(out[i].sensor, model, readout_template, integration_time);
  });
  return out;
}

}  // namespace nvsense
