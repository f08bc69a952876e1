#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nvsense/classifier.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/readout.hpp"
#include "nvsense/sampling.hpp"
#include "nvsense/sensitivity.hpp"

namespace nvsense {

/// Coarse grid for tuning the constants that the relaxation model cannot fix
/// from first principles.
struct CalibrationGrid {
  std::vector<double> gd_rate_coeffs;  ///< s^-1 nm
  std::vector<double> defect_rates;    ///< s^-1
  std::vector<double> contrasts;
  std::vector<double> photons;
  double target_fnr = 0.14;
  double target_fpr = 0.239;
  double ba_low = 0.78;
  double ba_high = 0.84;
  double target_min_molecules = 100.0;

  double target_balanced_accuracy() const { return 1.0 - 0.5 * (target_fnr + target_fpr); }

  static CalibrationGrid coarse() {
    CalibrationGrid g;
    // keep R_Gd below omega0 up to n = 0.3 nm^-2
    for (int k = 2; k <= 13; ++k) g.gd_rate_coeffs.push_back(2.5e9 * k);
    for (int j = 0; j <= 12; ++j) g.defect_rates.push_back(std::pow(10.0, 7.0 + 0.25 * j));
    g.contrasts = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    g.photons = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 10000};
    return g;
  }
};

struct CalibrationResult {
  double gd_rate_coeff = 0.0;
  double defect_rate = 0.0;
  double contrast = 0.0;
  double photons = 0.0;
  double balanced_accuracy = 0.0;  ///< single-ND noiseless, at the chosen constants
  double min_molecules = 0.0;      ///< reference sensor, T = 1 s
};

/// Reference single sensor for the sensitivity target: 20 nm ND, NV at the
/// center, Gd layer 1 nm above the surface.
inline SensorConfig calibration_reference_sensor(const SensorConfig& fixed = {}) {
  SensorConfig s = fixed;
  s.diameter = 20.0;
  s.nv_offset = 0.0;
  s.gd_standoff = 1.0;
  s.gd_density = 0.1;
  return s;
}

inline ThresholdResult single_nd_classification(const EnsembleSpec& spec, const PhysicsModel& model,
                                                const ReadoutParams& readout, std::size_t workers = 1) {
  return optimize_threshold(build_population(spec, model, readout, 1, false, workers));
}

/// Grid search. The physics pair is chosen among grid points whose single-ND
/// balanced accuracy lies in [ba_low, ba_high] as the one whose (FNR, FPR) is
/// closest to the target pair; without any such point, the one closest in
/// balanced accuracy wins. The noiseless single-ND balanced accuracy is invariant under
/// the readout parameters (PL is an increasing affine map of exp(-gamma tau)
/// with the same map for both classes), so the physics pair is fixed first and
/// the readout pair second; this selects the same point as the full product grid.
inline CalibrationResult calibrate(const CalibrationGrid& grid, const EnsembleSpec& spec,
                                   const PhysicsModel& base_model, const ReadoutParams& base_readout,
                                   std::size_t workers = 1) {
  CalibrationResult best;
  // (in band, distance): in-band points always beat out-of-band ones
  bool best_in_band = false;
  double best_gap = std::numeric_limits<double>::infinity();
  PhysicsModel model = base_model;
  for (double coeff : grid.gd_rate_coeffs) {
    for (double rate : grid.defect_rates) {
      model.gd_bath.rate_density_coeff = coeff;
      model.defect_bath.intrinsic_rate = rate;
      const auto r = single_nd_classification(spec, model, base_readout, workers);
      const bool in_band = r.balanced_accuracy >= grid.ba_low && r.balanced_accuracy <= grid.ba_high;
      const double gap = in_band ? std::hypot(r.fnr - grid.target_fnr, r.fpr - grid.target_fpr)
                                 : std::abs(r.balanced_accuracy - grid.target_balanced_accuracy());
      if ((in_band && !best_in_band) || (in_band == best_in_band && gap < best_gap)) {
        best_in_band = in_band;
        best_gap = gap;
        best.gd_rate_coeff = coeff;
        best.defect_rate = rate;
        best.balanced_accuracy = r.balanced_accuracy;
      }
    }
  }
  model.gd_bath.rate_density_coeff = best.gd_rate_coeff;
  model.defect_bath.intrinsic_rate = best.defect_rate;

  const SensorConfig reference = calibration_reference_sensor(spec.fixed);
  best_gap = std::numeric_limits<double>::infinity();
  double best_budget = 0.0;
  ReadoutParams readout = base_readout;
  for (double contrast : grid.contrasts) {
    for (double photons : grid.photons) {
      readout.contrast = contrast;
      readout.photons_per_meas = photons;
      const double mm = optimal_sensitivity(reference, model, readout, 1.0).min_molecules;
      const double gap = std::abs(std::log(mm / grid.target_min_molecules));
      // among equal fits prefer the larger signal budget C^2 N
      const double budget = contrast * contrast * photons;
      if (gap < best_gap - 1e-12 || (std::abs(gap - best_gap) <= 1e-12 && budget > best_budget)) {
        best_gap = gap;
        best_budget = budget;
        best.contrast = contrast;
        best.photons = photons;
        best.min_molecules = mm;
      }
    }
  }
  return best;
}

}  // namespace nvsense
