#pragma once

#include <cmath>
#include <numbers>

#include "nvsense/constants.hpp"
#include "nvsense/errors.hpp"

namespace nvsense {

/// One nanodiamond realization. Lengths in nm, densities in nm^-2.
struct SensorConfig {
  double diameter = 25.0;
  double nv_offset = 0.0;       ///< radial distance of the NV from the ND center
  double gd_standoff = 1.5;     ///< Gd layer height above the ND surface
  double gd_density = 0.1;      ///< c-DNA-DOTA-Gd surface density
  double defect_density = 1.0;  ///< paramagnetic surface defect density
  double t1_bulk = 3e-3;        ///< background relaxation time (s)
  double gd_per_cdna = 1.0;     ///< Gd complexes per c-DNA strand

  double radius() const { return 0.5 * diameter; }
  double gd_shell_radius() const { return radius() + gd_standoff; }

  void validate() const {
    if (!(diameter > 0)) throw ValidationError("sensor.diameter", "must be > 0");
    if (!(nv_offset >= 0 && nv_offset < radius()))
      throw ValidationError("sensor.nv_offset", "must satisfy 0 <= nv_offset < diameter/2");
    if (!(gd_standoff > 0)) throw ValidationError("sensor.gd_standoff", "must be > 0");
    if (!(gd_density >= 0)) throw ValidationError("sensor.gd_density", "must be >= 0");
    if (!(defect_density >= 0)) throw ValidationError("sensor.defect_density", "must be >= 0");
    if (!(t1_bulk > 0)) throw ValidationError("sensor.t1_bulk", "must be > 0");
    if (!(gd_per_cdna >= 1)) throw ValidationError("sensor.gd_per_cdna", "must be >= 1");
  }

  bool operator==(const SensorConfig&) const = default;
};

/// Fluctuation-rate model of a spin bath: R = intrinsic_rate + rate_density_coeff * sqrt(density).
struct SpinBathParams {
  double intrinsic_rate = 0.0;      ///< s^-1
  double rate_density_coeff = 0.0;  ///< s^-1 nm
  double standoff = 0.0;            ///< extra shell offset (nm)

  void validate(const char* key) const {
    if (!(intrinsic_rate >= 0)) throw ValidationError(std::string(key) + ".intrinsic_rate", "must be >= 0");
    if (!(rate_density_coeff >= 0))
      throw ValidationError(std::string(key) + ".rate_density_coeff", "must be >= 0");
    if (!(standoff >= 0)) throw ValidationError(std::string(key) + ".standoff", "must be >= 0");
  }

  bool operator==(const SpinBathParams&) const = default;
};

// Calibrated against the single-ND ensemble classification (`nvsense calibrate`).
inline constexpr double kCalibratedGdRateCoeff = 1.5e10;
inline constexpr double kCalibratedDefectRate = 1.7782794100389228e8;

inline SpinBathParams default_gd_bath() { return {1e8, kCalibratedGdRateCoeff, 0.0}; }
inline SpinBathParams default_defect_bath() { return {kCalibratedDefectRate, 0.0, 0.0}; }

/// Everything the relaxation model needs besides the sensor itself.
struct PhysicsModel {
  PhysicalConstants constants{};
  SpinBathParams gd_bath = default_gd_bath();
  SpinBathParams defect_bath = default_defect_bath();

  void validate() const {
    constants.validate();
    gd_bath.validate("physics.gd_bath");
    defect_bath.validate("physics.defect_bath");
  }

  bool operator==(const PhysicsModel&) const = default;
};

struct RelaxationBreakdown {
  double gamma_bulk = 0.0;
  double gamma_surface = 0.0;
  double gamma_gd = 0.0;
  double gamma_total = 0.0;

  double t1() const { return 1.0 / gamma_total; }
};

/// Surface integral of 1/r^6 over a sphere of radius `shell_radius` seen from a
/// point at distance `nv_offset` from its center (nm^-4).
inline double shell_inverse_r6_integral(double nv_offset, double shell_radius) {
  if (!(shell_radius > 0) || !(nv_offset >= 0) || !(nv_offset < shell_radius))
    throw DomainError("shell_inverse_r6_integral: need 0 <= nv_offset < shell_radius");
  constexpr double pi = std::numbers::pi;
  const double x = nv_offset / shell_radius;
  const double r4 = shell_radius * shell_radius * shell_radius * shell_radius;
  if (x < 1e-3) {
    // 4pi/Rs^4 (1 + 5x^2 + 14x^4); truncation error O(x^6)
    const double x2 = x * x;
    return 4.0 * pi / r4 * (1.0 + x2 * (5.0 + 14.0 * x2));
  }
  const double lo = shell_radius - nv_offset;
  const double hi = shell_radius + nv_offset;
  return pi * shell_radius / (2.0 * nv_offset) * (1.0 / (lo * lo * lo * lo) - 1.0 / (hi * hi * hi * hi));
}

/// Mean-square transverse field from a uniform spin shell (T^2).
inline double msq_transverse_field(double density, double nv_offset, double shell_radius,
                                   const PhysicalConstants& constants) {
  return constants.dipolar_prefactor * density * shell_inverse_r6_integral(nv_offset, shell_radius);
}

inline double fluctuation_rate(double density, const SpinBathParams& bath) {
  return bath.intrinsic_rate + bath.rate_density_coeff * std::sqrt(density);
}

/// Lorentzian spectral density R / (R^2 + omega^2), in s.
inline double lorentzian_psd(double rate, double omega) { return rate / (rate * rate + omega * omega); }

/// d/dR of lorentzian_psd.
inline double lorentzian_psd_slope(double rate, double omega) {
  const double den = rate * rate + omega * omega;
  return (omega * omega - rate * rate) / (den * den);
}

namespace detail {

inline double bath_relaxation(double density, double nv_offset, double shell_radius,
                              const SpinBathParams& bath, const PhysicalConstants& c) {
  if (density == 0.0) {
    // still check geometry
    (void)shell_inverse_r6_integral(nv_offset, shell_radius);
    return 0.0;
  }
  const double b2 = msq_transverse_field(density, nv_offset, shell_radius, c);
  return c.gamma_e * c.gamma_e * b2 * lorentzian_psd(fluctuation_rate(density, bath), c.omega0);
}

}  // namespace detail

/// Longitudinal relaxation rates of the NV, split by noise source.
inline RelaxationBreakdown relaxation_rate(const SensorConfig& config, const SpinBathParams& gd_bath,
                                           const SpinBathParams& defect_bath,
                                           const PhysicalConstants& constants) {
  config.validate();
  RelaxationBreakdown out;
  out.gamma_bulk = 1.0 / config.t1_bulk;
  out.gamma_surface = detail::bath_relaxation(config.defect_density, config.nv_offset,
                                              config.radius() + defect_bath.standoff, defect_bath, constants);
  out.gamma_gd = detail::bath_relaxation(config.gd_density * config.gd_per_cdna, config.nv_offset,
                                         config.gd_shell_radius() + gd_bath.standoff, gd_bath, constants);
  out.gamma_total = out.gamma_bulk + out.gamma_surface + out.gamma_gd;
  return out;
}

inline RelaxationBreakdown relaxation_rate(const SensorConfig& config, const PhysicsModel& model) {
  return relaxation_rate(config, model.gd_bath, model.defect_bath, model.constants);
}

/// Analytic derivative of the Gd relaxation rate with respect to the c-DNA
/// surface density n (s^-1 nm^2).
///
/// With x = rho*n the Gd spin density, gamma_gd = ge^2 P I x S(R(x)) and
///   d gamma_gd / dn = ge^2 P I rho [S(R) + S'(R) c_R sqrt(x) / 2].
/// At n = 0 the second term vanishes, leaving the linear coefficient with S(R0).
inline double dgamma_dn(const SensorConfig& config, const SpinBathParams& gd_bath,
                        const PhysicalConstants& c) {
  config.validate();
  const double rho = config.gd_per_cdna;
  const double x = rho * config.gd_density;
  const double geom = shell_inverse_r6_integral(config.nv_offset, config.gd_shell_radius() + gd_bath.standoff);
  const double rate = fluctuation_rate(x, gd_bath);
  double spectral = lorentzian_psd(rate, c.omega0);
  if (x > 0.0) spectral += lorentzian_psd_slope(rate, c.omega0) * gd_bath.rate_density_coeff * std::sqrt(x) / 2.0;
  return c.gamma_e * c.gamma_e * c.dipolar_prefactor * geom * rho * spectral;
}

inline double dgamma_dn(const SensorConfig& config, const PhysicsModel& model) {
  return dgamma_dn(config, model.gd_bath, model.constants);
}

}  // namespace nvsense
