#pragma once

#include <cmath>
#include <numbers>

#include "nvsense/errors.hpp"

namespace nvsense {

namespace si {
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double mu0_over_4pi = 1.00000000055e-7;  // T m / A
inline constexpr double electron_gyromagnetic = 1.76085963023e11;  // rad s^-1 T^-1
inline constexpr double m6_to_nm6 = 1e54;
}  // namespace si

/// Physical constants used by the relaxation model.
///
/// Internal units: lengths in nm, rates in s^-1, angular frequencies in
/// rad s^-1, fields in T. `dipolar_prefactor` is stored in T^2 nm^6 so that
/// prefactor * density[nm^-2] * integral[nm^-4] is a mean-square field in T^2.
struct PhysicalConstants {
  double gamma_e = si::electron_gyromagnetic;
  double gamma_gd = si::electron_gyromagnetic;
  double spin_gd = 3.5;
  double omega0 = 2.0 * std::numbers::pi * 2.87e9;
  double kappa_angular = 2.0 / 3.0;
  double dipolar_prefactor = prefactor_for(si::electron_gyromagnetic, 3.5, 2.0 / 3.0);

  /// (mu0/4pi)^2 (hbar gamma)^2 S(S+1) kappa, converted to T^2 nm^6.
  static double prefactor_for(double gamma_gd, double spin, double kappa) {
    const double moment = si::mu0_over_4pi * si::hbar * gamma_gd;
    return moment * moment * spin * (spin + 1.0) * kappa * si::m6_to_nm6;
  }

  /// Constants with the prefactor recomputed from the other fields.
  static PhysicalConstants make(double gamma_e, double gamma_gd, double spin_gd, double omega0,
                                double kappa_angular) {
    PhysicalConstants c;
    c.gamma_e = gamma_e;
    c.gamma_gd = gamma_gd;
    c.spin_gd = spin_gd;
    c.omega0 = omega0;
    c.kappa_angular = kappa_angular;
    c.dipolar_prefactor = prefactor_for(gamma_gd, spin_gd, kappa_angular);
    c.validate();
    return c;
  }

  void validate() const {
    if (!(gamma_e > 0)) throw ValidationError("physics.gamma_e", "must be > 0");
    if (!(gamma_gd > 0)) throw ValidationError("physics.gamma_gd", "must be > 0");
    if (!(spin_gd > 0)) throw ValidationError("physics.spin_gd", "must be > 0");
    if (!(omega0 > 0)) throw ValidationError("physics.omega0", "must be > 0");
    if (!(kappa_angular > 0)) throw ValidationError("physics.kappa_angular", "must be > 0");
    const double expected = prefactor_for(gamma_gd, spin_gd, kappa_angular);
    if (!(std::abs(dipolar_prefactor - expected) <= 1e-12 * expected))
      throw ValidationError("physics.dipolar_prefactor", "inconsistent with its factors");
  }

  bool operator==(const PhysicalConstants&) const = default;
};

}  // namespace nvsense
