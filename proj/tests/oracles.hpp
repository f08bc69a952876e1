#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call the closed forms they are checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "nvsense/classifier.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/rng.hpp"

namespace oracle {

using nvsense::RngStream;
using nvsense::StreamTag;

/// Squared distance from (0, 0, a) to a uniform random point on the sphere of radius rs.
inline double random_r2(RngStream& rng, double a, double rs) {
  const double z = 2.0 * rng.uniform01() - 1.0;
  return rs * rs + a * a - 2.0 * a * rs * z;
}

/// Shell area times the mean of 1/r^6 over uniform surface points. The axial
/// coordinate z (uniform on [-1, 1] for a uniform surface point) is drawn
/// stratified, one jittered sample per stratum, to tame the 1/r^6 tail.
inline double mc_shell_integral(double a, double rs, std::size_t samples, std::uint64_t seed) {
  RngStream rng(seed, StreamTag::test_oracle, 0);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = -1.0 + 2.0 * (static_cast<double>(i) + rng.uniform01()) / static_cast<double>(samples);
    const double r2 = rs * rs + a * a - 2.0 * a * rs * z;
    sum += 1.0 / (r2 * r2 * r2);
  }
  return 4.0 * std::numbers::pi * rs * rs * sum / static_cast<double>(samples);
}

/// floor(n 4 pi rs^2) point spins on the shell, prefactor / r^6 summed per spin,
/// averaged over independent placements.
inline double discrete_spin_msq(double density, double a, double rs, double prefactor, int placements,
                                std::uint64_t seed) {
  const auto spins = static_cast<int>(std::floor(density * 4.0 * std::numbers::pi * rs * rs));
  double total = 0.0;
  for (int p = 0; p < placements; ++p) {
    RngStream rng(seed, StreamTag::test_oracle, static_cast<std::uint64_t>(p));
    double b2 = 0.0;
    for (int s = 0; s < spins; ++s) {
      const double r2 = random_r2(rng, a, rs);
      b2 += prefactor / (r2 * r2 * r2);
    }
    total += b2;
  }
  return total / placements;
}

inline nvsense::SensorConfig random_sensor(RngStream& rng) {
  nvsense::SensorConfig s;
  s.diameter = 6.0 + 50.0 * rng.uniform01();
  s.nv_offset = 0.9 * s.radius() * rng.uniform01();
  s.gd_standoff = 0.3 + 3.0 * rng.uniform01();
  s.gd_density = 0.3 * rng.uniform01();
  s.defect_density = 2.0 * rng.uniform01();
  s.t1_bulk = 1e-3 + 5e-3 * rng.uniform01();
  return s;
}

inline double central_difference_dgamma(nvsense::SensorConfig s, const nvsense::PhysicsModel& m, double h) {
  const double n = s.gd_density;
  s.gd_density = n + h;
  const double up = nvsense::relaxation_rate(s, m).gamma_gd;
  s.gd_density = n - h;
  const double down = nvsense::relaxation_rate(s, m).gamma_gd;
  return (up - down) / (2.0 * h);
}

struct ScanResult {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
};

/// Exhaustive scan of evenly spaced thresholds over [min, max] of the pooled
/// values, counting errors directly with the rule PL < t => negative.
inline ScanResult scan_threshold(std::span<const double> negative, std::span<const double> positive,
                                 std::size_t candidates) {
  double lo = negative[0];
  double hi = negative[0];
  for (double v : negative) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : positive) lo = std::min(lo, v), hi = std::max(hi, v);
  std::vector<double> neg(negative.begin(), negative.end());
  std::vector<double> pos(positive.begin(), positive.end());
  std::sort(neg.begin(), neg.end());
  std::sort(pos.begin(), pos.end());
  ScanResult best{lo, -1.0};
  for (std::size_t i = 0; i < candidates; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(candidates - 1);
    const auto fn = std::lower_bound(pos.begin(), pos.end(), t) - pos.begin();
    const auto fp = neg.end() - std::lower_bound(neg.begin(), neg.end(), t);
    const double ba = 1.0 - 0.5 * (static_cast<double>(fn) / static_cast<double>(pos.size()) +
                                   static_cast<double>(fp) / static_cast<double>(neg.size()));
    if (ba > best.balanced_accuracy) best = {t, ba};
  }
  return best;
}

/// Two overlapping Gaussian samples, negative class lower.
inline void overlapping_population(std::uint64_t seed, std::size_t count, std::vector<double>& negative,
                                   std::vector<double>& positive) {
  RngStream rng(seed, StreamTag::test_oracle, 0);
  negative.resize(count);
  positive.resize(count);
  const double shift = 0.5 + 2.0 * rng.uniform01();
  const double width = 0.5 + rng.uniform01();
  for (std::size_t i = 0; i < count; ++i) {
    // Box-Muller
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    negative[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    positive[i] = shift + width * r * std::sin(2.0 * std::numbers::pi * u2);
  }
}

}  // namespace oracle
