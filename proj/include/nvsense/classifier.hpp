#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "nvsense/errors.hpp"
#include "nvsense/parallel.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/readout.hpp"
#include "nvsense/rng.hpp"
#include "nvsense/sampling.hpp"

namespace nvsense {

/// Virus-absent (Gd attached, "negative") and virus-present ("positive") PL samples.
struct PlPopulation {
  std::vector<double> values_negative;
  std::vector<double> values_positive;
  std::size_t group_size = 1;
  bool noisy = false;
  std::size_t dropped = 0;  ///< trailing sensors that did not fill a group
};

/// Rates at one threshold. Rule: PL < threshold => negative.
struct ThresholdResult {
  double threshold = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double balanced_accuracy = 0.5;
  bool degenerate = false;  ///< no threshold beats chance
};

struct ShotNoiseBounds {
  double fnr_worst = 0.0;
  double fpr_worst = 0.0;
  double fnr_best = 0.0;
  double fpr_best = 0.0;
};

struct ClassificationReport {
  double threshold = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double balanced_accuracy = 0.5;
  double fnr_worst = 0.0;
  double fpr_worst = 0.0;
  double fnr_best = 0.0;
  double fpr_best = 0.0;
  bool degenerate = false;
};

/// Rates of the fixed rule at an arbitrary threshold.
inline ThresholdResult rates_at(std::span<const double> negative, std::span<const double> positive,
                                double threshold) {
  const auto fn = std::count_if(positive.begin(), positive.end(), [&](double v) { return v < threshold; });
  const auto fp = std::count_if(negative.begin(), negative.end(), [&](double v) { return v >= threshold; });
  ThresholdResult r;
  r.threshold = threshold;
  r.fnr = static_cast<double>(fn) / static_cast<double>(positive.size());
  r.fpr = static_cast<double>(fp) / static_cast<double>(negative.size());
  r.balanced_accuracy = 1.0 - 0.5 * (r.fnr + r.fpr);
  return r;
}

/// Threshold maximizing balanced accuracy over midpoints of adjacent distinct
/// pooled values. Ties go to lower FNR, then to the lower threshold. When no
/// midpoint beats chance the pooled median is returned and flagged.
inline ThresholdResult optimize_threshold(std::span<const double> negative, std::span<const double> positive) {
  if (negative.empty() || positive.empty())
    throw ValidationError("population", "both classes must be non-empty");

  std::vector<std::pair<double, bool>> pooled;  // (value, is_positive)
  pooled.reserve(negative.size() + positive.size());
  for (double v : negative) pooled.emplace_back(v, false);
  for (double v : positive) pooled.emplace_back(v, true);
  std::sort(pooled.begin(), pooled.end());

  const auto n_neg = static_cast<std::int64_t>(negative.size());
  const auto n_pos = static_cast<std::int64_t>(positive.size());
  // BA = 1 - (fn/n_pos + fp/n_neg)/2, so minimize fn*n_neg + fp*n_pos exactly in integers.
  std::int64_t best_cost = n_neg * n_pos;  // chance level
  std::int64_t best_fn = 0;
  std::int64_t best_fp = 0;
  double best_threshold = 0.0;
  bool found = false;

  std::int64_t pos_below = 0;
  std::int64_t neg_below = 0;
  for (std::size_t j = 0; j + 1 < pooled.size(); ++j) {
    (pooled[j].second ? pos_below : neg_below) += 1;
    if (!(pooled[j].first < pooled[j + 1].first)) continue;
    const std::int64_t fn = pos_below;
    const std::int64_t fp = n_neg - neg_below;
    const std::int64_t cost = fn * n_neg + fp * n_pos;
    if (cost < best_cost || (found && cost == best_cost && fn < best_fn)) {
      best_cost = cost;
      best_fn = fn;
      best_fp = fp;
      best_threshold = 0.5 * (pooled[j].first + pooled[j + 1].first);
      found = true;
    }
  }

  if (!found) {
    const std::size_t m = pooled.size();
    const double median =
        m % 2 == 1 ? pooled[m / 2].first : 0.5 * (pooled[m / 2 - 1].first + pooled[m / 2].first);
    ThresholdResult r = rates_at(negative, positive, median);
    r.degenerate = true;
    return r;
  }
  ThresholdResult r;
  r.threshold = best_threshold;
  r.fnr = static_cast<double>(best_fn) / static_cast<double>(n_pos);
  r.fpr = static_cast<double>(best_fp) / static_cast<double>(n_neg);
  r.balanced_accuracy = 1.0 - 0.5 * (r.fnr + r.fpr);
  return r;
}

inline ThresholdResult optimize_threshold(const PlPopulation& pop) {
  return optimize_threshold(pop.values_negative, pop.values_positive);
}

namespace detail {

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline std::vector<double> shifted(std::span<const double> v, double by) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x += by;
  return out;
}

}  // namespace detail

/// Worst/best-case rates when shot noise moves each class mean by one group
/// standard deviation s = sqrt(pl_mean / (k N)), N the photons of one full
/// measurement: toward the other class (worst) or away from it (best).
/// Both cases are scored at `threshold`, the noiseless optimum, so that
/// worst >= noiseless >= best holds for FNR and FPR individually.
inline ShotNoiseBounds shot_noise_bounds(const PlPopulation& pop_noiseless, const ReadoutParams& readout,
                                         std::size_t group_size, double threshold) {
  if (pop_noiseless.noisy) throw ValidationError("population", "shot-noise bounds need a noiseless population");
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  const double budget = static_cast<double>(group_size) * readout.photons_per_reading();
  const double s_neg = std::sqrt(detail::mean_of(pop_noiseless.values_negative) / budget);
  const double s_pos = std::sqrt(detail::mean_of(pop_noiseless.values_positive) / budget);

  const auto worst = rates_at(detail::shifted(pop_noiseless.values_negative, +s_neg),
                              detail::shifted(pop_noiseless.values_positive, -s_pos), threshold);
  const auto best = rates_at(detail::shifted(pop_noiseless.values_negative, -s_neg),
                             detail::shifted(pop_noiseless.values_positive, +s_pos), threshold);
  return {worst.fnr, worst.fpr, best.fnr, best.fpr};
}

inline ShotNoiseBounds shot_noise_bounds(const PlPopulation& pop_noiseless, const ReadoutParams& readout,
                                         std::size_t group_size) {
  return shot_noise_bounds(pop_noiseless, readout, group_size, optimize_threshold(pop_noiseless).threshold);
}

/// Optimized threshold plus shot-noise bounds for a noiseless population.
inline ClassificationReport classify(const PlPopulation& pop_noiseless, const ReadoutParams& readout) {
  const auto t = optimize_threshold(pop_noiseless);
  const auto b = shot_noise_bounds(pop_noiseless, readout, pop_noiseless.group_size, t.threshold);
  return {t.threshold, t.fnr, t.fpr, t.balanced_accuracy, b.fnr_worst, b.fpr_worst, b.fnr_best, b.fpr_best,
          t.degenerate};
}

/// Per-sensor PL of both classes (full detachment for the positive class).
struct SensorPl {
  std::vector<SensorConfig> sensors;
  std::vector<double> negative;
  std::vector<double> positive;
};

inline SensorPl per_sensor_pl(const EnsembleSpec& spec, const PhysicsModel& model, const ReadoutParams& readout,
                              bool noisy, std::size_t workers = 1) {
  spec.validate();
  readout.validate();
  SensorPl out;
  out.sensors.resize(spec.count);
  out.negative.resize(spec.count);
  out.positive.resize(spec.count);
  parallel_for(spec.count, workers, [&](std::size_t i) {
    const SensorConfig s = sample_sensor(spec, i);
    out.sensors[i] = s;
    SensorConfig detached = s;
    detached.gd_density = 0.0;
    const double g_neg = relaxation_rate(s, model).gamma_total;
    const double g_pos = relaxation_rate(detached, model).gamma_total;
    if (noisy) {
      RngStream neg_rng(spec.seed, StreamTag::shot_noise_negative, i);
      RngStream pos_rng(spec.seed, StreamTag::shot_noise_positive, i);
      out.negative[i] = pl_measured(g_neg, readout, neg_rng);
      out.positive[i] = pl_measured(g_pos, readout, pos_rng);
    } else {
      out.negative[i] = pl_expected(g_neg, readout);
      out.positive[i] = pl_expected(g_pos, readout);
    }
  });
  return out;
}

/// Means over consecutive blocks of `group_size`; the trailing remainder is dropped.
inline std::vector<double> group_means(std::span<const double> values, std::size_t group_size) {
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  const std::size_t groups = values.size() / group_size;
  std::vector<double> out(groups);
  for (std::size_t g = 0; g < groups; ++g)
    out[g] = detail::mean_of(values.subspan(g * group_size, group_size));
  return out;
}

inline PlPopulation group_population(const SensorPl& per_sensor, std::size_t group_size, bool noisy) {
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  if (per_sensor.negative.size() < group_size)
    throw ValidationError("group_size", "exceeds the number of sensors; population would be empty");
  PlPopulation pop;
  pop.values_negative = group_means(per_sensor.negative, group_size);
  pop.values_positive = group_means(per_sensor.positive, group_size);
  pop.group_size = group_size;
  pop.noisy = noisy;
  pop.dropped = per_sensor.negative.size() % group_size;
  return pop;
}

/// Two-class PL population of `group_size`-ND averages.
inline PlPopulation build_population(const EnsembleSpec& spec, const PhysicsModel& model,
                                     const ReadoutParams& readout, std::size_t group_size, bool noisy,
                                     std::size_t workers = 1) {
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  if (spec.count < group_size)
    throw ValidationError("group_size", "exceeds ensemble.count; population would be empty");
  return group_population(per_sensor_pl(spec, model, readout, noisy, workers), group_size, noisy);
}

// ---------------------------------------------------------------------------
// RNA load

enum class Allocation {
  /// Copies land on binding sites drawn without replacement from the group's
  /// pooled sites (multivariate hypergeometric per ND).
  pooled_hypergeometric,
};

struct RnaLoadSpec {
  std::uint64_t copies = 0;
  Allocation allocation = Allocation::pooled_hypergeometric;
};

struct LoadCurvePoint {
  std::uint64_t copies = 0;
  std::size_t group_size = 1;
  ClassificationReport report;
};

/// c-DNA binding sites on one sensor: round(n rho 4 pi (d/2 + l)^2).
inline std::uint64_t binding_sites(const SensorConfig& s) {
  const double r = s.gd_shell_radius();
  return static_cast<std::uint64_t>(std::llround(s.gd_density * s.gd_per_cdna * 4.0 * std::numbers::pi * r * r));
}

/// Noiseless group populations, one per load. Within each group of
/// `group_size` consecutive sensors the pooled sites are put in one random
/// order per group; a load of V copies detaches the first min(V, sites) of
/// them. Detachment is therefore nested across loads. Sensor i keeps density
/// n_i (1 - v_i / M_i).
inline std::vector<PlPopulation> load_populations(const EnsembleSpec& spec, const PhysicsModel& model,
                                                  const ReadoutParams& readout, std::size_t group_size,
                                                  std::span<const RnaLoadSpec> loads, std::size_t workers = 1) {
  spec.validate();
  readout.validate();
  if (group_size < 1) throw ValidationError("group_size", "must be >= 1");
  if (spec.count < group_size)
    throw ValidationError("group_size", "exceeds ensemble.count; population would be empty");

  const std::size_t groups = spec.count / group_size;
  const std::size_t n_loads = loads.size();
  std::vector<double> neg(groups);
  std::vector<double> pos(groups * n_loads);  // [load][group]

  parallel_for(groups, workers, [&](std::size_t g) {
    std::vector<SensorConfig> sensors(group_size);
    std::vector<std::uint64_t> sites(group_size);
    std::vector<std::uint32_t> labels;
    double neg_sum = 0.0;
    for (std::size_t j = 0; j < group_size; ++j) {
      sensors[j] = sample_sensor(spec, g * group_size + j);
      sites[j] = binding_sites(sensors[j]);
      labels.insert(labels.end(), sites[j], static_cast<std::uint32_t>(j));
      neg_sum += pl_with_residual(sensors[j], model, readout, 1.0);
    }
    neg[g] = neg_sum / static_cast<double>(group_size);

    RngStream rng(spec.seed, StreamTag::load_assignment, g);
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(labels[i - 1], labels[pick(rng)]);
    }

    std::vector<std::uint64_t> taken(group_size);
    for (std::size_t v = 0; v < n_loads; ++v) {
      std::fill(taken.begin(), taken.end(), 0);
      const auto used = static_cast<std::size_t>(std::min<std::uint64_t>(loads[v].copies, labels.size()));
      for (std::size_t s = 0; s < used; ++s) ++taken[labels[s]];
      double sum = 0.0;
      for (std::size_t j = 0; j < group_size; ++j) {
        const double residual =
            sites[j] == 0 ? 1.0 : 1.0 - static_cast<double>(taken[j]) / static_cast<double>(sites[j]);
        sum += pl_with_residual(sensors[j], model, readout, residual);
      }
      pos[v * groups + g] = sum / static_cast<double>(group_size);
    }
  });

  std::vector<PlPopulation> out(n_loads);
  for (std::size_t v = 0; v < n_loads; ++v) {
    out[v].values_negative = neg;
    out[v].values_positive.assign(pos.begin() + static_cast<std::ptrdiff_t>(v * groups),
                                  pos.begin() + static_cast<std::ptrdiff_t>((v + 1) * groups));
    out[v].group_size = group_size;
    out[v].dropped = spec.count % group_size;
  }
  return out;
}

/// FNR/FPR with shot-noise bounds against RNA copy number.
inline std::vector<LoadCurvePoint> fnr_fpr_vs_copies(const EnsembleSpec& spec, const PhysicsModel& model,
                                                     const ReadoutParams& readout, std::size_t group_size,
                                                     std::span<const RnaLoadSpec> loads, std::size_t workers = 1) {
  const auto pops = load_populations(spec, model, readout, group_size, loads, workers);
  std::vector<LoadCurvePoint> out;
  out.reserve(pops.size());
  for (std::size_t v = 0; v < pops.size(); ++v) out.push_back({loads[v].copies, group_size, classify(pops[v], readout)});
  return out;
}

}  // namespace nvsense
