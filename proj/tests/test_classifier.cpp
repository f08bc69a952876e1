#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "nvsense/classifier.hpp"
#include "oracles.hpp"

using namespace nvsense;

namespace {

double sample_sd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / (v.size() - 1));
}

std::vector<RnaLoadSpec> loads(std::initializer_list<std::uint64_t> copies) {
  std::vector<RnaLoadSpec> out;
  for (auto c : copies) out.push_back({c, Allocation::pooled_hypergeometric});
  return out;
}

}  // namespace

TEST(Threshold, SeparablePointMasses) {
  const std::vector<double> neg(50, 0.8);
  const std::vector<double> pos(70, 0.9);
  const auto r = optimize_threshold(neg, pos);
  EXPECT_DOUBLE_EQ(r.threshold, 0.85);
  EXPECT_EQ(r.fnr, 0.0);
  EXPECT_EQ(r.fpr, 0.0);
  EXPECT_EQ(r.balanced_accuracy, 1.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Threshold, IdenticalClassesAreChance) {
  std::vector<double> neg, pos;
  oracle::overlapping_population(1, 500, neg, pos);
  const auto r = optimize_threshold(neg, neg);
  EXPECT_EQ(r.balanced_accuracy, 0.5);
  EXPECT_TRUE(r.degenerate);
}

TEST(Threshold, TiesPreferLowerFnr) {
  // midpoints 0.5 and 2.5 both misclassify one sample of each class-size weight
  const std::vector<double> neg{0.0, 2.0};
  const std::vector<double> pos{1.0, 3.0};
  const auto r = optimize_threshold(neg, pos);
  EXPECT_DOUBLE_EQ(r.threshold, 0.5);
  EXPECT_EQ(r.fnr, 0.0);
  EXPECT_EQ(r.fpr, 0.5);
}

TEST(Threshold, RejectsEmptyClass) {
  const std::vector<double> some{1.0};
  EXPECT_THROW(optimize_threshold(std::vector<double>{}, some), ValidationError);
}

TEST(Threshold, MatchesExhaustiveScan) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<double> neg, pos;
    oracle::overlapping_population(1000 + seed, 10000, neg, pos);
    const auto r = optimize_threshold(neg, pos);
    const auto scan = oracle::scan_threshold(neg, pos, 100000);
    EXPECT_NEAR(r.balanced_accuracy, scan.balanced_accuracy, 1e-4) << "seed " << seed;
    EXPECT_GE(r.balanced_accuracy, scan.balanced_accuracy - 1e-12);
    const auto check = rates_at(neg, pos, r.threshold);
    EXPECT_DOUBLE_EQ(check.balanced_accuracy, r.balanced_accuracy);
  }
}

TEST(Population, GroupSizeEqualToCountGivesOneSample) {
  EnsembleSpec spec;
  spec.count = 64;
  const auto pop = build_population(spec, PhysicsModel{}, ReadoutParams{}, 64, false);
  EXPECT_EQ(pop.values_negative.size(), 1u);
  EXPECT_EQ(pop.values_positive.size(), 1u);
  EXPECT_THROW(build_population(spec, PhysicsModel{}, ReadoutParams{}, 65, false), ValidationError);
}

TEST(Population, SingleSensorsAreExpectedPl) {
  EnsembleSpec spec;
  spec.count = 40;
  const PhysicsModel m;
  const ReadoutParams r;
  const auto pop = build_population(spec, m, r, 1, false);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const auto pair = virus_pair_pl(sample_sensor(spec, i), m, r);
    EXPECT_EQ(pop.values_negative[i], pair.no_virus);
    EXPECT_EQ(pop.values_positive[i], pair.with_virus);
  }
}

TEST(Population, RemainderIsDropped) {
  EnsembleSpec spec;
  spec.count = 103;
  const auto pop = build_population(spec, PhysicsModel{}, ReadoutParams{}, 10, false);
  EXPECT_EQ(pop.values_negative.size(), 10u);
  EXPECT_EQ(pop.dropped, 3u);
}

TEST(Population, NegativeClassHasLowerMean) {
  const auto pop = build_population(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 1, false);
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  EXPECT_LT(mean(pop.values_negative), mean(pop.values_positive));
}

TEST(Population, GroupSpreadFollowsCentralLimit) {
  const auto per = per_sensor_pl(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, false);
  const double sd1 = sample_sd(group_population(per, 1, false).values_negative);
  const double sd10 = sample_sd(group_population(per, 10, false).values_negative);
  EXPECT_NEAR(sd10 / (sd1 / std::sqrt(10.0)), 1.0, 0.15);
}

TEST(Population, NoisyIndependentOfWorkers) {
  EnsembleSpec spec;
  spec.count = 500;
  const auto a = build_population(spec, PhysicsModel{}, ReadoutParams{}, 1, true, 1);
  const auto b = build_population(spec, PhysicsModel{}, ReadoutParams{}, 1, true, 8);
  EXPECT_EQ(a.values_negative, b.values_negative);
  EXPECT_EQ(a.values_positive, b.values_positive);
}

TEST(ShotNoiseBounds, OrderedAroundNoiseless) {
  for (std::size_t k : {1u, 10u}) {
    const auto pop = build_population(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, k, false);
    const auto rep = classify(pop, ReadoutParams{});
    EXPECT_GE(rep.fnr_worst, rep.fnr);
    EXPECT_GE(rep.fpr_worst, rep.fpr);
    EXPECT_LE(rep.fnr_best, rep.fnr);
    EXPECT_LE(rep.fpr_best, rep.fpr);
  }
}

TEST(ShotNoiseBounds, VanishWithInfinitePhotons) {
  const auto pop = build_population(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 1, false);
  ReadoutParams bright;
  bright.photons_per_meas = 1e30;
  const auto rep = classify(pop, bright);
  EXPECT_EQ(rep.fnr_worst, rep.fnr);
  EXPECT_EQ(rep.fnr_best, rep.fnr);
  EXPECT_EQ(rep.fpr_worst, rep.fpr);
  EXPECT_EQ(rep.fpr_best, rep.fpr);
}

TEST(ShotNoiseBounds, GapShrinksWithGroupSize) {
  const ReadoutParams r;
  const auto gap = [&](std::size_t k) {
    const auto rep = classify(build_population(EnsembleSpec{}, PhysicsModel{}, r, k, false), r);
    return (rep.fnr_worst - rep.fnr_best) + (rep.fpr_worst - rep.fpr_best);
  };
  EXPECT_LT(gap(10), gap(1));
}

TEST(ShotNoiseBounds, RequiresNoiselessPopulation) {
  EnsembleSpec spec;
  spec.count = 20;
  const auto pop = build_population(spec, PhysicsModel{}, ReadoutParams{}, 1, true);
  EXPECT_THROW(shot_noise_bounds(pop, ReadoutParams{}, 1), ValidationError);
}

TEST(RnaLoad, ZeroCopiesIsDegenerate) {
  const auto grid = loads({0});
  const auto curve = fnr_fpr_vs_copies(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 10, grid);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_TRUE(curve[0].report.degenerate);
  EXPECT_NEAR(curve[0].report.balanced_accuracy, 0.5, 1e-12);
  EXPECT_GE(curve[0].report.fnr, 0.5 - 1e-12);
}

TEST(RnaLoad, SaturationMatchesFullDetachment) {
  const EnsembleSpec spec;
  for (std::size_t k : {1u, 10u}) {
    const auto curve = fnr_fpr_vs_copies(spec, PhysicsModel{}, ReadoutParams{}, k, loads({100000000}));
    const auto full = classify(build_population(spec, PhysicsModel{}, ReadoutParams{}, k, false), ReadoutParams{});
    EXPECT_DOUBLE_EQ(curve[0].report.threshold, full.threshold);
    EXPECT_EQ(curve[0].report.fnr, full.fnr);
    EXPECT_EQ(curve[0].report.fpr, full.fpr);
    EXPECT_EQ(curve[0].report.fnr_worst, full.fnr_worst);
  }
}

TEST(RnaLoad, FnrNonIncreasingInCopies) {
  const auto curve = fnr_fpr_vs_copies(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 10,
                                       loads({100, 1000, 10000, 100000}));
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].report.fnr, curve[i - 1].report.fnr);
}

TEST(RnaLoad, NestedDetachmentRaisesEveryGroup) {
  const auto grid = loads({0, 50, 100, 200, 300, 500, 1000, 2000, 5000});
  EnsembleSpec spec;
  spec.count = 2000;
  const auto pops = load_populations(spec, PhysicsModel{}, ReadoutParams{}, 10, grid);
  EXPECT_EQ(pops.front().values_positive, pops.front().values_negative);
  for (std::size_t v = 1; v < pops.size(); ++v) {
    for (std::size_t g = 0; g < pops[v].values_positive.size(); ++g)
      EXPECT_GE(pops[v].values_positive[g], pops[v - 1].values_positive[g]);
    // any fixed threshold: FNR cannot rise with the load
    for (double t : {0.978, 0.98, 0.982})
      EXPECT_LE(rates_at(pops[v].values_negative, pops[v].values_positive, t).fnr,
                rates_at(pops[v - 1].values_negative, pops[v - 1].values_positive, t).fnr);
  }
}

TEST(RnaLoad, EnsembleHelpsAtFullDetachment) {
  const auto one = optimize_threshold(build_population(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 1, false));
  const auto ten = optimize_threshold(build_population(EnsembleSpec{}, PhysicsModel{}, ReadoutParams{}, 10, false));
  EXPECT_LE(ten.fnr, one.fnr);
  EXPECT_GE(ten.balanced_accuracy, one.balanced_accuracy);
  EXPECT_GE(ten.balanced_accuracy, 0.99);
  EXPECT_LE(ten.fnr, 0.01);
}

TEST(RnaLoad, BindingSites) {
  SensorConfig s;
  s.diameter = 20;
  s.gd_standoff = 1;
  s.gd_density = 0.1;
  // 0.1 * 4 pi 11^2 = 152.05
  EXPECT_EQ(binding_sites(s), 152u);
  s.gd_per_cdna = 2;
  EXPECT_EQ(binding_sites(s), 304u);
}
