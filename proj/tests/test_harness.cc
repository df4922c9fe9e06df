#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "orbitdp/harness.h"
#include "orbitdp/selftest.h"

namespace orbitdp {
namespace {

TEST(Generators, ProjectionSpectrumAndTrace) {
  Rng rng(1);
  const auto id = gen_projection_instance(4, 4, 1.0, rng);
  EXPECT_LE((id.matrix() - ComplexMatrix::Identity(4, 4)).norm(), 1e-10);
  const auto m = gen_projection_instance(4, 2, 3.0, rng);
  const auto ev = eigenvalues(m);
  const std::vector<double> expected{3.0, 3.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-10);
  EXPECT_NEAR(m.matrix().trace().real(), 6.0, 1e-10);
  EXPECT_THROW(gen_projection_instance(4, 2, -1.0, rng), InvalidInputError);
}

TEST(Generators, WishartSingleSampleIsRankOne) {
  Rng rng(2);
  for (int n = 0; n < 20; ++n) {
    const auto m = gen_wishart_instance(5, 1, rng);
    const auto ev = eigenvalues(m);
    EXPECT_NEAR(ev[0], m.matrix().trace().real(), 1e-10);
    EXPECT_LE(std::abs(ev[1]), 1e-10);
  }
}

TEST(Generators, WishartConditioningAndTrace) {
  Rng rng(3);
  constexpr int kTrials = 200;
  std::vector<double> ratio;
  double trace_sum = 0.0;
  for (int n = 0; n < kTrials; ++n) {
    const auto m = gen_wishart_instance(8, 8, rng);
    const auto ev = eigenvalues(m);
    ratio.push_back(ev[0] / ev[3]);
    trace_sum += m.matrix().trace().real();
  }
  EXPECT_LE(oracle::median(ratio), 10.0);
  // Each |X_ij|^2 / m has mean 1 / m and variance 1 / m^2.
  EXPECT_NEAR(trace_sum, 8.0 * kTrials, 3.0 * std::sqrt(8.0 / 8.0 * kTrials));
}

TEST(Generators, WishartScaleOverride) {
  Rng a(4), b(4);
  const auto by_m = gen_wishart_instance(4, 8, a);
  const auto by_d = gen_wishart_instance(4, 8, b, 1.0 / 4.0);
  EXPECT_LE((by_d.matrix() - 2.0 * by_m.matrix()).norm(), 1e-12);
}

TEST(Generators, ConditionedGapSpectrum) {
  const auto s = conditioned_gap_spectrum(4, 4, 6.0);
  EXPECT_EQ(s, (std::vector<double>{6.0, 3.0, 3.0, 2.0}));
  const auto t = conditioned_gap_spectrum(10, 8, 3.0);
  EXPECT_DOUBLE_EQ(t[0] / t[7], 3.0);
  EXPECT_DOUBLE_EQ(t[1] - t[5], 1.5);
  EXPECT_EQ(t[8], 0.0);
  Rng rng(5);
  const auto m = gen_conditioned_gap_instance(4, 4, 6.0, rng);
  const auto ev = eigenvalues(m);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], s[i], 1e-10);
  EXPECT_THROW(conditioned_gap_spectrum(4, 3, 1.0), InvalidInputError);
}

TEST(Quantiles, NearestRank) {
  std::vector<double> v;
  for (int i = 10; i >= 1; --i) v.push_back(i);
  EXPECT_EQ(nearest_rank_quantile(v, 0.5), 5.0);
  EXPECT_EQ(nearest_rank_quantile(v, 0.9), 9.0);
  EXPECT_EQ(nearest_rank_quantile(v, 0.95), 10.0);
  EXPECT_EQ(nearest_rank_quantile(v, 1.0), 10.0);
  EXPECT_EQ(nearest_rank_quantile(v, 0.01), 1.0);
  EXPECT_THROW(nearest_rank_quantile({}, 0.5), InvalidInputError);
  EXPECT_THROW(nearest_rank_quantile(v, 0.0), InvalidInputError);
}

TEST(ExperimentSpecJson, RoundTripAndUnknownKeys) {
  ExperimentSpec s;
  s.scenario = Scenario::kConditionedGap;
  s.d = 6;
  s.k = 4;
  s.epsilon = 0.3;
  s.trials = 17;
  s.seed = 123456789012345ull;
  s.top_eig = 2.5;
  s.sampler.chain_length = 999;
  s.sampler.burn_in = 99;
  const auto back = experiment_spec_from_json(experiment_spec_to_json(s));
  EXPECT_EQ(back.scenario, Scenario::kConditionedGap);
  EXPECT_EQ(back.d, 6);
  EXPECT_EQ(back.k, 4);
  EXPECT_DOUBLE_EQ(back.epsilon, 0.3);
  EXPECT_EQ(back.trials, 17);
  EXPECT_EQ(back.seed, 123456789012345ull);
  EXPECT_DOUBLE_EQ(back.top_eig, 2.5);
  EXPECT_EQ(back.sampler.chain_length, 999);
  EXPECT_EQ(experiment_spec_to_json(back).dump(), experiment_spec_to_json(s).dump());

  Json j = experiment_spec_to_json(s);
  j["delta"] = 0.0;
  EXPECT_THROW(experiment_spec_from_json(j), InvalidInputError);
  EXPECT_THROW(experiment_spec_from_json(Json{{"scenario", "torus"}}), InvalidInputError);
  EXPECT_THROW(experiment_spec_from_json(Json{{"trials", 0}}), InvalidInputError);
  EXPECT_THROW(experiment_spec_from_json(Json{{"k", 5}, {"d", 4}}), InvalidInputError);
}

TEST(ExperimentSpecJson, DefaultMechanismPerScenario) {
  ExperimentSpec s;
  EXPECT_EQ(s.resolved_mechanism(), "algorithm1");
  s.scenario = Scenario::kWishart;
  EXPECT_EQ(s.resolved_mechanism(), "algorithm2");
  s.mechanism = "algorithm1";
  EXPECT_EQ(s.resolved_mechanism(), "algorithm1");
}

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.trials = 20;
  s.seed = 42;
  s.threads = 1;
  s.sampler.chain_length = 3000;
  s.sampler.burn_in = 1000;
  return s;
}

TEST(Experiment, DeterministicForFixedSeed) {
  auto s = small_spec();
  const auto a = run_experiment(s);
  const auto b = run_experiment(s);
  EXPECT_EQ(experiment_result_to_json(a).dump(), experiment_result_to_json(b).dump());
  EXPECT_EQ(experiment_result_to_csv(a), experiment_result_to_csv(b));
  s.threads = 3;
  const auto c = run_experiment(s);
  EXPECT_EQ(experiment_result_to_csv(a), experiment_result_to_csv(c));
  s.seed = 43;
  EXPECT_NE(experiment_result_to_csv(a), experiment_result_to_csv(run_experiment(s)));
}

TEST(Experiment, QuantilesComeFromTrials) {
  const auto r = run_experiment(small_spec());
  std::vector<double> gaps, errs;
  for (const auto& t : r.per_trial) {
    gaps.push_back(t.utility_gap);
    errs.push_back(t.frob_err_sq);
  }
  EXPECT_EQ(r.quantiles.gap_median, nearest_rank_quantile(gaps, 0.5));
  EXPECT_EQ(r.quantiles.gap_upper, nearest_rank_quantile(gaps, 0.9));
  EXPECT_EQ(r.quantiles.frob_median, nearest_rank_quantile(errs, 0.5));
  EXPECT_EQ(r.per_trial.size(), 20u);
  EXPECT_EQ(r.gamma.size(), 4u);
  EXPECT_EQ(r.lambda[0], r.gamma[0]);
  ASSERT_TRUE(r.tau_dominates.has_value());
  EXPECT_TRUE(*r.tau_dominates);
  EXPECT_EQ(r.bounds.d, 4);
}

TEST(Experiment, HugeEpsilonReachesOptimum) {
  auto s = small_spec();
  s.trials = 1;
  s.epsilon = 1e7;
  const auto r = run_experiment(s);
  EXPECT_NEAR(r.quantiles.gap_median, 0.0, 1e-3);
  EXPECT_GE(r.quantiles.gap_median, -1e-9);
}

TEST(Experiment, GapQuantileWithinTailBound) {
  ExperimentSpec s;
  s.d = 4;
  s.k = 2;
  s.epsilon = 1.0;
  s.trials = 200;
  s.seed = 42;
  s.threads = 1;
  const auto r = run_experiment(s);
  EXPECT_LE(r.quantiles.gap_upper, r.bounds.tail_quantile);
  EXPECT_LE(r.quantiles.gap_upper, r.bounds.tau);
}

TEST(Experiment, WishartUsesAlgorithm2) {
  auto s = small_spec();
  s.scenario = Scenario::kWishart;
  s.d = 3;
  s.k = 1;
  const auto r = run_experiment(s);
  EXPECT_EQ(r.mechanism, "algorithm2");
  EXPECT_FALSE(r.tau_dominates.has_value());
  for (const auto& t : r.per_trial) EXPECT_EQ(t.lambda_tilde.size(), 1u);
}

TEST(Audit, BinLayout) {
  ComplexVector u(2);
  u << 1.0, 0.0;
  EXPECT_EQ(audit_bin(u, 24), 22);
  u << 0.0, 1.0;
  EXPECT_EQ(audit_bin(u, 24), 0);
  u << std::sqrt(0.5), Complex(0.0, -std::sqrt(0.5));
  EXPECT_EQ(audit_bin(u, 24), 13);
  EXPECT_THROW(audit_bin(ComplexVector::Zero(3), 24), InvalidInputError);
}

TEST(Audit, IdenticalPairPasses) {
  Rng rng(6);
  const Dataset d(2, {random_unit_vector(2, rng), random_unit_vector(2, rng)});
  const std::vector<NeighborPair> pairs{{"same", d, d}};
  AuditConfig cfg;
  cfg.runs_per_pair = 20000;
  cfg.seed = 7;
  const auto r = audit_privacy(cfg, pairs);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.pairs[0].max_ratio_excess, 1.0);
}

TEST(Audit, AdversarialPairsAreNeighbors) {
  const auto pairs = adversarial_pairs(10);
  ASSERT_EQ(pairs.size(), 10u);
  for (const auto& p : pairs) {
    ASSERT_EQ(p.a.size(), p.b.size());
    int differing = 0;
    for (std::size_t i = 0; i < p.a.size(); ++i) differing += (p.a.points()[i] - p.b.points()[i]).norm() > 0.0;
    EXPECT_EQ(differing, 1) << p.name;
  }
}

TEST(Audit, ValidatesConfig) {
  AuditConfig cfg;
  cfg.bins = 7;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
  cfg = AuditConfig{};
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
}

}  // namespace
}  // namespace orbitdp
