#include <gtest/gtest.h>

#include <cmath>

#include "estimlab/errors.hpp"
#include "estimlab/expharness.hpp"
#include "test_support.hpp"

using namespace estimlab;
using namespace estimlab::expharness;
using learners::LinFamily;
using testutil::q_;

namespace {

ExperimentConfig lin_cfg(std::uint32_t q, std::size_t d, std::size_t n, LinFamily::Kind fam,
                         EstimatorSpec est, std::uint64_t trials) {
  ffmat::PrimeField f(q);
  ExperimentConfig c{LinSetting{q, d, n, fam}, learners::LinearBiasERM{linclass::canonical_bias(f, d, n)},
                     std::move(est)};
  c.trials = trials;
  c.seed = 11;
  return c;
}

ExperimentConfig shat_cfg(std::size_t d, std::size_t n, learners::LearnerSpec l, EstimatorSpec est,
                          std::uint64_t trials) {
  ExperimentConfig c{ShatteredSetting{d, n}, std::move(l), std::move(est)};
  c.trials = trials;
  c.seed = 12;
  return c;
}

bool same(const TrialRecord& a, const TrialRecord& b) {
  return a.trial == b.trial && a.dist_class == b.dist_class && a.truth_digest == b.truth_digest &&
         a.rank_k == b.rank_k && a.spanned == b.spanned && a.distinct == b.distinct &&
         a.learner_error == b.learner_error && a.output_digest == b.output_digest &&
         a.true_loss == b.true_loss && a.estimate == b.estimate && a.failure == b.failure;
}

}  // namespace

TEST(Wilson, Examples) {
  EXPECT_EQ(wilson_interval(0, 100, 1.96).first, 0.0);
  EXPECT_GT(wilson_interval(0, 100, 1.96).second, 0.0);
  EXPECT_EQ(wilson_interval(100, 100, 1.96).second, 1.0);
  EXPECT_LT(wilson_interval(100, 100, 1.96).first, 1.0);
  const auto [lo, hi] = wilson_interval(50, 100, 1.96);
  EXPECT_NEAR(0.5 - lo, hi - 0.5, 1e-12);
  EXPECT_NEAR(hi - lo, 0.19, 0.01);
  EXPECT_THROW(wilson_interval(3, 2, 1.96), std::invalid_argument);
  EXPECT_TRUE(within_wilson(50, 100, q_(1, 2)));
  EXPECT_FALSE(within_wilson(50, 100, q_(9, 10)));
}

TEST(ZScore, Examples) {
  EXPECT_EQ(z_score(q_(1, 2), q_(1, 2), 100), 0.0);
  EXPECT_NEAR(z_score(q_(55, 100), q_(1, 2), 100), 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(z_score(q_(1, 100), 0, 100)));
}

TEST(Harness, SerialEqualsParallelAndWorkerCountIsIrrelevant) {
  for (auto base : {lin_cfg(2, 8, 6, LinFamily::Kind::D01, estimators::ParityOptimalDet{}, 3000),
                    lin_cfg(3, 5, 3, LinFamily::Kind::D0, estimators::RandomGuess{}, 3000),
                    shat_cfg(20, 10, learners::UniformShatteredERM{}, estimators::EmpiricalLoss{}, 3000)}) {
    const auto ref = run_experiment_serial(base);
    for (unsigned w : {1u, 4u, 16u}) {
      auto c = base;
      c.workers = w;
      const auto got = run_experiment(c);
      ASSERT_EQ(got.records.size(), ref.records.size());
      for (std::size_t i = 0; i < ref.records.size(); ++i) ASSERT_TRUE(same(got.records[i], ref.records[i])) << i;
      EXPECT_EQ(got.summary.failures, ref.summary.failures);
      EXPECT_EQ(got.summary.mean_true_loss, ref.summary.mean_true_loss);
    }
  }
}

TEST(Harness, KeepRecordsOff) {
  auto c = lin_cfg(2, 6, 4, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 100);
  c.keep_records = false;
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.summary.trials, 100u);
}

TEST(Harness, MatchedConstantWithEmpiricalNeverFails) {
  for (auto c : {shat_cfg(20, 10, learners::ConstantERM{}, estimators::EmpiricalLoss{}, 5000),
                 lin_cfg(3, 5, 3, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 5000)}) {
    c.learner = learners::ConstantERM{};
    const auto r = run_experiment(c);
    EXPECT_EQ(r.summary.failures, 0u);
    ASSERT_TRUE(r.summary.theory);
    EXPECT_EQ(*r.summary.theory, 0);
    for (const auto& t : r.records) EXPECT_EQ(t.true_loss, 0);
  }
}

TEST(Harness, LinLossIsTwoPoint) {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    const auto r = run_experiment(lin_cfg(q, 5, 3, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 2000));
    for (const auto& t : r.records) {
      EXPECT_EQ(t.learner_error, t.true_loss != 0);
      EXPECT_TRUE(t.true_loss == 0 || t.true_loss == q_(q - 1, q));
      EXPECT_GE(t.rank_k, 0);
      EXPECT_LE(t.rank_k, 3);
      EXPECT_TRUE(t.spanned == 0 || t.spanned == 1);
    }
  }
}

TEST(Harness, ShatteredLossIsHammingFraction) {
  const auto r = run_experiment(shat_cfg(12, 6, learners::UniformShatteredERM{}, estimators::EmpiricalLoss{}, 2000));
  for (const auto& t : r.records) {
    EXPECT_EQ(Rational(t.true_loss * 12).get_den(), 1);
    EXPECT_LE(t.true_loss, q_(12 - t.distinct, 12));
    EXPECT_GE(t.distinct, 1);
  }
}

TEST(Harness, ParityDetMatchesTheoryAtFullRank) {
  const auto r = run_experiment(lin_cfg(2, 8, 8, LinFamily::Kind::Full, estimators::ParityOptimalDet{}, 100000));
  ASSERT_TRUE(r.summary.theory);
  EXPECT_GT(r.summary.theory->get_d(), 0.32);
  EXPECT_TRUE(within_wilson(r.summary.failures, r.summary.trials, *r.summary.theory)) << r.summary.rate.get_d();
  EXPECT_LT(std::abs(*r.summary.z), 3.0);
}

TEST(Harness, ParityRandFloor) {
  const auto r = run_experiment(lin_cfg(2, 8, 6, LinFamily::Kind::D01, estimators::ParityOptimalRand{}, 20000));
  EXPECT_GE(wilson_interval(r.summary.failures, r.summary.trials, 3.0).second, 0.14);
}

TEST(Harness, ConfigErrorsBeforeTrials) {
  auto ok = lin_cfg(2, 6, 4, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 10);
  auto c = ok;
  c.trials = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = ok;
  c.epsilon = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = ok;
  c.epsilon = 1;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = ok;
  c.workers = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  EXPECT_THROW(run_experiment(lin_cfg(2, 6, 6, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 10)), ConfigError);
  EXPECT_THROW(run_experiment(lin_cfg(4, 6, 4, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 10)),
               std::exception);
  c = ok;
  c.learner = learners::UniformShatteredERM{};
  EXPECT_THROW(run_experiment(c), ConfigError);
  auto s = shat_cfg(8, 4, learners::UniformShatteredERM{}, estimators::ParityOptimalDet{}, 10);
  EXPECT_THROW(run_experiment(s), ConfigError);
  s = shat_cfg(8, 9, learners::UniformShatteredERM{}, estimators::EmpiricalLoss{}, 10);
  EXPECT_THROW(run_experiment(s), ConfigError);
  s = shat_cfg(8, 4, ok.learner, estimators::EmpiricalLoss{}, 10);
  EXPECT_THROW(run_experiment(s), ConfigError);
}

TEST(Tradeoff, ShatteredConstantEstimators) {
  for (const Rational& c : {Rational(0), q_(1, 4)}) {
    auto i1 = shat_cfg(20, 10, learners::ConstantERM{}, estimators::ConstantValue{c}, 20000);
    auto i2 = shat_cfg(20, 10, learners::UniformShatteredERM{}, estimators::ConstantValue{c}, 20000);
    i1.epsilon = i2.epsilon = q_(1, 8);
    const auto rep = tradeoff_report(i1, i2);
    EXPECT_EQ(rep.epsilon_threshold, q_(1, 8));
    EXPECT_TRUE(rep.verdict);
    if (c == 0) {
      EXPECT_EQ(rep.item1.summary.failures, 0u);
      EXPECT_FALSE(rep.item1.violated);
      EXPECT_TRUE(rep.item2.violated);
    } else {
      EXPECT_EQ(rep.item1.summary.failures, rep.item1.summary.trials);
      EXPECT_TRUE(rep.item1.violated);
    }
  }
}

TEST(Tradeoff, MismatchedItemsAreConfigErrors) {
  auto i1 = shat_cfg(20, 10, learners::ConstantERM{}, estimators::EmpiricalLoss{}, 10);
  auto i2 = shat_cfg(20, 10, learners::UniformShatteredERM{}, estimators::ConstantValue{0}, 10);
  EXPECT_THROW(tradeoff_report(i1, i2), ConfigError);
  i2.estimator = estimators::EmpiricalLoss{};
  EXPECT_THROW(tradeoff_report(i2, i1), ConfigError);
  auto l1 = lin_cfg(2, 8, 6, LinFamily::Kind::D01, estimators::EmpiricalLoss{}, 10);
  EXPECT_THROW(tradeoff_report(l1, l1), ConfigError);
  EXPECT_THROW(tradeoff_report(i1, l1), ConfigError);
}

TEST(Tradeoff, LinThresholds) {
  auto i1 = lin_cfg(2, 8, 6, LinFamily::Kind::D0, estimators::ParityOptimalDet{}, 20000);
  auto i2 = lin_cfg(2, 8, 6, LinFamily::Kind::D01, estimators::ParityOptimalDet{}, 20000);
  const auto th = exactprob::lin_theory(2, 8, 6);
  i1.epsilon = i2.epsilon = th.nu;
  const auto rep = tradeoff_report(i1, i2);
  EXPECT_EQ(rep.item1.threshold, th.eta);
  EXPECT_EQ(rep.epsilon_threshold, th.nu);
  EXPECT_TRUE(rep.verdict);
}

TEST(Audit, ZeroAndOneBounds) {
  AuditConfig a{ShatteredSetting{16, 8}, learners::ComplexityFn::zero(), std::nullopt, 2000, 3, 1};
  const auto z = audit_bound(a);
  EXPECT_EQ(z.validity_rate, 0);
  EXPECT_EQ(z.alpha, q_(1, 4));
  EXPECT_EQ(z.epsilon, q_(1, 8));
  a.bound = learners::ComplexityFn::one();
  const auto o = audit_bound(a);
  EXPECT_EQ(o.validity_rate, 1);
  EXPECT_EQ(o.mean_violation, 0);
  for (const auto& [p, v] : o.looseness_quantiles) EXPECT_EQ(v, 1) << p;
  EXPECT_TRUE(o.loose_meets_threshold);

  AuditConfig l{LinSetting{2, 6, 4, LinFamily::Kind::D01}, learners::ComplexityFn::weight(), std::nullopt, 500, 3, 1};
  const auto w = audit_bound(l);
  EXPECT_EQ(w.alpha, q_(1, 4));
  EXPECT_EQ(w.trials, 500u);
  EXPECT_EQ(w.looseness_quantiles.size(), 7u);
}

TEST(RankHistogram, MatchesRankLaw) {
  const std::uint64_t trials = 200000;
  for (auto [q, n1, n2] : {std::tuple{2u, 4ul, 4ul}, {3u, 3ul, 5ul}, {11u, 2ul, 2ul}}) {
    const auto h = rank_histogram(q, n1, n2, trials, 8, 4);
    EXPECT_EQ(h, rank_histogram(q, n1, n2, trials, 8, 1));
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double p = exactprob::rank_prob(q, n1, n2, k).get_d();
      EXPECT_TRUE(testutil::within_3sigma(h[k], trials, p)) << q << ' ' << k;
    }
  }
}

TEST(BuiltinEstimators, Contents) {
  EXPECT_EQ(builtin_estimators(ShatteredSetting{20, 10}).size(), 9u);
  EXPECT_EQ(builtin_estimators(LinSetting{2, 8, 6, LinFamily::Kind::D01}).size(), 11u);
  EXPECT_EQ(builtin_estimators(LinSetting{2, 8, 8, LinFamily::Kind::Full}).size(), 10u);
  EXPECT_EQ(builtin_estimators(LinSetting{3, 8, 6, LinFamily::Kind::D01}).size(), 13u);
}
