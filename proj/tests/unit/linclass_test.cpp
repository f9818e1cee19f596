#include <gtest/gtest.h>

#include <map>

#include "estimlab/errors.hpp"
#include "estimlab/linclass.hpp"
#include "estimlab/oracles.hpp"
#include "test_support.hpp"

using namespace estimlab;
using namespace estimlab::linclass;
using testutil::q_;
using testutil::vec;

namespace {

LinearHypothesis hyp(const PrimeField& f, std::vector<Elem> a) { return {vec(f, std::move(a))}; }

SubclassSpec random_general(const PrimeField& f, std::size_t d, Rng& rng) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < d; ++j)
    if (rng.coin() || j == 0) active.push_back(j);
  std::vector<Elem> sigma(active.size());
  do {
    for (auto& s : sigma) s = static_cast<Elem>(rng.uniform_below(f.order()));
  } while (std::all_of(sigma.begin(), sigma.end(), [](Elem e) { return e == 0; }));
  return SubclassSpec::general(f, d, vec(f, sigma), static_cast<Elem>(rng.uniform_below(f.order())), active);
}

}  // namespace

TEST(Evaluate, Examples) {
  PrimeField f(3);
  EXPECT_EQ(evaluate(hyp(f, {0, 0}), vec(f, {2, 1})), 0u);
  EXPECT_EQ(evaluate(hyp(f, {1, 0}), vec(f, {2, 1})), 2u);
  EXPECT_EQ(evaluate(hyp(f, {1, 2}), vec(f, {2, 2})), 0u);
  EXPECT_THROW(evaluate(hyp(f, {1, 2}), vec(f, {2})), std::invalid_argument);
}

TEST(PopulationRisk, Examples) {
  PrimeField f3(3), f2(2);
  EXPECT_EQ(population_risk(hyp(f3, {1, 0}), hyp(f3, {1, 0})), 0);
  EXPECT_EQ(population_risk(hyp(f3, {1, 0}), hyp(f3, {1, 1})), q_(2, 3));
  for (const auto& a : enumerate_subclass(SubclassSpec::full(f2, 3)))
    for (const auto& b : enumerate_subclass(SubclassSpec::full(f2, 3)))
      if (!(a == b)) EXPECT_EQ(population_risk(a, b), q_(1, 2));
}

TEST(PopulationRisk, EqualsDisagreementFraction) {
  for (std::uint32_t q : {2u, 3u}) {
    PrimeField f(q);
    for (std::size_t d = 1; d <= 3; ++d) {
      const auto all = enumerate_subclass(SubclassSpec::full(f, d));
      for (const auto& a : all) {
        for (const auto& b : all) {
          unsigned long dis = 0;
          for (const auto& x : all) dis += evaluate(a, x.coeffs) != evaluate(b, x.coeffs);
          Rational want(dis, static_cast<unsigned long>(all.size()));
          want.canonicalize();
          EXPECT_EQ(population_risk(a, b), want);
        }
      }
    }
  }
}

TEST(TwoPointRisk, AllPairsOfLinThree2) {
  EXPECT_EQ(oracles::agreement_max_deviation(3, 2), 0);
  PrimeField f(3);
  const auto all = enumerate_subclass(SubclassSpec::full(f, 2));
  ASSERT_EQ(all.size(), 9u);
  for (const auto& a : all)
    for (const auto& b : all)
      if (!(a == b)) EXPECT_EQ(population_risk(a, b), q_(2, 3));
}

TEST(SubclassSpec, Shapes) {
  PrimeField f(3);
  const auto s = SubclassSpec::lin_i_n(f, 6, 3, 2);
  EXPECT_EQ(s.active(), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.cardinality(), 27);
  EXPECT_TRUE(s.contains(hyp(f, {2, 1, 0, 2, 0, 0})));
  EXPECT_FALSE(s.contains(hyp(f, {1, 1, 0, 2, 0, 0})));
  EXPECT_FALSE(s.contains(hyp(f, {2, 1, 0, 2, 1, 0})));
  EXPECT_EQ(s.shifted(1).kappa(), 0u);
  EXPECT_EQ(s.ambient(), SubclassSpec::ambient_n(f, 6, 3));
  EXPECT_EQ(SubclassSpec::ambient_n(f, 3, 3).dim(), 3u);
  EXPECT_EQ(canonical_bias(f, 4, 4), SubclassSpec::full(f, 4));
  EXPECT_EQ(canonical_bias(f, 5, 4), SubclassSpec::lin_i_n(f, 5, 4, 0));
  EXPECT_THROW(SubclassSpec::lin_i_n(f, 3, 3, 0), std::invalid_argument);
  EXPECT_THROW(SubclassSpec::general(f, 3, vec(f, {0, 0}), 1, {0, 2}), std::invalid_argument);
}

TEST(ReducedMatrix, DropsFirstAndTrailingColumns) {
  PrimeField f(5);
  Rng rng(3);
  const auto x = ffmat::random_matrix(f, 4, 7, rng);
  const std::vector<std::size_t> kept{1, 2, 3};  // columns 2..n+1 for n = 3
  EXPECT_EQ(reduced_matrix(x, SubclassSpec::lin_i_n(f, 7, 3, 4)), x.select_columns(kept));
  const std::vector<std::size_t> act{0, 1, 2, 3};
  EXPECT_EQ(active_columns(x, SubclassSpec::lin_i_n(f, 7, 3, 4)), x.select_columns(act));
  EXPECT_EQ(reduced_matrix(x, SubclassSpec::full(f, 7)), x);
}

TEST(ConsistentCount, Examples) {
  PrimeField f(2);
  for (std::uint32_t q : {2u, 3u}) {
    PrimeField g(q);
    const LabeledSample empty{FieldMatrix(g, 0, 5), ffmat::FieldVector(g, 0)};
    for (Elem i = 0; i < q; ++i)
      EXPECT_EQ(consistent_count(empty, SubclassSpec::lin_i_n(g, 5, 3, i)), BigInt(q * q * q));
  }
  const LabeledSample s1{FieldMatrix::from_rows(f, {{1, 0, 0}}), vec(f, {0})};
  EXPECT_TRUE(constraint_spanned(s1.inputs, SubclassSpec::lin_i_n(f, 3, 1, 0)));
  EXPECT_EQ(consistent_count(s1, SubclassSpec::lin_i_n(f, 3, 1, 0)), 2);
  EXPECT_EQ(consistent_count(s1, SubclassSpec::lin_i_n(f, 3, 1, 1)), 0);

  const LabeledSample s2{FieldMatrix::from_rows(f, {{0, 1, 0}}), vec(f, {1})};
  EXPECT_FALSE(constraint_spanned(s2.inputs, SubclassSpec::lin_i_n(f, 3, 1, 0)));
  EXPECT_EQ(consistent_count(s2, SubclassSpec::lin_i_n(f, 3, 1, 0)), 1);
  EXPECT_EQ(consistent_count(s2, SubclassSpec::lin_i_n(f, 3, 1, 1)), 1);
  for (Elem i = 0; i < 2; ++i) {
    EXPECT_EQ(enumerate_consistent(s1, SubclassSpec::lin_i_n(f, 3, 1, i)),
              oracles::brute_consistent(s1, SubclassSpec::lin_i_n(f, 3, 1, i)));
  }
}

TEST(ConsistentCount, UnrealizableSampleThrows) {
  PrimeField f(2);
  const LabeledSample bad{FieldMatrix::from_rows(f, {{1, 0, 0}, {1, 0, 0}}), vec(f, {0, 1})};
  EXPECT_THROW(consistent_count(bad, SubclassSpec::lin_i_n(f, 3, 1, 0)), Unrealizable);
  Rng rng(1);
  EXPECT_THROW(sample_consistent(bad, SubclassSpec::full(f, 3), rng), Unrealizable);
}

TEST(EnumerateConsistent, GuardIsEnforced) {
  PrimeField f(2);
  const LabeledSample empty{FieldMatrix(f, 0, 30), ffmat::FieldVector(f, 0)};
  EXPECT_THROW(enumerate_consistent(empty, SubclassSpec::full(f, 30)), GuardExceeded);
  EXPECT_EQ(consistent_count(empty, SubclassSpec::full(f, 30)), BigInt(1) << 30);
  EXPECT_THROW(enumerate_subclass(SubclassSpec::full(f, 30)), GuardExceeded);
}

TEST(SampleConsistent, SingletonAndUniformPair) {
  PrimeField f(2);
  Rng rng(9);
  const auto truth = hyp(f, {1, 0, 1});
  const LabeledSample full = label_sample(FieldMatrix::identity(f, 3), truth);
  for (int t = 0; t < 50; ++t) EXPECT_EQ(sample_consistent(full, SubclassSpec::full(f, 3), rng), truth);

  const LabeledSample two = label_sample(FieldMatrix::from_rows(f, {{0, 1, 0}, {0, 0, 1}}), truth);
  ASSERT_EQ(consistent_count(two, SubclassSpec::full(f, 3)), 2);
  std::map<std::vector<Elem>, int> freq;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const auto h = sample_consistent(two, SubclassSpec::full(f, 3), rng);
    ASSERT_TRUE(is_consistent(h, two));
    ++freq[{h.coeffs.values().begin(), h.coeffs.values().end()}];
  }
  ASSERT_EQ(freq.size(), 2u);
  for (const auto& [k, c] : freq) {
    EXPECT_GE(c, 0.47 * n);
    EXPECT_LE(c, 0.53 * n);
  }
}

TEST(EmpiricalLoss, CountsMislabels) {
  PrimeField f(3);
  const auto truth = hyp(f, {1, 2});
  const auto s = label_sample(FieldMatrix::from_rows(f, {{1, 0}, {0, 1}, {1, 1}}), truth);
  EXPECT_EQ(empirical_loss(truth, s), 0);
  EXPECT_EQ(empirical_loss(hyp(f, {1, 0}), s), q_(2, 3));
}

// Consistent-set counting law on random realizable samples.
TEST(CountingLaw, RandomInstancesAgreeWithEnumeration) {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const std::uint32_t q = rng.coin() ? 2 : 3;
    PrimeField f(q);
    const std::size_t d = 2 + rng.uniform_below(5);                 // d <= 6
    const std::size_t n = 1 + rng.uniform_below(std::min<std::size_t>(4, d - 1));  // n <= 4, n < d
    const std::size_t m = rng.uniform_below(n + 1);
    const auto truth = sample_uniform(SubclassSpec::ambient_n(f, d, n), rng);
    const auto s = label_sample(ffmat::random_matrix(f, m, d, rng), truth);
    const auto ref = SubclassSpec::lin_i_n(f, d, n, 0);
    const auto k = ffmat::rank(reduced_matrix(s.inputs, ref));
    const bool spanned = constraint_spanned(s.inputs, ref);
    EXPECT_EQ(spanned, oracles::span_contains(active_columns(s.inputs, ref), ref.sigma()));
    std::size_t holders = 0;
    BigInt total(0);
    for (Elem i = 0; i < q; ++i) {
      const auto sub = SubclassSpec::lin_i_n(f, d, n, i);
      const auto count = consistent_count(s, sub);
      ASSERT_EQ(count, BigInt(static_cast<unsigned long>(oracles::brute_consistent(s, sub).size())));
      if (count > 0) {
        ++holders;
        EXPECT_EQ(Rational(count), exactprob::power(q, static_cast<long>(n) - static_cast<long>(k)));
      }
      total += count;
    }
    EXPECT_EQ(holders, spanned ? 1u : q);
    EXPECT_EQ(total, consistent_count(s, SubclassSpec::ambient_n(f, d, n)));
  }
}

TEST(GeneralBias, CosetMatchesBruteForce) {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t q = rng.coin() ? 2 : 3;
    PrimeField f(q);
    const std::size_t d = 2 + rng.uniform_below(3);
    const auto sub = random_general(f, d, rng);
    const auto truth = sample_uniform(SubclassSpec::full(f, d), rng);
    const auto s = label_sample(ffmat::random_matrix(f, rng.uniform_below(d + 1), d, rng), truth);
    const auto brute = oracles::brute_consistent(s, sub);
    const auto coset = consistent_coset(s, sub);
    if (brute.empty()) {
      EXPECT_FALSE(coset.has_value());
      continue;
    }
    ASSERT_TRUE(coset.has_value());
    EXPECT_EQ(coset->count(), BigInt(static_cast<unsigned long>(brute.size())));
    EXPECT_EQ(enumerate_consistent(s, sub), brute);
    const auto h = sample_consistent(s, sub, rng);
    EXPECT_TRUE(sub.contains(h));
    EXPECT_TRUE(is_consistent(h, s));
    // One class of each shift holds the ambient consistent set between them.
    BigInt sum(0);
    for (Elem i = 0; i < q; ++i) {
      const auto c = consistent_coset(s, sub.shifted(i));
      if (c) sum += c->count();
    }
    EXPECT_EQ(sum, consistent_count(s, sub.ambient()));
  }
}

TEST(SampleUniform, StaysInsideSubclass) {
  PrimeField f(5);
  Rng rng(8);
  const auto sub = SubclassSpec::lin_i_n(f, 6, 3, 2);
  for (int t = 0; t < 200; ++t) EXPECT_TRUE(sub.contains(sample_uniform(sub, rng)));
}
