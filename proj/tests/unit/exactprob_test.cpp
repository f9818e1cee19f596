#include <gtest/gtest.h>

#include "estimlab/exactprob.hpp"
#include "estimlab/ffmat.hpp"
#include "estimlab/oracles.hpp"
#include "test_support.hpp"

using namespace estimlab;
using namespace estimlab::exactprob;
using testutil::q_;

namespace {

// Number of k x nn matrices of rank k divided by |GL_k(q)|: the count of
// k-dimensional subspaces, by enumeration.
BigInt subspaces_by_enumeration(unsigned nn, unsigned k, std::uint32_t q) {
  const ffmat::PrimeField f(q);
  unsigned long frames = 0, gl = 0;
  testutil::for_each_matrix(f, k, nn, [&](const ffmat::FieldMatrix& m) { frames += ffmat::rank(m) == k; });
  testutil::for_each_matrix(f, k, k, [&](const ffmat::FieldMatrix& m) { gl += ffmat::rank(m) == k; });
  return BigInt(frames / gl);
}

}  // namespace

TEST(GaussianCoeff, Examples) {
  for (unsigned n = 0; n < 6; ++n) EXPECT_EQ(gaussian_coeff(n, 0, 3), 1);
  EXPECT_EQ(gaussian_coeff(2, 1, 2), 3);
  EXPECT_EQ(gaussian_coeff(3, 1, 3), 13);
  EXPECT_EQ(gaussian_coeff(3, 4, 2), 0);
  EXPECT_EQ(gaussian_coeff(5, 5, 7), 1);
}

TEST(GaussianCoeff, CountsSubspaces) {
  for (std::uint32_t q : {2u, 3u}) {
    for (unsigned nn = 1; nn <= 3; ++nn) {
      for (unsigned k = 1; k <= nn; ++k) {
        EXPECT_EQ(gaussian_coeff(nn, k, q), subspaces_by_enumeration(nn, k, q)) << q << " " << nn << " " << k;
      }
    }
  }
  EXPECT_EQ(gaussian_coeff(4, 2, 2), subspaces_by_enumeration(4, 2, 2));
}

TEST(GaussianCoeff, SymmetricInK) {
  for (unsigned nn = 0; nn <= 10; ++nn)
    for (unsigned k = 0; k <= nn; ++k) EXPECT_EQ(gaussian_coeff(nn, k, 5), gaussian_coeff(nn, nn - k, 5));
}

TEST(RankProb, Examples) {
  EXPECT_EQ(rank_prob(2, 2, 2, 2), q_(3, 8));
  EXPECT_EQ(rank_prob(2, 2, 2, 1), q_(9, 16));
  EXPECT_EQ(rank_prob(2, 2, 2, 0), q_(1, 16));
  for (std::uint32_t q : {2u, 3u, 7u})
    for (unsigned a = 1; a <= 4; ++a)
      for (unsigned b = 1; b <= 4; ++b) EXPECT_EQ(rank_prob(q, a, b, 0), power(q, -static_cast<long>(a * b)));
  EXPECT_EQ(rank_prob(2, 2, 3, 3), 0);
  EXPECT_EQ(rank_prob(2, 2, 3, 7), 0);
}

TEST(RankProb, MatchesEnumeration) {
  for (unsigned a = 1; a <= 3; ++a)
    for (unsigned b = 1; b <= 3; ++b) {
      const auto law = oracles::exhaustive_rank_law(2, a, b);
      for (unsigned r = 0; r < law.size(); ++r) EXPECT_EQ(rank_prob(2, a, b, r), law[r]);
    }
  for (unsigned a = 1; a <= 2; ++a)
    for (unsigned b = 1; b <= 2; ++b) {
      const auto law = oracles::exhaustive_rank_law(3, a, b);
      for (unsigned r = 0; r < law.size(); ++r) EXPECT_EQ(rank_prob(3, a, b, r), law[r]);
    }
}

TEST(RankProb, NormalizedSymmetricAndInUnitInterval) {
  for (std::uint32_t q : {2u, 3u, 5u, 11u}) {
    for (unsigned a = 1; a <= 8; ++a) {
      for (unsigned b = 1; b <= 8; ++b) {
        Rational sum(0);
        for (unsigned r = 0; r <= std::min(a, b); ++r) {
          const Rational p = rank_prob(q, a, b, r);
          EXPECT_GE(p, 0);
          EXPECT_LE(p, 1);
          EXPECT_EQ(p, rank_prob(q, b, a, r));
          sum += p;
        }
        EXPECT_EQ(sum, 1) << q << " " << a << "x" << b;
        EXPECT_EQ(full_rank_prob(q, a, b), rank_prob(q, a, b, std::min(a, b)));
      }
    }
  }
}

TEST(FullRankProb, Examples) {
  EXPECT_EQ(full_rank_prob(2, 2, 2), q_(3, 8));
  for (std::uint32_t q : {2u, 3u, 5u, 101u}) EXPECT_EQ(full_rank_prob(q, 1, 1), q_(q - 1, q));
  EXPECT_EQ(full_rank_prob(2, 1, 2), q_(3, 4));
}

TEST(SpanGivenRank, MatchesEnumeration) {
  // P(e_1 in rowspan X | rank X = k) over all n x (n+1) inputs.
  for (auto [q, n] : {std::pair{2u, 1u}, {2u, 2u}, {2u, 3u}, {3u, 1u}, {3u, 2u}}) {
    const ffmat::PrimeField f(q);
    std::vector<unsigned long> tot(n + 1, 0), hit(n + 1, 0);
    const auto e1 = ffmat::FieldVector::unit(f, n + 1, 0);
    testutil::for_each_matrix(f, n, n + 1, [&](const ffmat::FieldMatrix& x) {
      const auto k = ffmat::rank(x);
      ++tot[k];
      hit[k] += ffmat::in_row_span(x, e1);
    });
    for (unsigned k = 0; k <= n; ++k) {
      Rational p(hit[k], tot[k]);
      p.canonicalize();
      EXPECT_EQ(span_given_rank(q, n, k), p) << q << " " << n << " " << k;
    }
  }
}

TEST(LearnabilityConstants, SmallValues) {
  EXPECT_EQ(delta_learn(2, 1), q_(1, 4));
  EXPECT_EQ(gamma_tv(2, 1), q_(3, 4));
  EXPECT_EQ(prob_e_minus(1), q_(1, 2));
}

TEST(LearnabilityConstants, MatchJointEnumeration) {
  for (auto [q, n] : {std::pair{2u, 1u}, {2u, 2u}, {2u, 3u}, {3u, 1u}, {3u, 2u}}) {
    const auto law = oracles::joint_law(q, n);
    EXPECT_EQ(delta_learn(q, n), law.learner_error_d0) << q << " " << n;
    EXPECT_EQ(beta_nonlearn(q, n), law.learner_error_d01) << q << " " << n;
    EXPECT_EQ(1 - gamma_tv(q, n), law.spanned) << q << " " << n;
    if (q == 2) EXPECT_EQ(parity_estimator_fail(n + 2, n), law.det_fail_d01) << n;
  }
}

TEST(LearnabilityConstants, DeltaIsNondecreasingInN) {
  for (std::uint32_t q : {2u, 3u, 11u}) {
    Rational prev = delta_learn(q, 1);
    for (unsigned n = 2; n <= 30; ++n) {
      const Rational cur = delta_learn(q, n);
      EXPECT_GE(cur, prev) << q << " " << n;
      EXPECT_LT(cur, 1);
      prev = cur;
    }
  }
}

TEST(ParityEstimatorFail, SquareCaseMatchesEnumeration) {
  // n = d, whole class: fails iff X is singular and the uniform ERM still hits f.
  for (unsigned d = 1; d <= 3; ++d) {
    const ffmat::PrimeField f(2);
    Rational acc(0);
    unsigned long total = 0;
    testutil::for_each_matrix(f, d, d, [&](const ffmat::FieldMatrix& x) {
      const auto k = oracles::span_rank(x);
      if (k < d) acc += power(2, static_cast<long>(k) - static_cast<long>(d));
      ++total;
    });
    acc /= Rational(total);
    EXPECT_EQ(parity_estimator_fail(d, d), acc) << d;
  }
}

TEST(ParityEstimatorFail, ExceedsPointThreeTwoFromSix) {
  for (unsigned d = 6; d <= 20; ++d) EXPECT_GT(parity_estimator_fail(d, d), q_(32, 100)) << d;
}

TEST(ProbEMinus, ClosedFormAndEnumeration) {
  for (unsigned n = 1; n <= 64; ++n) {
    const Rational factor = 1 - Rational(power(2, n) - 1) / Rational(power(2, n + 1) - 1);
    EXPECT_EQ(prob_e_minus(n), rank_prob(2, n, n + 1, n) * factor);
    EXPECT_GT(prob_e_minus(n) / 2, q_(7, 50));
    EXPECT_GT(rank_prob(2, n, n + 1, n), q_(57, 100));
  }
  for (unsigned n = 1; n <= 3; ++n) {
    const ffmat::PrimeField f(2);
    const auto e1 = ffmat::FieldVector::unit(f, n + 1, 0);
    unsigned long hit = 0, total = 0;
    testutil::for_each_matrix(f, n, n + 1, [&](const ffmat::FieldMatrix& x) {
      hit += oracles::span_rank(x) == n && !oracles::span_contains(x, e1);
      ++total;
    });
    Rational p(hit, total);
    p.canonicalize();
    EXPECT_EQ(prob_e_minus(n), p);
  }
}

TEST(EtaF, AboveFourTenthsForLargeQ) {
  for (unsigned n = 1; n <= 50; ++n) EXPECT_GT(eta_F(11, n), q_(2, 5)) << n;
}

TEST(EtaF, ScaledGapShrinksAlongQ) {
  Rational prev(-1);
  for (std::uint32_t q : {11u, 31u, 101u}) {
    const Rational gap = abs(eta_F(q, 10) - (Rational(1, 2) - Rational(1, q))) * q;
    if (prev >= 0) EXPECT_LT(gap, prev) << q;
    prev = gap;
  }
}

TEST(EtaF, SmallFieldValueIsReportedNotForced) {
  const Rational eta = eta_F(2, 10);
  EXPECT_GT(eta, 0);
  EXPECT_LT(eta, q_(1, 2));
  EXPECT_EQ(to_decimal(eta, 3), "0.026");
}

TEST(LinTheory, ParametersAreConsistent) {
  for (auto [q, d, n] : {std::tuple{2u, 8u, 6u}, {3u, 5u, 3u}, {11u, 7u, 5u}, {11u, 51u, 50u}}) {
    const auto t = lin_theory(q, d, n);
    EXPECT_EQ(t.alpha, q_(q - 1, q));
    EXPECT_EQ(t.epsilon, 0);
    EXPECT_EQ(t.nu, t.alpha / 2);
    EXPECT_EQ(t.beta, beta_nonlearn(q, n));
    EXPECT_EQ(t.gamma, gamma_tv(q, n));
    EXPECT_EQ(t.delta, delta_learn(q, n));
    EXPECT_EQ(t.t0, power(q, n));
    EXPECT_EQ(t.t, 2 * t.t0);
    EXPECT_EQ(t.eta, eta_F(q, n));
  }
  EXPECT_THROW(lin_theory(2, 4, 4), std::invalid_argument);
}

TEST(Formatting, DecimalRendering) {
  EXPECT_EQ(to_decimal(q_(1, 3)), "0.333333333333");
  EXPECT_EQ(to_decimal(q_(2, 3)), "0.666666666667");
  EXPECT_EQ(to_decimal(q_(1, 2)), "0.5");
  EXPECT_EQ(to_decimal(q_(-1, 8)), "-0.125");
  EXPECT_EQ(to_decimal(Rational(0)), "0");
  EXPECT_EQ(to_decimal(Rational(7)), "7");
  EXPECT_EQ(to_decimal(q_(1, 1000000000)), "1e-9");
  EXPECT_EQ(to_decimal(q_(1, 1000000)), "0.000001");
  EXPECT_EQ(to_decimal(Rational(BigInt("123456789012345", 10))), "1.23456789012e14");
  EXPECT_EQ(to_decimal(Rational(BigInt("9999999999999", 10), BigInt("10000000000000", 10))), "1");
  EXPECT_EQ(to_decimal(q_(5, 8), 1), "0.6");
  EXPECT_EQ(to_fraction(q_(6, 8)), "3/4");
  EXPECT_EQ(to_fraction(Rational(-3)), "-3");
  EXPECT_DOUBLE_EQ(to_double(q_(3, 8)), 0.375);
}
