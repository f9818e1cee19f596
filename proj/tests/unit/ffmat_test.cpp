#include <gtest/gtest.h>

#include <array>
#include <set>

#include "estimlab/exactprob.hpp"
#include "estimlab/ffmat.hpp"
#include "estimlab/oracles.hpp"
#include "test_support.hpp"

using namespace estimlab;
using namespace estimlab::ffmat;
using testutil::vec;

TEST(PrimeField, RejectsComposites) {
  for (std::uint32_t q : {0u, 1u, 4u, 6u, 9u, 15u, 49u}) {
    try {
      PrimeField f(q);
      FAIL() << q;
    } catch (const std::invalid_argument& e) {
      EXPECT_NE(std::string(e.what()).find("q must be prime"), std::string::npos);
    }
  }
  for (std::uint32_t q : {2u, 3u, 5u, 7u, 11u, 101u, 65521u}) EXPECT_NO_THROW(PrimeField{q});
}

TEST(PrimeField, ArithmeticStaysInRange) {
  for (std::uint32_t q : {2u, 3u, 5u, 11u}) {
    PrimeField f(q);
    for (Elem a = 0; a < q; ++a) {
      EXPECT_EQ(f.add(a, f.neg(a)), 0u);
      if (a != 0) EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
      for (Elem b = 0; b < q; ++b) {
        EXPECT_LT(f.add(a, b), q);
        EXPECT_LT(f.sub(a, b), q);
        EXPECT_LT(f.mul(a, b), q);
        EXPECT_EQ(f.add(f.sub(a, b), b), a);
      }
    }
    EXPECT_THROW(f.inv(0), std::domain_error);
    EXPECT_EQ(f.reduce(-1), q - 1);
  }
}

TEST(FieldVector, RejectsOutOfRangeEntries) {
  PrimeField f(3);
  EXPECT_THROW(FieldVector(f, std::vector<Elem>{0, 3}), std::out_of_range);
  EXPECT_THROW(FieldMatrix(f, 1, 2, {1, 5}), std::out_of_range);
  EXPECT_THROW(vec(f, {1, 2}).dot(vec(f, {1})), std::invalid_argument);
}

TEST(Rank, SmallExamples) {
  EXPECT_EQ(rank(FieldMatrix::identity(PrimeField(5), 3)), 3u);
  EXPECT_EQ(rank(FieldMatrix(PrimeField(2), 2, 4)), 0u);
  const auto m = FieldMatrix::from_rows(PrimeField(2), {{1, 1}, {1, 1}});
  EXPECT_EQ(rank(m), 1u);
  EXPECT_EQ(oracles::span_rank(m), 1u);
  EXPECT_EQ(rank(FieldMatrix(PrimeField(3), 0, 4)), 0u);
}

TEST(NullSpace, SmallExamples) {
  EXPECT_TRUE(null_space_basis(FieldMatrix::identity(PrimeField(3), 2)).empty());
  EXPECT_EQ(null_space_basis(FieldMatrix(PrimeField(2), 1, 2)).size(), 2u);

  PrimeField f(2);
  const auto m = FieldMatrix::from_rows(f, {{1, 0, 1}});
  const auto basis = null_space_basis(m);
  ASSERT_EQ(basis.size(), 2u);
  for (const auto& v : basis) EXPECT_EQ(f.add(v[0], v[2]), 0u);
  // The span of the basis is exactly the 4 kernel vectors of F_2^3.
  std::set<std::vector<Elem>> span;
  for (Elem a = 0; a < 2; ++a)
    for (Elem b = 0; b < 2; ++b) {
      const auto v = basis[0].scaled(a).plus(basis[1].scaled(b));
      span.insert({v.values().begin(), v.values().end()});
    }
  std::set<std::vector<Elem>> kernel;
  testutil::for_each_matrix(f, 1, 3, [&](const FieldMatrix& x) {
    const auto v = x.row(0);
    if (m.apply(v).is_zero()) kernel.insert({v.values().begin(), v.values().end()});
  });
  EXPECT_EQ(span, kernel);
}

TEST(SolveParticular, SmallExamples) {
  PrimeField f3(3);
  const auto y = vec(f3, {2, 0, 1});
  EXPECT_EQ(solve_particular(FieldMatrix::identity(f3, 3), y), y);

  PrimeField f2(2);
  EXPECT_FALSE(solve_particular(FieldMatrix(f2, 2, 2), vec(f2, {1, 0})).has_value());

  const auto m = FieldMatrix::from_rows(f3, {{1, 1}});
  const auto sol = solve_particular(m, vec(f3, {2}));
  ASSERT_TRUE(sol.has_value());
  const std::set<std::vector<Elem>> ok{{2, 0}, {0, 2}, {1, 1}};
  EXPECT_TRUE(ok.count({(*sol)[0], (*sol)[1]}));
}

TEST(InRowSpan, SmallExamples) {
  PrimeField f(2);
  const auto m = FieldMatrix::from_rows(f, {{1, 1, 0}, {0, 1, 1}});
  EXPECT_TRUE(in_row_span(m, m.row(0)));
  EXPECT_TRUE(in_row_span(m, vec(f, {1, 0, 1})));
  EXPECT_FALSE(in_row_span(m, vec(f, {1, 0, 0})));
  EXPECT_FALSE(in_row_span(FieldMatrix(f, 2, 3), vec(f, {0, 0, 1})));
  EXPECT_TRUE(in_row_span(FieldMatrix(f, 0, 3), vec(f, {0, 0, 0})));
}

TEST(RandomMatrix, DeterministicForSeed) {
  PrimeField f(7);
  Rng a(42), b(42), c(43);
  const auto ma = random_matrix(f, 5, 6, a);
  EXPECT_EQ(ma, random_matrix(f, 5, 6, b));
  EXPECT_NE(ma, random_matrix(f, 5, 6, c));
  for (Elem v : ma.data()) EXPECT_LT(v, 7u);
}

TEST(RandomMatrix, RankFrequencies) {
  const std::uint64_t n = 100000;
  Rng rng(5);
  std::uint64_t full22 = 0, nz = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    full22 += rank(random_matrix(PrimeField(2), 2, 2, rng)) == 2;
    nz += rank(random_matrix(PrimeField(3), 1, 1, rng)) == 1;
  }
  EXPECT_TRUE(testutil::within_3sigma(full22, n, 6.0 / 16));
  EXPECT_TRUE(testutil::within_3sigma(nz, n, 2.0 / 3));
}

// Property checks over random matrices.

TEST(RankProperty, RankNullityAndOracleAgree) {
  Rng rng(17);
  for (int t = 0; t < 400; ++t) {
    const std::uint32_t q = std::array<std::uint32_t, 3>{2, 3, 5}[rng.uniform_below(3)];
    PrimeField f(q);
    const std::size_t r = 1 + rng.uniform_below(4), c = 1 + rng.uniform_below(4);
    const auto m = random_matrix(f, r, c, rng);
    const auto k = rank(m);
    EXPECT_EQ(k + null_space_basis(m).size(), c);
    EXPECT_EQ(k, oracles::span_rank(m));
    EXPECT_EQ(rank(m.transposed()), k);
    for (const auto& v : null_space_basis(m)) EXPECT_TRUE(m.apply(v).is_zero());
  }
}

TEST(RankProperty, RowSpanMatchesTransposedSolve) {
  Rng rng(18);
  for (int t = 0; t < 400; ++t) {
    const std::uint32_t q = rng.coin() ? 2 : 3;
    PrimeField f(q);
    const std::size_t r = 1 + rng.uniform_below(3), c = 1 + rng.uniform_below(4);
    const auto m = random_matrix(f, r, c, rng);
    const auto v = random_matrix(f, 1, c, rng).row(0);
    const auto coeffs = solve_particular(m.transposed(), v);
    EXPECT_EQ(in_row_span(m, v), coeffs.has_value());
    EXPECT_EQ(in_row_span(m, v), oracles::span_contains(m, v));
    if (coeffs) EXPECT_EQ(m.transposed().apply(*coeffs), v);
    const auto aff = solve_affine(m.transposed(), v);
    EXPECT_EQ(aff.has_value(), coeffs.has_value());
    if (aff) EXPECT_EQ(aff->kernel.size(), r - rank(m));
  }
}

TEST(RankProperty, ExhaustiveFrequenciesEqualRankLaw) {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    PrimeField f(q);
    for (std::size_t a = 1; a <= 3; ++a) {
      for (std::size_t b = 1; b <= 3; ++b) {
        std::vector<unsigned long> counts(std::min(a, b) + 1, 0);
        unsigned long total = 0;
        testutil::for_each_matrix(f, a, b, [&](const FieldMatrix& m) {
          ++counts[rank(m)];
          ++total;
        });
        for (std::size_t r = 0; r < counts.size(); ++r) {
          exactprob::Rational freq(counts[r], total);
          freq.canonicalize();
          EXPECT_EQ(freq, exactprob::rank_prob(q, a, b, r)) << q << " " << a << "x" << b << " r=" << r;
        }
      }
    }
  }
}
