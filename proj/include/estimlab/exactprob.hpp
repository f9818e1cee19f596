#pragma once

// Exact rational evaluation of the closed-form probabilities: Gaussian
// coefficients, the rank law of uniform random matrices over F_q, and the
// learnability / estimability constants built from it. No floating point is
// used here except in to_double at the reporting boundary.

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace estimlab::exactprob {

using BigInt = mpz_class;
using Rational = mpq_class;

/// q^e for any integer exponent, exactly.
Rational power(std::uint32_t q, long e);

/// Gaussian binomial [nn choose k]_q; zero when k > nn.
BigInt gaussian_coeff(unsigned nn, unsigned k, std::uint32_t q);

/// R_q(n1, n2, r): probability that an n1 x n2 matrix with i.i.d. uniform
/// entries over F_q has rank r. Zero for r outside [0, min(n1, n2)].
Rational rank_prob(std::uint32_t q, unsigned n1, unsigned n2, unsigned r);

/// prod_{k < min} (1 - q^{k - max}).
Rational full_rank_prob(std::uint32_t q, unsigned n1, unsigned n2);

/// P(a fixed nonzero vector of F_q^{n+1} lies in a uniformly random k-dimensional
/// row space) = (q^k - 1) / (q^{n+1} - 1).
Rational span_given_rank(std::uint32_t q, unsigned n, unsigned k);

/// Failure probability of any ERM biased to Lin_{q,0}(d,n) over the family
/// realizable by that subclass.
Rational delta_learn(std::uint32_t q, unsigned n);

/// P(A(S) != f) for an A_0 learner over the two-class family Lin_{q,0} u Lin_{q,1}.
Rational beta_nonlearn(std::uint32_t q, unsigned n);

/// 1 - P(e_1 in the row span of the n x (n+1) reduced input matrix).
Rational gamma_tv(std::uint32_t q, unsigned n);

/// F(q, n): the non-estimability confidence for linearly biased ERMs.
Rational eta_F(std::uint32_t q, unsigned n);

/// Failure probability of the optimal binary estimator at error level 1/4,
/// sum_{k=0}^{m} 2^{k-m-1} R_2(n, m+1, k) with m = min(n, d-1). Needs 1 <= n <= d.
Rational parity_estimator_fail(unsigned d, unsigned n);

/// P(rank(X^-) = n and e_1 not spanned) for q = 2.
Rational prob_e_minus(unsigned n);

/// Parameters of the two-class linear instance of the trade-off.
struct TheoryParams {
  std::uint32_t q;
  unsigned d;
  unsigned n;
  Rational alpha;    // supremum (q-1)/q of admissible accuracy levels
  Rational beta;     // beta_nonlearn
  Rational gamma;    // gamma_tv
  Rational delta;    // delta_learn
  Rational epsilon;  // learning accuracy on H_0 (exact learning: 0)
  Rational nu;       // (alpha - epsilon) / 2
  Rational eta;      // gamma/2 - (1 - beta T/T1 + delta (1 + T0/T1)) / 2
  BigInt t0, t1, t;  // q^n, q^n, 2 q^n
};

/// Requires 1 <= n <= d - 1.
TheoryParams lin_theory(std::uint32_t q, unsigned d, unsigned n);

/// Decimal rendering with `digits` significant digits, rounded half away from zero.
std::string to_decimal(const Rational& x, int digits = 12);
/// Reduced fraction "p/q" (or "p" for integers).
std::string to_fraction(const Rational& x);
double to_double(const Rational& x);

namespace detail {

/// rank_prob with an injectable Gaussian-coefficient routine (self-test fault
/// injection uses this; production code goes through rank_prob).
template <class Gauss>
Rational rank_prob_with(Gauss&& gauss, std::uint32_t q, unsigned n1, unsigned n2, unsigned r) {
  if (r > n1 || r > n2) return Rational(0);
  Rational sum(0);
  for (unsigned l = 0; l <= r; ++l) {
    const long j = static_cast<long>(r - l);
    const long e = static_cast<long>(n1) * (static_cast<long>(l) - static_cast<long>(n2)) +
                   j * (j - 1) / 2;
    Rational term = Rational(gauss(r, l, q)) * power(q, e);
    if ((r - l) % 2 == 1) term = -term;
    sum += term;
  }
  Rational out = Rational(gauss(n2, r, q)) * sum;
  out.canonicalize();
  return out;
}

}  // namespace detail

}  // namespace estimlab::exactprob
