#pragma once

// Brute-force reference computations for small instances. Nothing here uses
// Gaussian elimination or the closed forms: ranks come from counting the
// vectors in a row span, consistent sets from scanning the whole class, and
// learner probabilities from explicit enumeration of every (f, X) pair.

#include <cstdint>
#include <functional>
#include <vector>

#include "estimlab/exactprob.hpp"
#include "estimlab/linclass.hpp"

namespace estimlab::oracles {

using exactprob::Rational;

/// log_q |rowspan(m)|, by listing every combination of rows.
std::size_t span_rank(const ffmat::FieldMatrix& m);
/// v in rowspan(m), by listing every combination of rows.
bool span_contains(const ffmat::FieldMatrix& m, const ffmat::FieldVector& v);

/// Frequencies of each rank over all q^{n1 n2} matrices.
std::vector<Rational> exhaustive_rank_law(std::uint32_t q, std::size_t n1, std::size_t n2);

/// Every member of `sub` that labels the sample correctly, scanning all of F_q^d.
std::vector<linclass::LinearHypothesis> brute_consistent(const linclass::LabeledSample& s,
                                                         const linclass::SubclassSpec& sub);

/// Max over f != h in Lin_q(d) of |agreement fraction - 1/q|, by scanning F_q^d.
Rational agreement_max_deviation(std::uint32_t q, std::size_t d);

/// Exact probabilities for the canonical biased learner, obtained by
/// enumerating every ground truth in Lin_{q,0}(n+1,n) u Lin_{q,1}(n+1,n) and
/// every n x (n+1) input matrix.
struct JointLaw {
  Rational learner_error_d0;    // P(A(S) != f), f ~ D0
  Rational learner_error_d01;   // P(A(S) != f), f ~ D0 u D1
  Rational spanned;             // P(e_1 in rowspan(X^-))
  Rational det_fail_d01;        // optimal deterministic estimator, epsilon = 1/4, c = 1/2
  Rational rand_fail_d01;       // E_- estimator, epsilon = 1/4, c = 1/2
};

JointLaw joint_law(std::uint32_t q, std::size_t n);

}  // namespace estimlab::oracles
