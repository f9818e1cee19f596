#pragma once

// Lin_q(d): linear functionals x -> a.x over F_q^d, biased subclasses cut out by
// one affine constraint on a set of active coordinates, and consistent sets.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "estimlab/exactprob.hpp"
#include "estimlab/ffmat.hpp"
#include "estimlab/rng.hpp"

namespace estimlab::linclass {

using ffmat::Elem;
using ffmat::FieldMatrix;
using ffmat::FieldVector;
using ffmat::PrimeField;
using exactprob::BigInt;
using exactprob::Rational;

inline constexpr std::size_t kDefaultEnumerationGuard = std::size_t{1} << 20;

struct LinearHypothesis {
  FieldVector coeffs;

  std::size_t dim() const noexcept { return coeffs.dim(); }
  bool operator==(const LinearHypothesis&) const = default;
  auto operator<=>(const LinearHypothesis& o) const noexcept { return coeffs <=> o.coeffs; }
};

Elem evaluate(const LinearHypothesis& h, const FieldVector& x);

/// Exact 0-1 risk of h under the uniform marginal labeled by f: 0 or 1 - 1/q.
Rational population_risk(const LinearHypothesis& f, const LinearHypothesis& h);

/// {a in F_q^d : a_j = 0 off `active`, and sigma . a_active = kappa if constrained}.
class SubclassSpec {
 public:
  /// Lin_q(d).
  static SubclassSpec full(PrimeField field, std::size_t d);
  /// Lin_{q,i}(d): a_1 = i.
  static SubclassSpec lin_i(PrimeField field, std::size_t d, Elem i);
  /// Lin_{q,i}(d,n): a_1 = i, coordinates n+2..d zero. Needs n + 1 <= d.
  static SubclassSpec lin_i_n(PrimeField field, std::size_t d, std::size_t n, Elem i);
  /// Lin_q(d,n): coordinates beyond min(n+1, d) zero.
  static SubclassSpec ambient_n(PrimeField field, std::size_t d, std::size_t n);
  /// sigma has one entry per active coordinate and must be nonzero.
  static SubclassSpec general(PrimeField field, std::size_t d, FieldVector sigma, Elem kappa,
                              std::vector<std::size_t> active);

  const PrimeField& field() const noexcept { return field_; }
  std::size_t d() const noexcept { return d_; }
  const std::vector<std::size_t>& active() const noexcept { return active_; }
  bool constrained() const noexcept { return sigma_.has_value(); }
  const FieldVector& sigma() const { return *sigma_; }
  Elem kappa() const noexcept { return kappa_; }
  /// Index into active() of the coordinate eliminated by the constraint.
  std::size_t pivot() const noexcept { return pivot_; }

  /// log_q of the cardinality.
  std::size_t dim() const noexcept { return active_.size() - (constrained() ? 1 : 0); }
  BigInt cardinality() const;
  bool contains(const LinearHypothesis& h) const;

  /// Same active set, constraint dropped.
  SubclassSpec ambient() const;
  /// Same constraint with kappa + delta.
  SubclassSpec shifted(Elem delta) const;

  std::string describe() const;

  bool operator==(const SubclassSpec& o) const {
    return field_ == o.field_ && d_ == o.d_ && active_ == o.active_ && sigma_ == o.sigma_ &&
           kappa_ == o.kappa_;
  }

 private:
  SubclassSpec(PrimeField field, std::size_t d, std::vector<std::size_t> active,
               std::optional<FieldVector> sigma, Elem kappa);

  PrimeField field_;
  std::size_t d_;
  std::vector<std::size_t> active_;
  std::optional<FieldVector> sigma_;
  Elem kappa_;
  std::size_t pivot_ = 0;
};

/// The biased class used when nothing else is specified: Lin_{q,0}(d,n) for
/// n < d, and the whole of Lin_q(d) at n = d.
SubclassSpec canonical_bias(PrimeField field, std::size_t d, std::size_t n);

struct LabeledSample {
  FieldMatrix inputs;  // n x d
  FieldVector labels;  // length n

  std::size_t size() const noexcept { return inputs.rows(); }
};

LabeledSample label_sample(FieldMatrix inputs, const LinearHypothesis& f);
bool is_consistent(const LinearHypothesis& h, const LabeledSample& s);
/// Exact empirical 0-1 loss.
Rational empirical_loss(const LinearHypothesis& h, const LabeledSample& s);

/// Input matrix restricted to the subclass's active coordinates (X^- for Lin_{q,i}(d,n)).
FieldMatrix active_columns(const FieldMatrix& x, const SubclassSpec& sub);

/// Columns x_j - (sigma_j / sigma_p) x_p for active j != p; for sigma = e_1 this is
/// X with column 1 and the columns beyond n+1 dropped. Unconstrained subclasses
/// return active_columns.
FieldMatrix reduced_matrix(const FieldMatrix& x, const SubclassSpec& sub);

/// True iff sigma lies in the row span of the active input columns.
bool constraint_spanned(const FieldMatrix& x, const SubclassSpec& sub);

/// base + span(directions); all vectors are full length d.
struct AffineCoset {
  FieldVector base;
  std::vector<FieldVector> directions;

  BigInt count() const;
  bool contains(const FieldVector& v) const;
  FieldVector sample(Rng& rng) const;
  /// All members, ordered lexicographically.
  std::vector<FieldVector> enumerate(std::size_t guard = kDefaultEnumerationGuard) const;
};

std::optional<AffineCoset> consistent_coset(const LabeledSample& s, const SubclassSpec& sub);

/// Throws Unrealizable when s has no consistent function in sub.ambient().
BigInt consistent_count(const LabeledSample& s, const SubclassSpec& sub);

std::vector<LinearHypothesis> enumerate_consistent(const LabeledSample& s, const SubclassSpec& sub,
                                                   std::size_t guard = kDefaultEnumerationGuard);

/// Uniform over the consistent set; throws Unrealizable if it is empty.
LinearHypothesis sample_consistent(const LabeledSample& s, const SubclassSpec& sub, Rng& rng);

/// Uniform member of the subclass.
LinearHypothesis sample_uniform(const SubclassSpec& sub, Rng& rng);

/// Every member, lexicographic. Throws GuardExceeded above the guard.
std::vector<LinearHypothesis> enumerate_subclass(const SubclassSpec& sub,
                                                 std::size_t guard = kDefaultEnumerationGuard);

}  // namespace estimlab::linclass
