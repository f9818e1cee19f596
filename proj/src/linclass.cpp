#include "estimlab/linclass.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "estimlab/errors.hpp"

namespace estimlab::linclass {

Elem evaluate(const LinearHypothesis& h, const FieldVector& x) {
  if (h.dim() != x.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  return h.coeffs.dot(x);
}

Rational population_risk(const LinearHypothesis& f, const LinearHypothesis& h) {
  if (f.dim() != h.dim() || !(f.coeffs.field() == h.coeffs.field())) {
    throw std::invalid_argument("population_risk: hypotheses from different classes");
  }
  if (f == h) return Rational(0);
  const std::uint32_t q = f.coeffs.field().order();
  Rational r(q - 1, q);
  r.canonicalize();
  return r;
}

// ------------------------------------------------------------ subclasses

SubclassSpec::SubclassSpec(PrimeField field, std::size_t d, std::vector<std::size_t> active,
                           std::optional<FieldVector> sigma, Elem kappa)
    : field_(field), d_(d), active_(std::move(active)), sigma_(std::move(sigma)), kappa_(kappa) {
  if (d_ == 0) throw std::invalid_argument("subclass: d must be positive");
  if (active_.empty()) throw std::invalid_argument("subclass: no active coordinates");
  std::vector<std::size_t> sorted = active_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= d_) {
    throw std::invalid_argument("subclass: active coordinates must be distinct and < d");
  }
  if (kappa_ >= field_.order()) throw std::out_of_range("subclass: kappa outside [0, q)");
  if (sigma_) {
    if (sigma_->dim() != active_.size()) {
      throw std::invalid_argument("subclass: sigma needs one entry per active coordinate");
    }
    if (sigma_->is_zero()) throw std::invalid_argument("subclass: sigma must be nonzero");
    while ((*sigma_)[pivot_] == 0) ++pivot_;
  }
}

namespace {

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

SubclassSpec SubclassSpec::full(PrimeField field, std::size_t d) {
  return SubclassSpec(field, d, iota_vec(d), std::nullopt, 0);
}

SubclassSpec SubclassSpec::lin_i(PrimeField field, std::size_t d, Elem i) {
  return SubclassSpec(field, d, iota_vec(d), FieldVector::unit(field, d, 0), i);
}

SubclassSpec SubclassSpec::lin_i_n(PrimeField field, std::size_t d, std::size_t n, Elem i) {
  if (n < 1 || n + 1 > d) throw std::invalid_argument("Lin_{q,i}(d,n) needs 1 <= n <= d - 1");
  return SubclassSpec(field, d, iota_vec(n + 1), FieldVector::unit(field, n + 1, 0), i);
}

SubclassSpec SubclassSpec::ambient_n(PrimeField field, std::size_t d, std::size_t n) {
  return SubclassSpec(field, d, iota_vec(std::min(n + 1, d)), std::nullopt, 0);
}

SubclassSpec SubclassSpec::general(PrimeField field, std::size_t d, FieldVector sigma, Elem kappa,
                                   std::vector<std::size_t> active) {
  return SubclassSpec(field, d, std::move(active), std::move(sigma), kappa);
}

BigInt SubclassSpec::cardinality() const {
  BigInt c;
  mpz_ui_pow_ui(c.get_mpz_t(), field_.order(), dim());
  return c;
}

bool SubclassSpec::contains(const LinearHypothesis& h) const {
  if (h.dim() != d_ || !(h.coeffs.field() == field_)) return false;
  std::vector<bool> on(d_, false);
  for (std::size_t j : active_) on[j] = true;
  for (std::size_t j = 0; j < d_; ++j) {
    if (!on[j] && h.coeffs[j] != 0) return false;
  }
  if (!sigma_) return true;
  Elem acc = 0;
  for (std::size_t t = 0; t < active_.size(); ++t) {
    acc = field_.add(acc, field_.mul((*sigma_)[t], h.coeffs[active_[t]]));
  }
  return acc == kappa_;
}

SubclassSpec SubclassSpec::ambient() const {
  return SubclassSpec(field_, d_, active_, std::nullopt, 0);
}

SubclassSpec SubclassSpec::shifted(Elem delta) const {
  if (!sigma_) throw std::logic_error("shifted: subclass has no constraint");
  return SubclassSpec(field_, d_, active_, sigma_, field_.add(kappa_, field_.reduce(delta)));
}

std::string SubclassSpec::describe() const {
  std::ostringstream os;
  os << "q=" << field_.order() << " d=" << d_ << " active=" << active_.size();
  if (sigma_) os << " sigma=" << sigma_->to_string() << " kappa=" << kappa_;
  return os.str();
}

SubclassSpec canonical_bias(PrimeField field, std::size_t d, std::size_t n) {
  if (n < 1 || n > d) throw std::invalid_argument("canonical_bias: need 1 <= n <= d");
  if (n == d) return SubclassSpec::full(field, d);
  return SubclassSpec::lin_i_n(field, d, n, 0);
}

// --------------------------------------------------------------- samples

LabeledSample label_sample(FieldMatrix inputs, const LinearHypothesis& f) {
  FieldVector y = inputs.apply(f.coeffs);
  return LabeledSample{std::move(inputs), std::move(y)};
}

bool is_consistent(const LinearHypothesis& h, const LabeledSample& s) {
  return s.inputs.apply(h.coeffs) == s.labels;
}

Rational empirical_loss(const LinearHypothesis& h, const LabeledSample& s) {
  if (s.size() == 0) return Rational(0);
  const FieldVector pred = s.inputs.apply(h.coeffs);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < s.size(); ++i) wrong += pred[i] != s.labels[i];
  Rational r(static_cast<unsigned long>(wrong), static_cast<unsigned long>(s.size()));
  r.canonicalize();
  return r;
}

FieldMatrix active_columns(const FieldMatrix& x, const SubclassSpec& sub) {
  return x.select_columns(sub.active());
}

FieldMatrix reduced_matrix(const FieldMatrix& x, const SubclassSpec& sub) {
  if (x.cols() != sub.d()) throw std::invalid_argument("reduced_matrix: dimension mismatch");
  if (!sub.constrained()) return active_columns(x, sub);
  const PrimeField& f = sub.field();
  const auto& act = sub.active();
  const std::size_t p = sub.pivot();
  const Elem sp_inv = f.inv(sub.sigma()[p]);
  FieldMatrix out(f, x.rows(), act.size() - 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Elem xp = x.at(r, act[p]);
    std::size_t c = 0;
    for (std::size_t t = 0; t < act.size(); ++t) {
      if (t == p) continue;
      const Elem ratio = f.mul(sub.sigma()[t], sp_inv);
      out.set(r, c++, f.sub(x.at(r, act[t]), f.mul(ratio, xp)));
    }
  }
  return out;
}

bool constraint_spanned(const FieldMatrix& x, const SubclassSpec& sub) {
  if (!sub.constrained()) throw std::logic_error("constraint_spanned: subclass has no constraint");
  return ffmat::in_row_span(active_columns(x, sub), sub.sigma());
}

// ---------------------------------------------------------------- cosets

BigInt AffineCoset::count() const {
  BigInt c;
  mpz_ui_pow_ui(c.get_mpz_t(), base.field().order(), directions.size());
  return c;
}

bool AffineCoset::contains(const FieldVector& v) const {
  if (v.dim() != base.dim()) return false;
  const FieldVector diff = v.plus(base.scaled(base.field().neg(1)));
  if (directions.empty()) return diff.is_zero();
  return ffmat::in_row_span(FieldMatrix::stack(base.field(), base.dim(), directions), diff);
}

FieldVector AffineCoset::sample(Rng& rng) const {
  const PrimeField& f = base.field();
  std::vector<Elem> v(base.values().begin(), base.values().end());
  for (const auto& dir : directions) {
    const Elem c = static_cast<Elem>(rng.uniform_below(f.order()));
    if (c == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f.add(v[j], f.mul(c, dir[j]));
  }
  return FieldVector(f, std::move(v));
}

std::vector<FieldVector> AffineCoset::enumerate(std::size_t guard) const {
  if (count() > BigInt(static_cast<unsigned long>(guard))) {
    throw GuardExceeded("consistent set has " + count().get_str() +
                        " members, above the enumeration guard; use the counting or sampling path");
  }
  const PrimeField& f = base.field();
  const std::size_t k = directions.size();
  std::vector<FieldVector> out;
  std::vector<Elem> coef(k, 0);
  for (;;) {
    std::vector<Elem> v(base.values().begin(), base.values().end());
    for (std::size_t i = 0; i < k; ++i) {
      if (coef[i] == 0) continue;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = f.add(v[j], f.mul(coef[i], directions[i][j]));
    }
    out.emplace_back(f, std::move(v));
    std::size_t i = 0;
    while (i < k && ++coef[i] == f.order()) coef[i++] = 0;
    if (i == k) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<AffineCoset> consistent_coset(const LabeledSample& s, const SubclassSpec& sub) {
  if (s.inputs.cols() != sub.d()) throw std::invalid_argument("consistent_coset: dimension mismatch");
  const PrimeField& f = sub.field();
  const auto& act = sub.active();
  const std::size_t n = s.size(), extra = sub.constrained() ? 1 : 0;
  FieldMatrix m(f, n + extra, act.size());
  FieldVector rhs(f, n + extra);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < act.size(); ++t) m.set(r, t, s.inputs.at(r, act[t]));
    rhs.set(r, s.labels[r]);
  }
  if (extra) {
    for (std::size_t t = 0; t < act.size(); ++t) m.set(n, t, sub.sigma()[t]);
    rhs.set(n, sub.kappa());
  }
  auto sol = ffmat::solve_affine(m, rhs);
  if (!sol) return std::nullopt;

  auto lift = [&](const FieldVector& local) {
    FieldVector full(f, sub.d());
    for (std::size_t t = 0; t < act.size(); ++t) full.set(act[t], local[t]);
    return full;
  };
  AffineCoset out{lift(sol->particular), {}};
  out.directions.reserve(sol->kernel.size());
  for (const auto& k : sol->kernel) out.directions.push_back(lift(k));
  return out;
}

BigInt consistent_count(const LabeledSample& s, const SubclassSpec& sub) {
  auto c = consistent_coset(s, sub);
  if (c) return c->count();
  if (sub.constrained() && consistent_coset(s, sub.ambient())) return BigInt(0);
  throw Unrealizable("consistent_count: sample is not realizable over the ambient class");
}

std::vector<LinearHypothesis> enumerate_consistent(const LabeledSample& s, const SubclassSpec& sub,
                                                   std::size_t guard) {
  if (sub.cardinality() > BigInt(static_cast<unsigned long>(guard))) {
    throw GuardExceeded("subclass has " + sub.cardinality().get_str() +
                        " members, above the enumeration guard; use consistent_count or "
                        "sample_consistent");
  }
  std::vector<LinearHypothesis> out;
  auto c = consistent_coset(s, sub);
  if (!c) return out;
  for (auto& v : c->enumerate(guard)) out.push_back(LinearHypothesis{std::move(v)});
  return out;
}

LinearHypothesis sample_consistent(const LabeledSample& s, const SubclassSpec& sub, Rng& rng) {
  auto c = consistent_coset(s, sub);
  if (!c) throw Unrealizable("sample_consistent: no consistent hypothesis in the subclass");
  return LinearHypothesis{c->sample(rng)};
}

LinearHypothesis sample_uniform(const SubclassSpec& sub, Rng& rng) {
  const PrimeField& f = sub.field();
  const auto& act = sub.active();
  FieldVector a(f, sub.d());
  if (!sub.constrained()) {
    for (std::size_t j : act) a.set(j, static_cast<Elem>(rng.uniform_below(f.order())));
    return LinearHypothesis{std::move(a)};
  }
  const std::size_t p = sub.pivot();
  Elem acc = 0;
  for (std::size_t t = 0; t < act.size(); ++t) {
    if (t == p) continue;
    const Elem v = static_cast<Elem>(rng.uniform_below(f.order()));
    a.set(act[t], v);
    acc = f.add(acc, f.mul(sub.sigma()[t], v));
  }
  a.set(act[p], f.mul(f.sub(sub.kappa(), acc), f.inv(sub.sigma()[p])));
  return LinearHypothesis{std::move(a)};
}

std::vector<LinearHypothesis> enumerate_subclass(const SubclassSpec& sub, std::size_t guard) {
  LabeledSample empty{FieldMatrix(sub.field(), 0, sub.d()), FieldVector(sub.field(), 0)};
  return enumerate_consistent(empty, sub, guard);
}

}  // namespace estimlab::linclass
