#include "estimlab/oracles.hpp"

#include <set>
#include <stdexcept>

namespace estimlab::oracles {

using ffmat::Elem;
using ffmat::FieldMatrix;
using ffmat::FieldVector;
using ffmat::PrimeField;
using linclass::LinearHypothesis;

namespace {

// Calls fn on every vector of F_q^len, in lexicographic order.
template <class Fn>
void for_each_vector(std::uint32_t q, std::size_t len, Fn&& fn) {
  std::vector<Elem> v(len, 0);
  for (;;) {
    fn(v);
    std::size_t i = len;
    while (i > 0) {
      --i;
      if (++v[i] < q) break;
      v[i] = 0;
      if (i == 0) return;
    }
    if (len == 0) return;
  }
}

std::set<std::vector<Elem>> row_span(const FieldMatrix& m) {
  const PrimeField& f = m.field();
  std::set<std::vector<Elem>> span;
  for_each_vector(f.order(), m.rows(), [&](const std::vector<Elem>& c) {
    std::vector<Elem> acc(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t j = 0; j < m.cols(); ++j) acc[j] = f.add(acc[j], f.mul(c[r], m.at(r, j)));
    }
    span.insert(std::move(acc));
  });
  return span;
}

Elem dot(const PrimeField& f, const std::vector<Elem>& a, std::span<const Elem> x) {
  Elem acc = 0;
  for (std::size_t j = 0; j < a.size(); ++j) acc = f.add(acc, f.mul(a[j], x[j]));
  return acc;
}

}  // namespace

std::size_t span_rank(const FieldMatrix& m) {
  std::size_t size = row_span(m).size(), k = 0;
  while (size > 1) {
    size /= m.field().order();
    ++k;
  }
  return k;
}

bool span_contains(const FieldMatrix& m, const FieldVector& v) {
  const auto span = row_span(m);
  return span.count(std::vector<Elem>(v.values().begin(), v.values().end())) > 0;
}

std::vector<Rational> exhaustive_rank_law(std::uint32_t q, std::size_t n1, std::size_t n2) {
  const PrimeField f(q);
  std::vector<unsigned long> counts(std::min(n1, n2) + 1, 0);
  unsigned long total = 0;
  for_each_vector(q, n1 * n2, [&](const std::vector<Elem>& data) {
    ++counts[span_rank(FieldMatrix(f, n1, n2, data))];
    ++total;
  });
  std::vector<Rational> out;
  for (auto c : counts) {
    Rational r(c, total);
    r.canonicalize();
    out.push_back(r);
  }
  return out;
}

std::vector<LinearHypothesis> brute_consistent(const linclass::LabeledSample& s,
                                               const linclass::SubclassSpec& sub) {
  const PrimeField& f = sub.field();
  std::vector<LinearHypothesis> out;
  for_each_vector(f.order(), sub.d(), [&](const std::vector<Elem>& a) {
    LinearHypothesis h{FieldVector(f, a)};
    if (!sub.contains(h)) return;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (dot(f, a, s.inputs.row_span(i)) != s.labels[i]) return;
    }
    out.push_back(std::move(h));
  });
  return out;
}

Rational agreement_max_deviation(std::uint32_t q, std::size_t d) {
  const PrimeField f(q);
  std::vector<std::vector<Elem>> all;
  for_each_vector(q, d, [&](const std::vector<Elem>& v) { all.push_back(v); });
  Rational worst(0);
  const Rational target(1, q);
  for (const auto& a : all) {
    for (const auto& b : all) {
      if (a == b) continue;
      unsigned long agree = 0;
      for (const auto& x : all) agree += dot(f, a, x) == dot(f, b, x);
      Rational frac(agree, static_cast<unsigned long>(all.size()));
      frac.canonicalize();
      const Rational dev = abs(frac - target);
      if (dev > worst) worst = dev;
    }
  }
  return worst;
}

JointLaw joint_law(std::uint32_t q, std::size_t n) {
  if (n < 1) throw std::invalid_argument("joint_law: n >= 1");
  const PrimeField f(q);
  const std::size_t d = n + 1;
  const auto bias0 = linclass::SubclassSpec::lin_i_n(f, d, n, 0);
  const auto bias1 = linclass::SubclassSpec::lin_i_n(f, d, n, 1);
  const auto ambient = linclass::SubclassSpec::full(f, d);

  std::vector<std::vector<Elem>> d0, d1;
  for_each_vector(q, d, [&](const std::vector<Elem>& a) {
    if (a[0] == 0) d0.push_back(a);
    if (a[0] == 1) d1.push_back(a);
  });

  const Rational wrong_loss(q - 1, q);
  const Rational quarter(1, 4), half(1, 2);
  auto fails = [&](const Rational& est, const Rational& loss) {
    return Rational(abs(est - loss) >= quarter ? 1 : 0);
  };

  Rational err0(0), err01(0), spanned(0), det(0), rnd(0);
  unsigned long matrices = 0;
  std::vector<std::size_t> tail_cols;
  for (std::size_t j = 1; j < d; ++j) tail_cols.push_back(j);
  const FieldVector e1 = FieldVector::unit(f, d, 0);

  for_each_vector(q, n * d, [&](const std::vector<Elem>& data) {
    const FieldMatrix x(f, n, d, data);
    ++matrices;
    const bool full_reduced = span_rank(x.select_columns(tail_cols)) == n;
    const bool span_e1 = span_contains(x, e1);
    const bool e_minus = span_rank(x) == n && !span_e1;
    if (span_e1) spanned += 1;

    auto visit = [&](const std::vector<Elem>& a, bool in_d0) {
      std::vector<Elem> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = dot(f, a, x.row_span(i));
      const linclass::LabeledSample s{x, FieldVector(f, y)};
      auto cons = brute_consistent(s, bias0);
      if (cons.empty()) cons = brute_consistent(s, ambient);
      const LinearHypothesis truth{FieldVector(f, a)};
      bool hit = false;
      for (const auto& h : cons) hit = hit || h == truth;
      Rational p_right(hit ? 1 : 0, static_cast<unsigned long>(cons.size()));
      p_right.canonicalize();
      const Rational p_wrong = Rational(1) - p_right;

      const Rational det_est = full_reduced ? Rational(0) : half;
      const Rational rnd_est = e_minus ? Rational(0) : half;
      const Rational det_f = p_right * fails(det_est, Rational(0)) + p_wrong * fails(det_est, wrong_loss);
      const Rational rnd_f = p_right * fails(rnd_est, Rational(0)) + p_wrong * fails(rnd_est, wrong_loss);
      if (in_d0) err0 += p_wrong;
      err01 += p_wrong;
      det += det_f;
      rnd += rnd_f;
    };
    for (const auto& a : d0) visit(a, true);
    for (const auto& a : d1) visit(a, false);
  });

  const auto m = static_cast<unsigned long>(matrices);
  const auto n0 = static_cast<unsigned long>(d0.size());
  const auto n01 = static_cast<unsigned long>(d0.size() + d1.size());
  JointLaw out;
  out.learner_error_d0 = err0 / (m * n0);
  out.learner_error_d01 = err01 / (m * n01);
  out.spanned = spanned / m;
  out.det_fail_d01 = det / (m * n01);
  out.rand_fail_d01 = rnd / (m * n01);
  return out;
}

}  // namespace estimlab::oracles
