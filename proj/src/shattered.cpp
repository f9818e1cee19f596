#include "estimlab/shattered.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "estimlab/errors.hpp"

namespace estimlab::shattered {

std::uint64_t Labeling::index() const {
  if (bits.size() > 63) throw std::out_of_range("Labeling::index: d > 63");
  std::uint64_t i = 0;
  for (std::size_t j = 0; j < bits.size(); ++j) i |= static_cast<std::uint64_t>(bits[j] & 1) << j;
  return i;
}

Labeling Labeling::from_index(std::size_t d, std::uint64_t index) {
  if (d > 63) throw std::out_of_range("Labeling::from_index: d > 63");
  Labeling l{std::vector<std::uint8_t>(d)};
  for (std::size_t j = 0; j < d; ++j) l.bits[j] = (index >> j) & 1;
  return l;
}

std::size_t DomainSample::distinct() const {
  std::vector<std::uint32_t> p = points;
  std::sort(p.begin(), p.end());
  return static_cast<std::size_t>(std::unique(p.begin(), p.end()) - p.begin());
}

DomainSample draw_sample(const Labeling& truth, std::size_t n, Rng& rng) {
  DomainSample s;
  s.points.resize(n);
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = static_cast<std::uint32_t>(rng.uniform_below(truth.d()));
    s.points[i] = x;
    s.labels[i] = truth.bits[x];
  }
  return s;
}

std::pair<Labeling, DomainSample> draw_instance(std::size_t d, std::size_t n, Rng& rng) {
  if (d < 1) throw std::invalid_argument("draw_instance: d must be >= 1");
  Labeling truth{std::vector<std::uint8_t>(d)};
  for (auto& b : truth.bits) b = rng.coin();
  DomainSample s = draw_sample(truth, n, rng);
  return {std::move(truth), std::move(s)};
}

Rational true_loss(const Labeling& h, const Labeling& truth) {
  if (h.d() != truth.d()) throw std::invalid_argument("true_loss: labelings differ in d");
  unsigned long diff = 0;
  for (std::size_t j = 0; j < h.d(); ++j) diff += h.bits[j] != truth.bits[j];
  Rational r(diff, static_cast<unsigned long>(h.d()));
  r.canonicalize();
  return r;
}

bool is_consistent(const Labeling& h, const DomainSample& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.points[i] >= h.d() || h.bits[s.points[i]] != s.labels[i]) return false;
  }
  return true;
}

Rational empirical_loss(const Labeling& h, const DomainSample& s) {
  if (s.size() == 0) return Rational(0);
  unsigned long wrong = 0;
  for (std::size_t i = 0; i < s.size(); ++i) wrong += h.bits[s.points[i]] != s.labels[i];
  Rational r(wrong, static_cast<unsigned long>(s.size()));
  r.canonicalize();
  return r;
}

namespace {

// -1 unseen, else the forced label.
std::vector<int> forced_labels(const DomainSample& s, std::size_t d) {
  std::vector<int> forced(d, -1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = s.points[i];
    if (x >= d) throw std::out_of_range("sample point outside the domain");
    if (forced[x] >= 0 && forced[x] != s.labels[i]) {
      throw Unrealizable("sample labels point " + std::to_string(x) + " both ways");
    }
    forced[x] = s.labels[i];
  }
  return forced;
}

}  // namespace

Labeling erm_uniform(const DomainSample& s, std::size_t d, Rng& rng, Coin coin) {
  const auto forced = forced_labels(s, d);
  Labeling out{std::vector<std::uint8_t>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    if (forced[j] >= 0) {
      out.bits[j] = static_cast<std::uint8_t>(forced[j]);
    } else if (coin.num * 2 == coin.den) {
      out.bits[j] = rng.coin();
    } else {
      out.bits[j] = rng.bernoulli(coin.num, coin.den);
    }
  }
  return out;
}

Rational erm_output_prob(const DomainSample& s, const Labeling& h, Coin coin) {
  const auto forced = forced_labels(s, h.d());
  Rational p1(static_cast<unsigned long>(coin.num), static_cast<unsigned long>(coin.den));
  p1.canonicalize();
  const Rational p0 = Rational(1) - p1;
  Rational p(1);
  for (std::size_t j = 0; j < h.d(); ++j) {
    if (forced[j] >= 0) {
      if (forced[j] != h.bits[j]) return Rational(0);
    } else {
      p *= h.bits[j] ? p1 : p0;
    }
  }
  return p;
}

Rational expected_erm_loss(std::size_t d, std::size_t m) {
  if (d < 1 || m > d) throw std::invalid_argument("expected_erm_loss: need 0 <= m <= d, d >= 1");
  Rational r(static_cast<unsigned long>(d - m), static_cast<unsigned long>(2 * d));
  r.canonicalize();
  return r;
}

P1P2Report verify_p1_equals_p2(std::size_t d, std::size_t n, Coin coin, std::uint64_t guard) {
  if (d < 1 || d > 16) throw std::invalid_argument("verify_p1_equals_p2: need 1 <= d <= 16");
  const std::uint64_t labelings = std::uint64_t{1} << d;
  std::uint64_t samples = 1;
  for (std::size_t i = 0; i < n; ++i) {
    samples *= 2 * d;
    if (samples > guard) break;
  }
  if (samples > guard || samples * labelings * labelings > guard) {
    throw GuardExceeded("P1=P2 enumeration over 2^d (2d)^n 2^d cells exceeds the guard");
  }

  // Every labeled sequence S in (points x labels)^n, decoded from a mixed-radix counter.
  const Rational t_inv(1, static_cast<unsigned long>(labelings));
  Rational pts(1);
  for (std::size_t i = 0; i < n; ++i) pts /= static_cast<unsigned long>(d);

  P1P2Report rep{true, Rational(0), 0};
  DomainSample s;
  s.points.resize(n);
  s.labels.resize(n);
  for (std::uint64_t code = 0; code < samples; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t cell = c % (2 * d);
      c /= 2 * d;
      s.points[i] = static_cast<std::uint32_t>(cell / 2);
      s.labels[i] = static_cast<std::uint8_t>(cell % 2);
    }
    // P_I(S) for every I, and the total over I.
    std::vector<Rational> p_i(labelings);
    Rational p_sum(0);
    for (std::uint64_t I = 0; I < labelings; ++I) {
      const Labeling truth = Labeling::from_index(d, I);
      p_i[I] = is_consistent(truth, s) ? pts : Rational(0);
      p_sum += p_i[I];
    }
    const bool realizable = p_sum != 0;
    for (std::uint64_t H = 0; H < labelings; ++H) {
      const Labeling h = Labeling::from_index(d, H);
      // P1: draw I, then S ~ D_I, and pair S with h_I.
      Rational p1 = t_inv * p_i[H];
      // P2: draw I, then S ~ D_I, and pair S with the ERM's output on S.
      Rational p2(0);
      if (realizable) {
        const Rational q = erm_output_prob(s, h, coin);
        for (std::uint64_t I = 0; I < labelings; ++I) p2 += t_inv * p_i[I] * q;
      }
      const Rational diff = abs(p1 - p2);
      if (diff > rep.max_discrepancy) rep.max_discrepancy = diff;
      ++rep.cells;
    }
  }
  rep.equal = rep.max_discrepancy == 0;
  return rep;
}

}  // namespace estimlab::shattered
