#include "estimlab/exactprob.hpp"

#include <algorithm>
#include <stdexcept>

namespace estimlab::exactprob {

namespace {

BigInt ipow(std::uint32_t q, unsigned long e) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), q, e);
  return out;
}

}  // namespace

Rational power(std::uint32_t q, long e) {
  if (q == 0) throw std::invalid_argument("power: zero base");
  if (e >= 0) return Rational(ipow(q, static_cast<unsigned long>(e)));
  Rational out(BigInt(1), ipow(q, static_cast<unsigned long>(-e)));
  out.canonicalize();
  return out;
}

BigInt gaussian_coeff(unsigned nn, unsigned k, std::uint32_t q) {
  if (k > nn) return BigInt(0);
  // After step j the running value is [nn choose j+1]_q, so every division is exact.
  BigInt g(1);
  for (unsigned j = 0; j < k; ++j) {
    g *= ipow(q, nn - j) - 1;
    const BigInt den = ipow(q, j + 1) - 1;
    mpz_divexact(g.get_mpz_t(), g.get_mpz_t(), den.get_mpz_t());
  }
  return g;
}

Rational rank_prob(std::uint32_t q, unsigned n1, unsigned n2, unsigned r) {
  return detail::rank_prob_with(gaussian_coeff, q, n1, n2, r);
}

Rational full_rank_prob(std::uint32_t q, unsigned n1, unsigned n2) {
  const unsigned lo = std::min(n1, n2), hi = std::max(n1, n2);
  Rational p(1);
  for (unsigned k = 0; k < lo; ++k) {
    p *= Rational(1) - power(q, static_cast<long>(k) - static_cast<long>(hi));
  }
  return p;
}

Rational span_given_rank(std::uint32_t q, unsigned n, unsigned k) {
  Rational p(ipow(q, k) - 1, ipow(q, n + 1) - 1);
  p.canonicalize();
  return p;
}

Rational delta_learn(std::uint32_t q, unsigned n) {
  Rational sum(0);
  for (unsigned k = 0; k < n; ++k) {
    sum += (Rational(1) - power(q, static_cast<long>(k) - n)) * rank_prob(q, n, n, k);
  }
  return sum;
}

Rational beta_nonlearn(std::uint32_t q, unsigned n) {
  Rational sum(0);
  for (unsigned k = 0; k <= n; ++k) {
    const long e = static_cast<long>(k) - static_cast<long>(n);
    const Rational qkn = power(q, e);
    const Rational coeff = qkn - 2 * power(q, e - 1);
    sum += (coeff * span_given_rank(q, n, k) + 2 - qkn) * rank_prob(q, n, n + 1, k);
  }
  return sum / 2;
}

Rational gamma_tv(std::uint32_t q, unsigned n) {
  Rational spanned(0);
  for (unsigned k = 0; k <= n; ++k) spanned += span_given_rank(q, n, k) * rank_prob(q, n, n + 1, k);
  return Rational(1) - spanned;
}

Rational eta_F(std::uint32_t q, unsigned n) {
  if (n < 1) throw std::invalid_argument("eta_F: n must be >= 1");
  Rational first(0);
  for (unsigned k = 0; k <= n; ++k) {
    const long e = static_cast<long>(k) - static_cast<long>(n);
    const Rational qkn = power(q, e);
    const Rational coeff = qkn - 2 * power(q, e - 1) - 1;
    first += (coeff * span_given_rank(q, n, k) + 2 - qkn) * rank_prob(q, n, n + 1, k);
  }
  first /= 2;
  return first - delta_learn(q, n);
}

Rational parity_estimator_fail(unsigned d, unsigned n) {
  if (n < 1 || n > d) throw std::invalid_argument("parity_estimator_fail: need 1 <= n <= d");
  const unsigned m = std::min(n, d - 1);
  Rational sum(0);
  for (unsigned k = 0; k <= m; ++k) {
    sum += power(2, static_cast<long>(k) - static_cast<long>(m) - 1) * rank_prob(2, n, m + 1, k);
  }
  return sum;
}

Rational prob_e_minus(unsigned n) {
  if (n < 1) throw std::invalid_argument("prob_e_minus: n must be >= 1");
  return rank_prob(2, n, n + 1, n) * (Rational(1) - span_given_rank(2, n, n));
}

TheoryParams lin_theory(std::uint32_t q, unsigned d, unsigned n) {
  if (n < 1 || n + 1 > d) throw std::invalid_argument("lin_theory: need 1 <= n <= d - 1");
  TheoryParams p;
  p.q = q;
  p.d = d;
  p.n = n;
  p.alpha = Rational(q - 1, q);
  p.alpha.canonicalize();
  p.beta = beta_nonlearn(q, n);
  p.gamma = gamma_tv(q, n);
  p.delta = delta_learn(q, n);
  p.epsilon = 0;
  p.nu = (p.alpha - p.epsilon) / 2;
  p.t0 = ipow(q, n);
  p.t1 = p.t0;
  p.t = p.t0 + p.t1;
  const Rational t_over_t1(p.t, p.t1);
  const Rational t0_over_t1(p.t0, p.t1);
  p.eta = p.gamma / 2 - (Rational(1) - p.beta * t_over_t1 + p.delta * (1 + t0_over_t1)) / 2;
  return p;
}

// -------------------------------------------------------------- rendering

std::string to_fraction(const Rational& x) {
  Rational c = x;
  c.canonicalize();
  return c.get_str();
}

double to_double(const Rational& x) { return x.get_d(); }

std::string to_decimal(const Rational& x, int digits) {
  if (digits < 1) throw std::invalid_argument("to_decimal: digits must be >= 1");
  if (x == 0) return "0";
  Rational a = abs(x);
  const BigInt ten(10);

  // e = floor(log10 |x|), starting from a bit-length estimate.
  long e = static_cast<long>(
      (static_cast<double>(mpz_sizeinbase(a.get_num_mpz_t(), 2)) -
       static_cast<double>(mpz_sizeinbase(a.get_den_mpz_t(), 2))) *
      0.30102999566398120);
  auto pow10 = [&](long k) { return power(10, k); };
  while (pow10(e) > a) --e;
  while (pow10(e + 1) <= a) ++e;

  // N = round(|x| * 10^(digits-1-e)), half away from zero.
  Rational scaled = a * pow10(digits - 1 - e);
  BigInt n = scaled.get_num() / scaled.get_den();
  const Rational frac = scaled - Rational(n);
  if (frac * 2 >= 1) n += 1;
  BigInt limit;
  mpz_ui_pow_ui(limit.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  if (n >= limit) {
    n /= ten;
    ++e;
  }
  std::string mant = n.get_str();  // exactly `digits` characters

  std::string out = x < 0 ? "-" : "";
  if (e >= -6 && e < digits) {
    if (e >= 0) {
      std::string ip = mant.substr(0, static_cast<std::size_t>(e) + 1);
      std::string fp = mant.substr(static_cast<std::size_t>(e) + 1);
      while (!fp.empty() && fp.back() == '0') fp.pop_back();
      out += ip;
      if (!fp.empty()) out += "." + fp;
    } else {
      std::string fp = std::string(static_cast<std::size_t>(-e - 1), '0') + mant;
      while (!fp.empty() && fp.back() == '0') fp.pop_back();
      out += "0." + fp;
    }
  } else {
    std::string fp = mant.substr(1);
    while (!fp.empty() && fp.back() == '0') fp.pop_back();
    out += mant.substr(0, 1);
    if (!fp.empty()) out += "." + fp;
    out += "e" + std::to_string(e);
  }
  return out;
}

}  // namespace estimlab::exactprob
