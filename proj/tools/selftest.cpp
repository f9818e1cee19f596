#include "selftest.hpp"

#include <chrono>
#include <functional>
#include <sstream>

#include "estimlab/exactprob.hpp"
#include "estimlab/learners.hpp"
#include "estimlab/linclass.hpp"
#include "estimlab/oracles.hpp"
#include "estimlab/shattered.hpp"

namespace estimlab::tools {

namespace {

using exactprob::Rational;
using RankFn = std::function<Rational(std::uint32_t, unsigned, unsigned, unsigned)>;

struct Ledger {
  std::ostream& os;
  int failed = 0;

  void check(const std::string& name, const std::function<std::string()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      detail = body();
      ok = detail.empty() || detail.rfind("ok", 0) == 0;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    os << (ok ? "PASS  " : "FAIL  ") << name;
    if (!detail.empty() && detail != "ok") os << "  [" << detail << "]";
    os << "  (" << static_cast<long>(ms) << " ms)\n";
    if (!ok) ++failed;
  }
};

std::string rank_vs_enumeration(const RankFn& rank, std::uint32_t q, unsigned max_side) {
  for (unsigned a = 1; a <= max_side; ++a) {
    for (unsigned b = 1; b <= max_side; ++b) {
      const auto law = oracles::exhaustive_rank_law(q, a, b);
      for (unsigned r = 0; r < law.size(); ++r) {
        if (rank(q, a, b, r) != law[r]) {
          std::ostringstream s;
          s << "q=" << q << " " << a << "x" << b << " r=" << r << ": formula "
            << exactprob::to_fraction(rank(q, a, b, r)) << " vs enumeration "
            << exactprob::to_fraction(law[r]);
          return s.str();
        }
      }
    }
  }
  return "ok";
}

std::string rank_normalized(const RankFn& rank) {
  for (std::uint32_t q : {2u, 3u, 5u, 11u}) {
    for (unsigned a = 1; a <= 8; ++a) {
      for (unsigned b = 1; b <= 8; ++b) {
        Rational sum(0);
        for (unsigned r = 0; r <= std::min(a, b); ++r) sum += rank(q, a, b, r);
        if (sum != 1) {
          std::ostringstream s;
          s << "q=" << q << " " << a << "x" << b << " sums to " << exactprob::to_fraction(sum);
          return s.str();
        }
      }
    }
  }
  return "ok";
}

std::string two_point_risk() {
  const ffmat::PrimeField f(3);
  if (oracles::agreement_max_deviation(3, 2) != 0) return "agreement fraction differs from 1/q";
  const auto all = linclass::enumerate_subclass(linclass::SubclassSpec::full(f, 2));
  for (const auto& a : all) {
    for (const auto& b : all) {
      const Rational want = a == b ? Rational(0) : Rational(2, 3);
      if (linclass::population_risk(a, b) != want) return "population_risk disagrees";
    }
  }
  return "ok";
}

std::string counting_law(std::size_t instances) {
  Rng rng(20240607);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::uint32_t q = rng.coin() ? 2 : 3;
    const ffmat::PrimeField f(q);
    const std::size_t d = 2 + rng.uniform_below(4);
    const std::size_t n = 1 + rng.uniform_below(d - 1);
    const std::size_t m = rng.uniform_below(n + 1);
    const auto truth = linclass::sample_uniform(linclass::SubclassSpec::ambient_n(f, d, n), rng);
    const auto s = linclass::label_sample(ffmat::random_matrix(f, m, d, rng), truth);
    const auto ref = linclass::SubclassSpec::lin_i_n(f, d, n, 0);
    const std::size_t k = ffmat::rank(linclass::reduced_matrix(s.inputs, ref));
    const bool spanned = linclass::constraint_spanned(s.inputs, ref);
    std::size_t nonzero = 0;
    for (ffmat::Elem i = 0; i < q; ++i) {
      const auto sub = linclass::SubclassSpec::lin_i_n(f, d, n, i);
      const auto count = linclass::consistent_count(s, sub);
      const auto brute = oracles::brute_consistent(s, sub).size();
      if (count != exactprob::BigInt(static_cast<unsigned long>(brute))) return "count mismatch";
      if (count == 0) continue;
      ++nonzero;
      if (Rational(count) != exactprob::power(q, static_cast<long>(n) - static_cast<long>(k))) {
        return "coset size is not q^(n-k)";
      }
    }
    if (spanned ? nonzero != 1 : nonzero != q) return "spanned / unspanned dichotomy broken";
  }
  return "ok";
}

}  // namespace

int run_selftest(const std::string& fault, std::ostream& os) {
  RankFn rank = [](std::uint32_t q, unsigned a, unsigned b, unsigned r) {
    return exactprob::rank_prob(q, a, b, r);
  };
  if (fault == "gaussian-coeff") {
    rank = [](std::uint32_t q, unsigned a, unsigned b, unsigned r) {
      auto bad = [](unsigned nn, unsigned k, std::uint32_t qq) {
        return k > 0 ? exactprob::gaussian_coeff(nn + 1, k, qq) : exactprob::gaussian_coeff(nn, k, qq);
      };
      return exactprob::detail::rank_prob_with(bad, q, a, b, r);
    };
    os << "note: gaussian_coeff fault injected (off-by-one in the upper index)\n";
  } else if (!fault.empty()) {
    os << "unknown fault '" << fault << "' (known: gaussian-coeff)\n";
    return 2;
  }

  Ledger L{os};
  L.check("rank law = enumeration (q=2, shapes <= 3x3)", [&] { return rank_vs_enumeration(rank, 2, 3); });
  L.check("rank law = enumeration (q=3, shapes <= 2x2)", [&] { return rank_vs_enumeration(rank, 3, 2); });
  L.check("rank law sums to 1 (q in {2,3,5,11}, shapes <= 8x8)", [&] { return rank_normalized(rank); });
  L.check("full-rank product = rank law at full rank", [&]() -> std::string {
    for (std::uint32_t q : {2u, 3u, 5u})
      for (unsigned a = 1; a <= 6; ++a)
        for (unsigned b = 1; b <= 6; ++b)
          if (exactprob::full_rank_prob(q, a, b) != rank(q, a, b, std::min(a, b))) return "mismatch";
    return "ok";
  });
  L.check("two-point risk on Lin_3(2) = 2/3 by enumeration", two_point_risk);
  L.check("consistent-set counting law (1000 random instances)", [] { return counting_law(1000); });
  L.check("closed forms = joint enumeration (q=2 n<=3, q=3 n<=2)", []() -> std::string {
    for (auto [q, n] : {std::pair{2u, 1u}, {2u, 2u}, {2u, 3u}, {3u, 1u}, {3u, 2u}}) {
      const auto law = oracles::joint_law(q, n);
      std::ostringstream where;
      where << "q=" << q << " n=" << n << ": ";
      if (law.learner_error_d0 != exactprob::delta_learn(q, n)) return where.str() + "delta";
      if (law.learner_error_d01 != exactprob::beta_nonlearn(q, n)) return where.str() + "beta";
      if (law.spanned != 1 - exactprob::gamma_tv(q, n)) return where.str() + "gamma";
      if (q == 2 && law.det_fail_d01 != exactprob::parity_estimator_fail(n + 2, n)) {
        return where.str() + "deterministic estimator failure";
      }
    }
    return "ok";
  });

  for (auto [d, n] : {std::pair{2u, 1u}, {2u, 2u}, {3u, 1u}, {3u, 2u}}) {
    std::ostringstream name;
    const auto rep = shattered::verify_p1_equals_p2(d, n);
    name << "P1=P2 (d=" << d << ",n=" << n << "): max discrepancy " << exactprob::to_fraction(rep.max_discrepancy);
    L.check(name.str(), [&] { return rep.equal && rep.max_discrepancy == 0 ? std::string("ok") : std::string("nonzero"); });
  }
  {
    const auto rep = shattered::verify_p1_equals_p2(3, 2, shattered::Coin{3, 5});
    L.check("P1=P2 negative control (coin 3/5): max discrepancy " + exactprob::to_fraction(rep.max_discrepancy),
            [&] { return rep.max_discrepancy > 0 ? std::string("ok") : std::string("control not detected"); });
  }

  L.check("Bayes-like: uniform ERM on shattered d=4", []() -> std::string {
    Rng rng(11);
    for (std::size_t n : {1u, 2u, 3u}) {
      const auto rep = learners::bayes_like_check(4, learners::UniformShatteredERM{}, n, 50, rng);
      if (!rep.ok) return "n=" + std::to_string(n) + " discrepancy " + exactprob::to_fraction(rep.max_discrepancy);
    }
    return "ok";
  });
  L.check("Bayes-like: posterior sampler on Lin_2(4,2) d01 and Lin_3(3,1) d01", []() -> std::string {
    Rng rng(12);
    for (auto [q, d, n] : {std::tuple{2u, 4u, 2u}, {3u, 3u, 1u}}) {
      const ffmat::PrimeField f(q);
      const auto fam = learners::LinFamily::make(learners::LinFamily::Kind::D01,
                                                 linclass::canonical_bias(f, d, n));
      const auto rep = learners::bayes_like_check(fam, learners::BayesLikeERM{}, n, 50, rng);
      if (!rep.ok) return "q=" + std::to_string(q) + " discrepancy " + exactprob::to_fraction(rep.max_discrepancy);
    }
    return "ok";
  });
  L.check("Bayes-like negative control (biased learner on d01 is not Bayes)", []() -> std::string {
    Rng rng(13);
    const ffmat::PrimeField f(2);
    const auto bias = linclass::canonical_bias(f, 4, 2);
    const auto fam = learners::LinFamily::make(learners::LinFamily::Kind::D01, bias);
    const auto rep = learners::bayes_like_check(fam, learners::LinearBiasERM{bias}, 2, 50, rng);
    return rep.ok ? "control not detected" : "ok";
  });

  os << (L.failed == 0 ? "selftest: all checks passed\n"
                       : "selftest: " + std::to_string(L.failed) + " check(s) failed\n");
  return L.failed == 0 ? 0 : 1;
}

}  // namespace estimlab::tools
