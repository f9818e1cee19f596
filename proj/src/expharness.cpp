#include "estimlab/expharness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "estimlab/errors.hpp"

namespace estimlab::expharness {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class Range>
std::uint64_t digest(const Range& values) {
  std::uint64_t h = 0x84222325CBF29CE4ULL;
  for (auto v : values) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

Rational frac(std::uint64_t num, std::uint64_t den) {
  Rational r(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  r.canonicalize();
  return r;
}

// Runs body(t) for t in [0, trials) on `workers` threads. The first exception
// by trial index is rethrown after the loop.
template <class Body>
void parallel_trials(std::uint64_t trials, unsigned workers, Body&& body) {
  std::exception_ptr err;
  std::uint64_t err_trial = std::numeric_limits<std::uint64_t>::max();
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for num_threads(static_cast<int>(std::max(1u, workers))) schedule(dynamic, 256)
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      body(static_cast<std::uint64_t>(t));
    } catch (...) {
#pragma omp critical(estimlab_trial_error)
      {
        if (static_cast<std::uint64_t>(t) < err_trial) {
          err_trial = static_cast<std::uint64_t>(t);
          err = std::current_exception();
        }
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

ffmat::PrimeField make_field(std::uint32_t q) {
  try {
    return ffmat::PrimeField(q);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

bool is_matched_constant(const LearnerSpec& l) {
  const auto* c = std::get_if<learners::ConstantERM>(&l);
  return c && !c->fixed;
}

bool is_uniform_erm(const LearnerSpec& l) {
  if (std::holds_alternative<learners::BayesLikeERM>(l)) return true;
  const auto* u = std::get_if<learners::UniformShatteredERM>(&l);
  return u && u->coin.num * 2 == u->coin.den;
}

}  // namespace

std::string family_name(LinFamily::Kind k) {
  switch (k) {
    case LinFamily::Kind::D0:
      return "d0";
    case LinFamily::Kind::D01:
      return "d01";
    case LinFamily::Kind::Full:
      return "full";
  }
  return "?";
}

std::string setting_name(const Setting& s) {
  return std::visit(overloaded{
                        [](const LinSetting& l) {
                          return "lin(q=" + std::to_string(l.q) + ";d=" + std::to_string(l.d) +
                                 ";n=" + std::to_string(l.n) + ";family=" + family_name(l.family) + ")";
                        },
                        [](const ShatteredSetting& sh) {
                          return "shattered(d=" + std::to_string(sh.d) + ";n=" + std::to_string(sh.n) + ")";
                        },
                    },
                    s);
}

// ---------------------------------------------------------------- prepare

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.epsilon <= 0 || cfg.epsilon >= 1) throw ConfigError("epsilon must lie in (0, 1)");
  Prepared p{cfg, std::nullopt, std::nullopt, std::nullopt};

  if (const auto* ls = std::get_if<LinSetting>(&cfg.setting)) {
    const auto field = make_field(ls->q);
    if (ls->d < 1 || ls->n < 1 || ls->n > ls->d) throw ConfigError("Lin setting needs 1 <= n <= d");
    linclass::SubclassSpec bias = linclass::canonical_bias(field, ls->d, ls->n);
    if (const auto* lb = std::get_if<learners::LinearBiasERM>(&cfg.learner)) {
      if (lb->subclass.d() != ls->d || !(lb->subclass.field() == field)) {
        throw ConfigError("learner bias does not live in Lin_q(d) of the setting");
      }
      bias = lb->subclass;
    }
    if (ls->family == LinFamily::Kind::D01 && !bias.constrained()) {
      throw ConfigError("family d01 needs n < d (at n = d the biased class is all of Lin_q(d))");
    }
    LinFamily fam = LinFamily::make(ls->family, bias);
    learners::LinContext ctx{fam.classes[0].ambient(), fam};

    std::visit(overloaded{
                   [](const learners::LinearBiasERM&) {},
                   [](const learners::ConstantERM& c) {
                     if (c.fixed && !std::holds_alternative<linclass::LinearHypothesis>(*c.fixed)) {
                       throw ConfigError("constant learner must hold a linear hypothesis here");
                     }
                   },
                   [](const learners::BayesLikeERM&) {},
                   [](const learners::UniformShatteredERM&) {
                     throw ConfigError("uniform-erm is a shattered-setting learner; use bayes for Lin_q");
                   },
                   [&](const learners::BoundMinERM& b) {
                     b.bound.validate();
                     if (ctx.ambient.cardinality() > linclass::kDefaultEnumerationGuard) {
                       throw ConfigError("bound-minimizing learner needs an enumerable ambient class");
                     }
                   },
               },
               cfg.learner);
    estimators::validate_lin(cfg.estimator, cfg.learner);
    p.lin = std::move(ctx);
    p.bias = std::move(bias);
    return p;
  }

  const auto& sh = std::get<ShatteredSetting>(cfg.setting);
  if (sh.d < 1 || sh.n > sh.d) throw ConfigError("shattered setting needs d >= 1 and n <= d");
  std::visit(overloaded{
                 [](const learners::LinearBiasERM&) {
                   throw ConfigError("linear-bias learners need a Lin_q setting");
                 },
                 [](const learners::ConstantERM& c) {
                   if (c.fixed && !std::holds_alternative<shattered::Labeling>(*c.fixed)) {
                     throw ConfigError("constant learner must hold a labeling here");
                   }
                 },
                 [](const learners::BayesLikeERM&) {},
                 [](const learners::UniformShatteredERM& u) {
                   if (u.coin.den == 0 || u.coin.num > u.coin.den) throw ConfigError("coin must be a probability");
                 },
                 [](const learners::BoundMinERM& b) { b.bound.validate(); },
             },
             cfg.learner);
  estimators::validate_shattered(cfg.estimator);
  p.shat = learners::ShatteredContext{sh.d};
  return p;
}

// ------------------------------------------------------------------ trials

TrialRecord run_trial(const Prepared& p, std::uint64_t t) {
  Rng rng = Rng::for_trial(p.cfg.seed, t);
  TrialRecord rec;
  rec.trial = t;

  if (p.lin) {
    const auto& ls = std::get<LinSetting>(p.cfg.setting);
    const auto& ctx = *p.lin;
    auto [cls, f] = ctx.family.draw(rng);
    linclass::LabeledSample s =
        linclass::label_sample(ffmat::random_matrix(ctx.ambient.field(), ls.n, ls.d, rng), f);
    const linclass::LinearHypothesis h = learners::learn(p.cfg.learner, ctx, s, &f, rng);

    if (!linclass::is_consistent(h, s)) throw std::logic_error("learner output is not consistent");
    if (const auto* lb = std::get_if<learners::LinearBiasERM>(&p.cfg.learner)) {
      if (!lb->subclass.contains(h) && linclass::consistent_coset(s, lb->subclass)) {
        throw std::logic_error("linear-bias learner left its bias on a bias-consistent sample");
      }
    }
    rec.dist_class = cls;
    rec.truth_digest = digest(f.coeffs.values());
    rec.output_digest = digest(h.coeffs.values());
    rec.learner_error = !(h == f);
    rec.true_loss = linclass::population_risk(f, h);
    rec.estimate = estimators::estimate(p.cfg.estimator, p.cfg.learner, h, s, rng);
    rec.rank_k = static_cast<int>(ffmat::rank(linclass::reduced_matrix(s.inputs, *p.bias)));
    if (p.bias->constrained()) rec.spanned = linclass::constraint_spanned(s.inputs, *p.bias) ? 1 : 0;
  } else {
    const auto& sh = std::get<ShatteredSetting>(p.cfg.setting);
    auto [truth, s] = shattered::draw_instance(sh.d, sh.n, rng);
    const shattered::Labeling h = learners::learn(p.cfg.learner, *p.shat, s, &truth, rng);
    if (!shattered::is_consistent(h, s)) throw std::logic_error("learner output is not consistent");
    rec.dist_class = 0;
    rec.truth_digest = digest(truth.bits);
    rec.output_digest = digest(h.bits);
    rec.learner_error = !(h == truth);
    rec.true_loss = shattered::true_loss(h, truth);
    rec.estimate = estimators::estimate(p.cfg.estimator, p.cfg.learner, h, s, rng);
    rec.distinct = static_cast<int>(s.distinct());
  }
  if (rec.estimate < 0 || rec.estimate > 1) throw std::logic_error("estimate outside [0, 1]");
  rec.failure = estimators::is_failure(rec.estimate, rec.true_loss, p.cfg.epsilon);
  return rec;
}

namespace {

ExperimentResult run_impl(const ExperimentConfig& cfg, bool parallel) {
  const Prepared p = prepare(cfg);
  std::vector<TrialRecord> recs(cfg.trials);
  if (parallel) {
    parallel_trials(cfg.trials, cfg.workers, [&](std::uint64_t t) { recs[t] = run_trial(p, t); });
  } else {
    for (std::uint64_t t = 0; t < cfg.trials; ++t) recs[t] = run_trial(p, t);
  }
  ExperimentResult res{summarize(p, recs), {}};
  if (cfg.keep_records) res.records = std::move(recs);
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_impl(cfg, true); }
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) { return run_impl(cfg, false); }

// ------------------------------------------------------------- statistics

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials < 1 || successes > trials) throw std::invalid_argument("wilson_interval: need 0 <= s <= n, n >= 1");
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (ph + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  double lo = std::clamp(center - half, 0.0, 1.0);
  double hi = std::clamp(center + half, 0.0, 1.0);
  if (successes == 0) lo = 0;
  if (successes == trials) hi = 1;
  return {lo, hi};
}

bool within_wilson(std::uint64_t successes, std::uint64_t trials, const Rational& theory, double z) {
  const auto [lo, hi] = wilson_interval(successes, trials, z);
  const double th = theory.get_d();
  return lo <= th && th <= hi;
}

std::vector<EstimatorSpec> builtin_estimators(const Setting& s) {
  std::vector<EstimatorSpec> out{estimators::EmpiricalLoss{}};
  for (unsigned k = 0; k <= 5; ++k) out.push_back(estimators::ConstantValue{frac(k, 10)});
  out.push_back(estimators::ConstantValue{Rational(1, 4)});
  out.push_back(estimators::RandomGuess{});
  if (const auto* ls = std::get_if<LinSetting>(&s)) {
    const Rational alt = frac(ls->q - 1, ls->q);
    for (const Rational& c : {Rational(1, 2), alt}) {
      out.push_back(estimators::ParityOptimalDet{c});
      if (ls->n < ls->d) out.push_back(estimators::ParityOptimalRand{c});
      if (ls->q == 2) break;
    }
  }
  return out;
}

double z_score(const Rational& rate, const Rational& theory, std::uint64_t trials) {
  if (rate == theory) return 0.0;
  const double th = theory.get_d();
  const double var = th * (1 - th) / static_cast<double>(trials);
  const double diff = Rational(rate - theory).get_d();
  if (var <= 0) return diff > 0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
  return diff / std::sqrt(var);
}

std::optional<Rational> theory_failure(const Prepared& p) {
  const auto& cfg = p.cfg;
  if (is_matched_constant(cfg.learner) &&
      std::holds_alternative<estimators::EmpiricalLoss>(cfg.estimator)) {
    return Rational(0);
  }
  if (!p.lin) return std::nullopt;
  const auto& ls = std::get<LinSetting>(cfg.setting);
  const auto* det = std::get_if<estimators::ParityOptimalDet>(&cfg.estimator);
  const auto* lb = std::get_if<learners::LinearBiasERM>(&cfg.learner);
  if (!det || !lb || ls.q != 2 || det->c != Rational(1, 2)) return std::nullopt;
  if (!(lb->subclass == linclass::canonical_bias(lb->subclass.field(), ls.d, ls.n))) return std::nullopt;
  const auto want = ls.n < ls.d ? LinFamily::Kind::D01 : LinFamily::Kind::Full;
  if (ls.family != want || cfg.epsilon > Rational(1, 2)) return std::nullopt;
  return exactprob::parity_estimator_fail(static_cast<unsigned>(ls.d), static_cast<unsigned>(ls.n));
}

Summary summarize(const Prepared& p, const std::vector<TrialRecord>& records) {
  Summary s;
  s.setting = setting_name(p.cfg.setting);
  s.learner = learners::learner_name(p.cfg.learner);
  s.estimator = estimators::estimator_name(p.cfg.estimator);
  s.epsilon = p.cfg.epsilon;
  s.trials = records.size();
  Rational loss_sum(0);
  for (const auto& r : records) {
    s.failures += r.failure;
    s.learner_errors += r.learner_error;
    s.spanned += r.spanned == 1;
    loss_sum += r.true_loss;
  }
  s.rate = frac(s.failures, s.trials);
  s.mean_true_loss = loss_sum / static_cast<unsigned long>(s.trials);
  std::tie(s.wilson_lo, s.wilson_hi) = wilson_interval(s.failures, s.trials, 1.96);
  s.theory = theory_failure(p);
  if (s.theory) s.z = z_score(s.rate, *s.theory, s.trials);
  return s;
}

// --------------------------------------------------------------- trade-off

namespace {

TradeoffItem make_item(Summary s, const Rational& threshold) {
  const double th = threshold.get_d();
  const double sigma = std::sqrt(th * (1 - th) / static_cast<double>(s.trials));
  const bool violated = s.rate.get_d() >= th - 3 * sigma;
  return TradeoffItem{std::move(s), threshold, sigma, violated};
}

}  // namespace

TradeoffReport tradeoff_report(const ExperimentConfig& item1, const ExperimentConfig& item2) {
  if (estimators::estimator_name(item1.estimator) != estimators::estimator_name(item2.estimator)) {
    throw ConfigError("trade-off items must share the estimator");
  }
  if (item1.epsilon != item2.epsilon) throw ConfigError("trade-off items must share epsilon");

  TradeoffReport rep;
  rep.estimator = estimators::estimator_name(item1.estimator);
  rep.epsilon = item1.epsilon;
  Rational thr1, thr2;

  const auto* s1 = std::get_if<ShatteredSetting>(&item1.setting);
  const auto* s2 = std::get_if<ShatteredSetting>(&item2.setting);
  const auto* l1 = std::get_if<LinSetting>(&item1.setting);
  const auto* l2 = std::get_if<LinSetting>(&item2.setting);
  if (s1 && s2) {
    if (s1->d != s2->d || s1->n != s2->n) throw ConfigError("trade-off items must share (d, n)");
    if (!is_matched_constant(item1.learner)) throw ConfigError("item 1 needs the matched constant ERM");
    if (!is_uniform_erm(item2.learner)) throw ConfigError("item 2 needs the uniform (Bayes-like) ERM");
    rep.setting = setting_name(item1.setting);
    rep.epsilon_threshold = frac(s1->d - s1->n, 4 * s1->d);
    thr1 = thr2 = Rational(1, 2);
  } else if (l1 && l2) {
    if (l1->q != l2->q || l1->d != l2->d || l1->n != l2->n) {
      throw ConfigError("trade-off items must share (q, d, n)");
    }
    if (l1->family != LinFamily::Kind::D0 || l2->family != LinFamily::Kind::D01) {
      throw ConfigError("Lin trade-off wants item 1 on family d0 and item 2 on family d01");
    }
    if (learners::learner_name(item1.learner) != learners::learner_name(item2.learner)) {
      throw ConfigError("Lin trade-off items must share the learner");
    }
    rep.setting = "lin(q=" + std::to_string(l1->q) + ";d=" + std::to_string(l1->d) +
                  ";n=" + std::to_string(l1->n) + ")";
    const auto th = exactprob::lin_theory(l1->q, static_cast<unsigned>(l1->d), static_cast<unsigned>(l1->n));
    rep.epsilon_threshold = th.nu;
    thr1 = thr2 = th.eta;
  } else {
    throw ConfigError("trade-off items must use the same kind of setting");
  }

  rep.item1 = make_item(run_experiment(item1).summary, thr1);
  rep.item2 = make_item(run_experiment(item2).summary, thr2);
  rep.verdict = rep.item1.violated || rep.item2.violated;
  return rep;
}

// ------------------------------------------------------------------- audit

namespace {

struct AuditTrial {
  Rational loss;       // L_D(A_C(S))
  Rational emp;        // L_S(A_C(S))
  Rational c;          // C(A_C(S), S)
  Rational looseness;  // C(h_I, S) - (L_D(h_I) - L_S(h_I))
};

}  // namespace

AuditReport audit_bound(const AuditConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  cfg.bound.validate();
  const LearnerSpec learner = learners::BoundMinERM{cfg.bound};

  AuditReport rep;
  rep.setting = setting_name(cfg.setting);
  rep.bound = cfg.bound.name;
  rep.trials = cfg.trials;

  std::vector<AuditTrial> out(cfg.trials);
  if (const auto* ls = std::get_if<LinSetting>(&cfg.setting)) {
    ExperimentConfig probe{cfg.setting, learner, estimators::EmpiricalLoss{}, Rational(1, 4), 1, cfg.seed, 1};
    const Prepared p = prepare(probe);
    rep.alpha = frac(ls->q - 1, 2 * ls->q);
    parallel_trials(cfg.trials, cfg.workers, [&](std::uint64_t t) {
      Rng rng = Rng::for_trial(cfg.seed, t);
      const auto f = p.lin->family.draw(rng).second;
      const auto s = linclass::label_sample(
          ffmat::random_matrix(p.lin->ambient.field(), ls->n, ls->d, rng), f);
      const auto h = learners::learn(learner, *p.lin, s, &f, rng);
      out[t] = AuditTrial{linclass::population_risk(f, h), linclass::empirical_loss(h, s),
                          cfg.bound(h),
                          cfg.bound(f) - (linclass::population_risk(f, f) - linclass::empirical_loss(f, s))};
    });
  } else {
    const auto& sh = std::get<ShatteredSetting>(cfg.setting);
    ExperimentConfig probe{cfg.setting, learner, estimators::EmpiricalLoss{}, Rational(1, 4), 1, cfg.seed, 1};
    const Prepared p = prepare(probe);
    rep.alpha = frac(sh.d - sh.n, 2 * sh.d);
    parallel_trials(cfg.trials, cfg.workers, [&](std::uint64_t t) {
      Rng rng = Rng::for_trial(cfg.seed, t);
      auto [truth, s] = shattered::draw_instance(sh.d, sh.n, rng);
      const auto h = learners::learn(learner, *p.shat, s, &truth, rng);
      out[t] = AuditTrial{shattered::true_loss(h, truth), shattered::empirical_loss(h, s), cfg.bound(h),
                          cfg.bound(truth) - (shattered::true_loss(truth, truth) -
                                              shattered::empirical_loss(truth, s))};
    });
  }
  rep.epsilon = cfg.epsilon ? *cfg.epsilon : rep.alpha / 2;

  Rational viol(0), loss(0);
  std::vector<Rational> loose;
  loose.reserve(out.size());
  const Rational loose_at = rep.alpha - rep.epsilon;
  for (const auto& a : out) {
    const Rational rhs = a.emp + a.c;
    rep.valid += a.loss < rhs;
    rep.exceed_alpha += a.loss > rep.alpha;
    if (a.loss > rhs) viol += a.loss - rhs;
    loss += a.loss;
    rep.loose += a.looseness >= loose_at;
    loose.push_back(a.looseness);
  }
  const auto n = static_cast<unsigned long>(cfg.trials);
  rep.validity_rate = frac(rep.valid, n);
  rep.exceed_alpha_rate = frac(rep.exceed_alpha, n);
  rep.mean_violation = viol / n;
  rep.mean_true_loss = loss / n;
  rep.loose_rate = frac(rep.loose, n);
  rep.loose_threshold = rep.validity_rate - Rational(1, 2);
  rep.loose_meets_threshold = rep.loose_rate >= rep.loose_threshold;

  std::sort(loose.begin(), loose.end());
  for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(loose.size() - 1)));
    rep.looseness_quantiles.emplace_back(q, loose[idx]);
  }
  return rep;
}

// ---------------------------------------------------------------- rank law

std::vector<std::uint64_t> rank_histogram(std::uint32_t q, std::size_t n1, std::size_t n2,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned workers) {
  const auto field = make_field(q);
  std::vector<std::uint16_t> ranks(trials);
  parallel_trials(trials, workers, [&](std::uint64_t t) {
    Rng rng = Rng::for_trial(seed, t);
    ranks[t] = static_cast<std::uint16_t>(ffmat::rank(ffmat::random_matrix(field, n1, n2, rng)));
  });
  std::vector<std::uint64_t> counts(std::min(n1, n2) + 1, 0);
  for (auto r : ranks) ++counts[r];
  return counts;
}

}  // namespace estimlab::expharness
