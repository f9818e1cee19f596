#include "estimlab/learners.hpp"

#include <algorithm>
#include <stdexcept>

#include "estimlab/errors.hpp"

namespace estimlab::learners {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Rational ratio(std::size_t num, std::size_t den) {
  Rational r(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  r.canonicalize();
  return r;
}

AffineCoset point(const LinearHypothesis& h) { return AffineCoset{h.coeffs, {}}; }

}  // namespace

// ------------------------------------------------------------ complexity

ComplexityFn ComplexityFn::zero() { return {"zero", Rational(0), Rational(0)}; }
ComplexityFn ComplexityFn::one() { return {"one", Rational(1), Rational(0)}; }
ComplexityFn ComplexityFn::weight() { return {"weight", Rational(0), Rational(1)}; }

std::optional<ComplexityFn> ComplexityFn::builtin(const std::string& name) {
  if (name == "zero") return zero();
  if (name == "one") return one();
  if (name == "weight") return weight();
  return std::nullopt;
}

std::vector<std::string> ComplexityFn::builtin_names() { return {"zero", "one", "weight"}; }

void ComplexityFn::validate() const {
  if (constant < 0 || constant + weight_scale < 0) {
    throw std::invalid_argument("complexity function '" + name + "' can be negative");
  }
}

Rational ComplexityFn::operator()(const LinearHypothesis& h) const {
  return constant + weight_scale * ratio(h.coeffs.weight(), h.dim());
}

Rational ComplexityFn::operator()(const Labeling& h) const {
  const auto w = static_cast<std::size_t>(std::count(h.bits.begin(), h.bits.end(), 1));
  return constant + weight_scale * ratio(w, h.d());
}

std::string learner_name(const LearnerSpec& spec) {
  return std::visit(overloaded{
                        [](const LinearBiasERM& l) {
                          return std::string("linear-bias-erm[") + l.subclass.describe() + "]";
                        },
                        [](const ConstantERM& c) {
                          return std::string(c.fixed ? "constant-erm[fixed]" : "constant-erm[matched]");
                        },
                        [](const BayesLikeERM&) { return std::string("bayes-like-erm"); },
                        [](const UniformShatteredERM& u) {
                          if (u.coin.num * 2 == u.coin.den) return std::string("uniform-erm");
                          return "uniform-erm[coin=" + std::to_string(u.coin.num) + "/" +
                                 std::to_string(u.coin.den) + "]";
                        },
                        [](const BoundMinERM& b) { return "bound-min-erm[" + b.bound.name + "]"; },
                    },
                    spec);
}

// ---------------------------------------------------------------- family

LinFamily LinFamily::make(Kind kind, const SubclassSpec& bias) {
  switch (kind) {
    case Kind::D0:
      return LinFamily{{bias}};
    case Kind::D01:
      if (!bias.constrained()) {
        throw ConfigError("family d01 needs a constrained bias (n < d)");
      }
      return LinFamily{{bias, bias.shifted(1)}};
    case Kind::Full:
      return LinFamily{{bias.ambient()}};
  }
  throw std::logic_error("unreachable");
}

std::pair<std::size_t, LinearHypothesis> LinFamily::draw(Rng& rng) const {
  const std::size_t idx = classes.size() == 1 ? 0 : rng.uniform_below(classes.size());
  return {idx, linclass::sample_uniform(classes[idx], rng)};
}

bool LinFamily::contains(const LinearHypothesis& h) const {
  return std::any_of(classes.begin(), classes.end(),
                     [&](const SubclassSpec& c) { return c.contains(h); });
}

// ------------------------------------------------------------- posterior

BigInt LinPosterior::support_size() const {
  BigInt total(0);
  for (const auto& p : parts) total += p.count();
  return total;
}

Rational LinPosterior::prob(const LinearHypothesis& h) const {
  for (const auto& p : parts) {
    if (p.contains(h.coeffs)) return Rational(BigInt(1), support_size());
  }
  return Rational(0);
}

LinearHypothesis LinPosterior::sample(Rng& rng) const {
  if (parts.empty()) throw std::logic_error("LinPosterior::sample: empty support");
  if (parts.size() == 1) return LinearHypothesis{parts[0].sample(rng)};
  const std::size_t k = parts[0].directions.size();
  const bool equal = std::all_of(parts.begin(), parts.end(),
                                 [&](const AffineCoset& c) { return c.directions.size() == k; });
  if (equal) return LinearHypothesis{parts[rng.uniform_below(parts.size())].sample(rng)};
  const BigInt total = support_size();
  if (!total.fits_ulong_p()) throw GuardExceeded("posterior support too large to sample");
  std::uint64_t r = rng.uniform_below(total.get_ui());
  for (const auto& p : parts) {
    const std::uint64_t c = p.count().get_ui();
    if (r < c) return LinearHypothesis{p.sample(rng)};
    r -= c;
  }
  throw std::logic_error("unreachable");
}

namespace {

AffineCoset ambient_coset(const LinContext& ctx, const LabeledSample& s) {
  auto c = linclass::consistent_coset(s, ctx.ambient);
  if (!c) throw Unrealizable("no hypothesis in the ambient class is consistent with the sample");
  return std::move(*c);
}

void check_shape(const SubclassSpec& sub, const LinContext& ctx) {
  if (sub.d() != ctx.ambient.d() || !(sub.field() == ctx.ambient.field())) {
    throw ConfigError("learner subclass does not live in the setting's Lin_q(d)");
  }
}

}  // namespace

LinPosterior posterior(const LearnerSpec& spec, const LinContext& ctx, const LabeledSample& s,
                       const LinearHypothesis* truth) {
  return std::visit(
      overloaded{
          [&](const LinearBiasERM& l) {
            check_shape(l.subclass, ctx);
            if (auto c = linclass::consistent_coset(s, l.subclass)) return LinPosterior{{*c}};
            return LinPosterior{{ambient_coset(ctx, s)}};
          },
          [&](const ConstantERM& c) {
            const LinearHypothesis* h = truth;
            if (c.fixed) {
              h = std::get_if<LinearHypothesis>(&*c.fixed);
              if (!h) throw ConfigError("constant learner holds a labeling, setting is Lin_q");
            } else if (!h) {
              throw std::logic_error("matched constant learner needs the ground truth");
            }
            if (linclass::is_consistent(*h, s)) return LinPosterior{{point(*h)}};
            return LinPosterior{{ambient_coset(ctx, s)}};
          },
          [&](const BayesLikeERM&) {
            LinPosterior post;
            for (const auto& cls : ctx.family.classes) {
              if (auto c = linclass::consistent_coset(s, cls)) post.parts.push_back(std::move(*c));
            }
            if (post.parts.empty()) post.parts.push_back(ambient_coset(ctx, s));
            return post;
          },
          [&](const UniformShatteredERM&) -> LinPosterior {
            throw ConfigError("uniform-erm is a shattered-setting learner");
          },
          [&](const BoundMinERM& b) {
            b.bound.validate();
            const auto all = ambient_coset(ctx, s).enumerate();
            std::size_t best = 0;
            Rational best_c = b.bound(LinearHypothesis{all[0]});
            for (std::size_t i = 1; i < all.size(); ++i) {
              Rational c = b.bound(LinearHypothesis{all[i]});
              if (c < best_c) {
                best_c = c;
                best = i;
              }
            }
            return LinPosterior{{AffineCoset{all[best], {}}}};
          },
      },
      spec);
}

LinearHypothesis learn(const LearnerSpec& spec, const LinContext& ctx, const LabeledSample& s,
                       const LinearHypothesis* truth, Rng& rng) {
  return posterior(spec, ctx, s, truth).sample(rng);
}

LossValue true_loss_of_learner(const LearnerSpec& spec, const LinContext& ctx,
                               const LinearHypothesis& truth, const LabeledSample& s) {
  const std::uint32_t q = ctx.ambient.field().order();
  const Rational p_exact = posterior(spec, ctx, s, &truth).prob(truth);
  return LossValue{(Rational(1) - p_exact) * ratio(q - 1, q), false};
}

// ------------------------------------------------------------- shattered

namespace {

Labeling bound_argmin(const ComplexityFn& bound, const ShatteredContext& ctx, const DomainSample& s) {
  bound.validate();
  Labeling out{std::vector<std::uint8_t>(ctx.d, 0)};
  std::vector<bool> seen(ctx.d, false);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.bits[s.points[i]] = s.labels[i];
    seen[s.points[i]] = true;
  }
  // Positive weight prefers zeros, negative prefers ones, flat falls back to
  // the lexicographically smallest labeling, which is again zeros.
  const std::uint8_t fill = bound.weight_scale < 0 ? 1 : 0;
  for (std::size_t j = 0; j < ctx.d; ++j) {
    if (!seen[j]) out.bits[j] = fill;
  }
  return out;
}

const Labeling* fixed_labeling(const ConstantERM& c, const Labeling* truth) {
  if (!c.fixed) {
    if (!truth) throw std::logic_error("matched constant learner needs the ground truth");
    return truth;
  }
  const Labeling* h = std::get_if<Labeling>(&*c.fixed);
  if (!h) throw ConfigError("constant learner holds a linear hypothesis, setting is shattered");
  return h;
}

}  // namespace

Rational output_prob(const LearnerSpec& spec, const ShatteredContext& ctx, const DomainSample& s,
                     const Labeling* truth, const Labeling& h) {
  return std::visit(
      overloaded{
          [&](const LinearBiasERM&) -> Rational {
            throw ConfigError("linear-bias learners need a Lin_q setting");
          },
          [&](const ConstantERM& c) {
            const Labeling* f = fixed_labeling(c, truth);
            if (shattered::is_consistent(*f, s)) return Rational(*f == h ? 1 : 0);
            return shattered::erm_output_prob(s, h);
          },
          [&](const BayesLikeERM&) { return shattered::erm_output_prob(s, h); },
          [&](const UniformShatteredERM& u) { return shattered::erm_output_prob(s, h, u.coin); },
          [&](const BoundMinERM& b) { return Rational(bound_argmin(b.bound, ctx, s) == h ? 1 : 0); },
      },
      spec);
}

Labeling learn(const LearnerSpec& spec, const ShatteredContext& ctx, const DomainSample& s,
               const Labeling* truth, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const LinearBiasERM&) -> Labeling {
            throw ConfigError("linear-bias learners need a Lin_q setting");
          },
          [&](const ConstantERM& c) {
            const Labeling* f = fixed_labeling(c, truth);
            if (shattered::is_consistent(*f, s)) return *f;
            return shattered::erm_uniform(s, ctx.d, rng);
          },
          [&](const BayesLikeERM&) { return shattered::erm_uniform(s, ctx.d, rng); },
          [&](const UniformShatteredERM& u) { return shattered::erm_uniform(s, ctx.d, rng, u.coin); },
          [&](const BoundMinERM& b) { return bound_argmin(b.bound, ctx, s); },
      },
      spec);
}

LossValue true_loss_of_learner(const LearnerSpec& spec, const ShatteredContext& ctx,
                               const Labeling& truth, const DomainSample& s) {
  auto coin_loss = [&](shattered::Coin coin) {
    std::vector<bool> seen(ctx.d, false);
    for (auto x : s.points) seen[x] = true;
    Rational p1(static_cast<unsigned long>(coin.num), static_cast<unsigned long>(coin.den));
    p1.canonicalize();
    Rational total(0);
    for (std::size_t j = 0; j < ctx.d; ++j) {
      if (!seen[j]) total += truth.bits[j] ? Rational(1) - p1 : p1;
    }
    return LossValue{total / static_cast<unsigned long>(ctx.d), false};
  };
  return std::visit(
      overloaded{
          [&](const LinearBiasERM&) -> LossValue {
            throw ConfigError("linear-bias learners need a Lin_q setting");
          },
          [&](const ConstantERM& c) {
            const Labeling* f = fixed_labeling(c, &truth);
            if (shattered::is_consistent(*f, s)) return LossValue{shattered::true_loss(*f, truth)};
            return coin_loss({});
          },
          [&](const BayesLikeERM&) { return coin_loss({}); },
          [&](const UniformShatteredERM& u) { return coin_loss(u.coin); },
          [&](const BoundMinERM& b) {
            return LossValue{shattered::true_loss(bound_argmin(b.bound, ctx, s), truth)};
          },
      },
      spec);
}

// ----------------------------------------------------------- Bayes check

BayesCheckReport bayes_like_check(const LinFamily& family, const LearnerSpec& learner,
                                  std::size_t n, std::size_t trials, Rng& rng, std::size_t guard) {
  if (family.classes.empty()) throw ConfigError("empty family");
  const LinContext ctx{family.classes[0].ambient(), family};
  const auto& field = ctx.ambient.field();
  const std::size_t d = ctx.ambient.d();

  std::vector<LinearHypothesis> members;
  for (const auto& c : family.classes) {
    auto m = linclass::enumerate_subclass(c, guard);
    members.insert(members.end(), m.begin(), m.end());
  }

  BayesCheckReport rep{true, Rational(0), 0};
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = family.draw(rng).second;
    const LabeledSample s = linclass::label_sample(ffmat::random_matrix(field, n, d, rng), f);

    // Every family member has likelihood q^{-nd} or 0, so the Bayes posterior
    // is uniform over the consistent members.
    std::vector<LinearHypothesis> consistent;
    for (const auto& g : members) {
      if (linclass::is_consistent(g, s)) consistent.push_back(g);
    }
    const LinPosterior post = posterior(learner, ctx, s, &f);
    Rational mass(0);
    for (const auto& g : linclass::enumerate_consistent(s, ctx.ambient, guard)) {
      const bool in_bayes = std::find(consistent.begin(), consistent.end(), g) != consistent.end();
      const Rational bayes = in_bayes ? ratio(1, consistent.size()) : Rational(0);
      const Rational got = post.prob(g);
      mass += got;
      const Rational diff = abs(bayes - got);
      if (diff > rep.max_discrepancy) rep.max_discrepancy = diff;
    }
    if (mass != 1) rep.max_discrepancy = std::max(rep.max_discrepancy, Rational(abs(Rational(1) - mass)));
    ++rep.samples_checked;
  }
  rep.ok = rep.max_discrepancy == 0;
  return rep;
}

BayesCheckReport bayes_like_check(std::size_t d, const LearnerSpec& learner, std::size_t n,
                                  std::size_t trials, Rng& rng) {
  if (d < 1 || d > 16) throw GuardExceeded("shattered Bayes check enumerates 2^d labelings; need d <= 16");
  const ShatteredContext ctx{d};
  BayesCheckReport rep{true, Rational(0), 0};
  for (std::size_t t = 0; t < trials; ++t) {
    auto [truth, s] = shattered::draw_instance(d, n, rng);
    const std::size_t free = d - s.distinct();
    const Rational uniform(BigInt(1), BigInt(1) << static_cast<unsigned>(free));
    for (std::uint64_t H = 0; H < (std::uint64_t{1} << d); ++H) {
      const Labeling h = Labeling::from_index(d, H);
      const Rational bayes = shattered::is_consistent(h, s) ? uniform : Rational(0);
      const Rational diff = abs(bayes - output_prob(learner, ctx, s, &truth, h));
      if (diff > rep.max_discrepancy) rep.max_discrepancy = diff;
    }
    ++rep.samples_checked;
  }
  rep.ok = rep.max_discrepancy == 0;
  return rep;
}

}  // namespace estimlab::learners
