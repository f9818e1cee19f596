#pragma once

// Learning algorithms as data. Every randomized learner here is "uniform over
// some set", so each one exposes its exact output law (a posterior) and learn()
// just samples from it.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "estimlab/linclass.hpp"
#include "estimlab/shattered.hpp"

namespace estimlab::learners {

using exactprob::BigInt;
using exactprob::Rational;
using linclass::AffineCoset;
using linclass::LabeledSample;
using linclass::LinearHypothesis;
using linclass::SubclassSpec;
using shattered::DomainSample;
using shattered::Labeling;

/// C(h, S) = constant + weight_scale * (Hamming weight of h) / d. Affine in the
/// weight, so the argmin over a consistent set is cheap to characterize.
struct ComplexityFn {
  std::string name;
  Rational constant{0};
  Rational weight_scale{0};

  static ComplexityFn zero();
  static ComplexityFn one();
  static ComplexityFn weight();
  /// nullopt for unknown names.
  static std::optional<ComplexityFn> builtin(const std::string& name);
  static std::vector<std::string> builtin_names();

  /// Throws std::invalid_argument if C can go negative.
  void validate() const;

  Rational operator()(const LinearHypothesis& h) const;
  Rational operator()(const Labeling& h) const;
};

// ----------------------------------------------------------------- specs

struct LinearBiasERM {
  SubclassSpec subclass;
};
/// Outputs h whenever S is consistent with h. With no fixed h it is matched to
/// the trial's ground truth (the A_{h_I} construction).
struct ConstantERM {
  std::optional<std::variant<LinearHypothesis, Labeling>> fixed;
};
/// Posterior sampler for the experiment's distribution family.
struct BayesLikeERM {};
/// Shattered setting only: fixed seen labels, coin flips elsewhere.
struct UniformShatteredERM {
  shattered::Coin coin;
};
/// argmin of C over the consistent set of the ambient class, lexicographic tie-break.
struct BoundMinERM {
  ComplexityFn bound;
};

using LearnerSpec =
    std::variant<LinearBiasERM, ConstantERM, BayesLikeERM, UniformShatteredERM, BoundMinERM>;

std::string learner_name(const LearnerSpec& spec);

// ------------------------------------------------------------- Lin setting

/// Uniform mixture over equally sized, pairwise disjoint subclasses.
struct LinFamily {
  std::vector<SubclassSpec> classes;

  enum class Kind { D0, D01, Full };
  /// D0 = {bias}; D01 = {bias, bias shifted by 1}; Full = {bias.ambient()}.
  static LinFamily make(Kind kind, const SubclassSpec& bias);

  /// Draws the class index and then f uniformly inside it.
  std::pair<std::size_t, LinearHypothesis> draw(Rng& rng) const;
  bool contains(const LinearHypothesis& h) const;
};

struct LinContext {
  SubclassSpec ambient;  // the class every learner must stay consistent in
  LinFamily family;
};

/// Output law of a learner on one sample: uniform over the union of
/// pairwise disjoint cosets.
struct LinPosterior {
  std::vector<AffineCoset> parts;

  BigInt support_size() const;
  Rational prob(const LinearHypothesis& h) const;
  LinearHypothesis sample(Rng& rng) const;
};

/// `truth` is only read by the matched ConstantERM. Throws ConfigError for
/// shattered-only learners and Unrealizable if nothing in the ambient class fits.
LinPosterior posterior(const LearnerSpec& spec, const LinContext& ctx, const LabeledSample& s,
                       const LinearHypothesis* truth);

LinearHypothesis learn(const LearnerSpec& spec, const LinContext& ctx, const LabeledSample& s,
                       const LinearHypothesis* truth, Rng& rng);

struct LossValue {
  Rational value;
  bool sampled = false;  // every built-in learner has an exact posterior
};

/// E_{h ~ A(S)} L_{D_f}(h), exactly.
LossValue true_loss_of_learner(const LearnerSpec& spec, const LinContext& ctx,
                               const LinearHypothesis& truth, const LabeledSample& s);

// -------------------------------------------------------- shattered setting

struct ShatteredContext {
  std::size_t d;
};

/// Exact P(A(S) = h).
Rational output_prob(const LearnerSpec& spec, const ShatteredContext& ctx, const DomainSample& s,
                     const Labeling* truth, const Labeling& h);

Labeling learn(const LearnerSpec& spec, const ShatteredContext& ctx, const DomainSample& s,
               const Labeling* truth, Rng& rng);

LossValue true_loss_of_learner(const LearnerSpec& spec, const ShatteredContext& ctx,
                               const Labeling& truth, const DomainSample& s);

// ------------------------------------------------------------ Bayes check

struct BayesCheckReport {
  bool ok;
  Rational max_discrepancy;
  std::size_t samples_checked;
};

/// Draws `trials` samples of size n from the family and compares the learner's
/// exact output law with the Bayes posterior obtained by enumerating the family.
BayesCheckReport bayes_like_check(const LinFamily& family, const LearnerSpec& learner,
                                  std::size_t n, std::size_t trials, Rng& rng,
                                  std::size_t guard = linclass::kDefaultEnumerationGuard);
/// Shattered family of all 2^d labelings, d <= 16.
BayesCheckReport bayes_like_check(std::size_t d, const LearnerSpec& learner, std::size_t n,
                                  std::size_t trials, Rng& rng);

}  // namespace estimlab::learners
