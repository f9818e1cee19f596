#pragma once

// Loss estimators E(A, h, S) -> [0, 1]. Each variant declares which of the
// algorithm descriptor, output hypothesis and sample it looks at, so the same
// harness covers algorithm-independent and algorithm-dependent estimators.

#include <string>
#include <variant>

#include "estimlab/learners.hpp"

namespace estimlab::estimators {

using exactprob::BigInt;
using exactprob::Rational;

struct EmpiricalLoss {};
struct ConstantValue {
  Rational c;
};
/// 0 when the reduced input matrix of the learner's bias has full rank, else c.
struct ParityOptimalDet {
  Rational c{1, 2};
};
/// 0 when the active input matrix has full rank and misses the bias constraint
/// vector, else c.
struct ParityOptimalRand {
  Rational c{1, 2};
};
/// Uniform on [0, 1), on the grid k / 2^53.
struct RandomGuess {};

using EstimatorSpec =
    std::variant<EmpiricalLoss, ConstantValue, ParityOptimalDet, ParityOptimalRand, RandomGuess>;

enum Reads : unsigned {
  kReadsAlgorithm = 1u << 0,
  kReadsHypothesis = 1u << 1,
  kReadsSample = 1u << 2,
};

unsigned reads(const EstimatorSpec& spec);
std::string estimator_name(const EstimatorSpec& spec);

/// Throws ConfigError if the estimator cannot run against this learner / setting.
void validate_lin(const EstimatorSpec& spec, const learners::LearnerSpec& algo);
void validate_shattered(const EstimatorSpec& spec);

Rational estimate(const EstimatorSpec& spec, const learners::LearnerSpec& algo,
                  const linclass::LinearHypothesis& h, const linclass::LabeledSample& s, Rng& rng);
Rational estimate(const EstimatorSpec& spec, const learners::LearnerSpec& algo,
                  const shattered::Labeling& h, const shattered::DomainSample& s, Rng& rng);

/// |estimate - true_loss| >= epsilon.
bool is_failure(const Rational& estimate, const Rational& true_loss, const Rational& epsilon);

template <class Hyp, class Sample>
bool failure_indicator(const EstimatorSpec& spec, const learners::LearnerSpec& algo, const Hyp& h,
                       const Sample& s, const Rational& true_loss, const Rational& epsilon,
                       Rng& rng) {
  return is_failure(estimate(spec, algo, h, s, rng), true_loss, epsilon);
}

}  // namespace estimlab::estimators
