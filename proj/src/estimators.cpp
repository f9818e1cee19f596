#include "estimlab/estimators.hpp"

#include <stdexcept>

#include "estimlab/errors.hpp"

namespace estimlab::estimators {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_unit(const Rational& c, const char* what) {
  if (c < 0 || c > 1) throw ConfigError(std::string(what) + ": value must lie in [0, 1]");
}

const linclass::SubclassSpec& bias_of(const learners::LearnerSpec& algo) {
  const auto* l = std::get_if<learners::LinearBiasERM>(&algo);
  if (!l) throw ConfigError("parity-optimal estimators read the learner's linear bias; learner has none");
  return l->subclass;
}

const Rational kTwo53{BigInt("9007199254740992", 10)};

}  // namespace

unsigned reads(const EstimatorSpec& spec) {
  return std::visit(overloaded{
                        [](const EmpiricalLoss&) { return unsigned{kReadsHypothesis | kReadsSample}; },
                        [](const ConstantValue&) { return 0u; },
                        [](const ParityOptimalDet&) { return unsigned{kReadsAlgorithm | kReadsSample}; },
                        [](const ParityOptimalRand&) { return unsigned{kReadsAlgorithm | kReadsSample}; },
                        [](const RandomGuess&) { return 0u; },
                    },
                    spec);
}

std::string estimator_name(const EstimatorSpec& spec) {
  return std::visit(overloaded{
                        [](const EmpiricalLoss&) { return std::string("empirical"); },
                        [](const ConstantValue& c) { return "constant:" + exactprob::to_fraction(c.c); },
                        [](const ParityOptimalDet& p) {
                          return "parity-opt-det:" + exactprob::to_fraction(p.c);
                        },
                        [](const ParityOptimalRand& p) {
                          return "parity-opt-rand:" + exactprob::to_fraction(p.c);
                        },
                        [](const RandomGuess&) { return std::string("random"); },
                    },
                    spec);
}

void validate_lin(const EstimatorSpec& spec, const learners::LearnerSpec& algo) {
  std::visit(overloaded{
                 [](const EmpiricalLoss&) {},
                 [](const ConstantValue& c) { check_unit(c.c, "constant estimator"); },
                 [&](const ParityOptimalDet& p) {
                   check_unit(p.c, "parity-opt-det");
                   bias_of(algo);
                 },
                 [&](const ParityOptimalRand& p) {
                   check_unit(p.c, "parity-opt-rand");
                   if (!bias_of(algo).constrained()) {
                     throw ConfigError("parity-opt-rand needs a constrained bias (n < d)");
                   }
                 },
                 [](const RandomGuess&) {},
             },
             spec);
}

void validate_shattered(const EstimatorSpec& spec) {
  std::visit(overloaded{
                 [](const EmpiricalLoss&) {},
                 [](const ConstantValue& c) { check_unit(c.c, "constant estimator"); },
                 [](const ParityOptimalDet&) {
                   throw ConfigError("parity-opt-det is defined for Lin_q settings only");
                 },
                 [](const ParityOptimalRand&) {
                   throw ConfigError("parity-opt-rand is defined for Lin_q settings only");
                 },
                 [](const RandomGuess&) {},
             },
             spec);
}

Rational estimate(const EstimatorSpec& spec, const learners::LearnerSpec& algo,
                  const linclass::LinearHypothesis& h, const linclass::LabeledSample& s, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const EmpiricalLoss&) { return linclass::empirical_loss(h, s); },
          [](const ConstantValue& c) { return c.c; },
          [&](const ParityOptimalDet& p) {
            const auto& bias = bias_of(algo);
            const bool full = ffmat::rank(linclass::reduced_matrix(s.inputs, bias)) == bias.dim();
            return full ? Rational(0) : p.c;
          },
          [&](const ParityOptimalRand& p) {
            const auto& bias = bias_of(algo);
            const bool e_minus = ffmat::rank(linclass::active_columns(s.inputs, bias)) == bias.dim() &&
                                 !linclass::constraint_spanned(s.inputs, bias);
            return e_minus ? Rational(0) : p.c;
          },
          [&](const RandomGuess&) {
            Rational r(BigInt(static_cast<unsigned long>(rng.unit_bits())));
            r /= kTwo53;
            return r;
          },
      },
      spec);
}

Rational estimate(const EstimatorSpec& spec, const learners::LearnerSpec&,
                  const shattered::Labeling& h, const shattered::DomainSample& s, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const EmpiricalLoss&) { return shattered::empirical_loss(h, s); },
          [](const ConstantValue& c) { return c.c; },
          [](const ParityOptimalDet&) -> Rational {
            throw ConfigError("parity-opt-det is defined for Lin_q settings only");
          },
          [](const ParityOptimalRand&) -> Rational {
            throw ConfigError("parity-opt-rand is defined for Lin_q settings only");
          },
          [&](const RandomGuess&) {
            Rational r(BigInt(static_cast<unsigned long>(rng.unit_bits())));
            r /= kTwo53;
            return r;
          },
      },
      spec);
}

bool is_failure(const Rational& estimate, const Rational& true_loss, const Rational& epsilon) {
  return abs(estimate - true_loss) >= epsilon;
}

}  // namespace estimlab::estimators
