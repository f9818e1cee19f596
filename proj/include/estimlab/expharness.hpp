#pragma once

// Seeded Monte Carlo driver. Trial t always draws from Rng::for_trial(seed, t)
// and results are aggregated in trial order, so output does not depend on
// the number of workers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "estimlab/estimators.hpp"
#include "estimlab/learners.hpp"

namespace estimlab::expharness {

using exactprob::Rational;
using learners::LearnerSpec;
using learners::LinFamily;
using estimators::EstimatorSpec;

struct LinSetting {
  std::uint32_t q;
  std::size_t d;
  std::size_t n;
  LinFamily::Kind family;
};

struct ShatteredSetting {
  std::size_t d;
  std::size_t n;
};

using Setting = std::variant<LinSetting, ShatteredSetting>;

std::string setting_name(const Setting& s);
std::string family_name(LinFamily::Kind k);

struct ExperimentConfig {
  Setting setting;
  LearnerSpec learner;
  EstimatorSpec estimator;
  Rational epsilon{1, 4};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool keep_records = true;
};

struct TrialRecord {
  std::uint64_t trial;
  std::size_t dist_class;      // index of the subclass the truth was drawn from (0 when shattered)
  std::uint64_t truth_digest;  // hash of the ground-truth encoding
  int rank_k = -1;             // rank of the reduced input matrix (Lin)
  int spanned = -1;            // constraint vector in the active row span (Lin, constrained bias)
  int distinct = -1;           // distinct sample points (shattered)
  bool learner_error = false;  // output != ground truth
  std::uint64_t output_digest;
  Rational true_loss;
  Rational estimate;
  bool failure = false;
};

struct Summary {
  std::string setting;
  std::string learner;
  std::string estimator;
  Rational epsilon;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::uint64_t learner_errors = 0;
  std::uint64_t spanned = 0;
  Rational rate;
  Rational mean_true_loss;
  std::optional<Rational> theory;
  double wilson_lo = 0;
  double wilson_hi = 1;
  std::optional<double> z;
};

struct ExperimentResult {
  Summary summary;
  std::vector<TrialRecord> records;  // empty unless keep_records
};

/// Everything derivable from the config alone: the learning context, the
/// reference bias for rank statistics, and the validated pieces.
struct Prepared {
  ExperimentConfig cfg;
  std::optional<learners::LinContext> lin;
  std::optional<linclass::SubclassSpec> bias;
  std::optional<learners::ShatteredContext> shat;
};

/// Throws ConfigError on an invalid combination.
Prepared prepare(const ExperimentConfig& cfg);

TrialRecord run_trial(const Prepared& p, std::uint64_t t);

/// OpenMP over trials with cfg.workers threads.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Single-threaded reference; produces identical results.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

Summary summarize(const Prepared& p, const std::vector<TrialRecord>& records);

/// Closed-form failure probability for configurations that have one.
std::optional<Rational> theory_failure(const Prepared& p);

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);
/// theory inside the Wilson interval at z.
bool within_wilson(std::uint64_t successes, std::uint64_t trials, const Rational& theory, double z = 3.0);
/// (rate - theory) / sqrt(theory (1 - theory) / trials); 0 when both are equal.
double z_score(const Rational& rate, const Rational& theory, std::uint64_t trials);

/// The estimator family the trade-off suites quantify over.
std::vector<EstimatorSpec> builtin_estimators(const Setting& s);

// --------------------------------------------------------------- trade-off

struct TradeoffItem {
  Summary summary;
  Rational threshold;  // confidence level the item's failure rate is compared against
  double sigma;        // binomial sd at the threshold
  bool violated;       // rate >= threshold - 3 sigma
};

struct TradeoffReport {
  std::string setting;
  std::string estimator;
  Rational epsilon;
  Rational epsilon_threshold;  // accuracy level the items are stated at
  TradeoffItem item1;
  TradeoffItem item2;
  bool verdict;  // at least one item violated
};

/// Item 1 / Item 2 configs: shattered wants the matched constant ERM and the
/// uniform ERM on the same (d, n); Lin wants the same learner on families d0 and d01.
TradeoffReport tradeoff_report(const ExperimentConfig& item1, const ExperimentConfig& item2);

// ------------------------------------------------------------------ audit

struct AuditConfig {
  Setting setting;
  learners::ComplexityFn bound;
  std::optional<Rational> epsilon;  // defaults to alpha / 2
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct AuditReport {
  std::string setting;
  std::string bound;
  std::uint64_t trials = 0;
  Rational alpha;
  Rational epsilon;
  std::uint64_t valid = 0;          // L_D(A_C(S)) < L_S + C
  Rational validity_rate;
  std::uint64_t exceed_alpha = 0;   // L_D(A_C(S)) > alpha
  Rational exceed_alpha_rate;
  Rational mean_violation;          // E max(0, L_D - L_S - C)
  Rational mean_true_loss;
  std::vector<std::pair<double, Rational>> looseness_quantiles;  // matched constant ERM
  std::uint64_t loose = 0;          // looseness >= alpha - epsilon
  Rational loose_rate;
  Rational loose_threshold;         // validity rate - 1/2
  bool loose_meets_threshold = false;
};

AuditReport audit_bound(const AuditConfig& cfg);

// -------------------------------------------------------------- rank law

/// Empirical rank counts of `trials` uniform n1 x n2 matrices.
std::vector<std::uint64_t> rank_histogram(std::uint32_t q, std::size_t n1, std::size_t n2,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned workers);

}  // namespace estimlab::expharness
