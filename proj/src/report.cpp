#include "estimlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace estimlab::report {

using exactprob::Rational;
using exactprob::to_decimal;
using exactprob::to_fraction;

Json provenance(const std::string& command, const Json& config, std::uint64_t seed) {
  Json p;
  p["tool"] = kToolName;
  p["version"] = kToolVersion;
  p["command"] = command;
  p["config"] = config;
  p["seed"] = seed;
  return p;
}

std::string provenance_header(const Json& prov) {
  std::ostringstream os;
  os << "# " << prov.value("tool", kToolName) << ' ' << prov.value("version", kToolVersion) << '\n';
  os << "# command: " << prov.value("command", "") << '\n';
  os << "# config: " << prov["config"].dump() << '\n';
  os << "# seed: " << prov.value("seed", std::uint64_t{0}) << '\n';
  return os.str();
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_exact(const Rational& x, std::size_t max_fraction) {
  std::string f = to_fraction(x);
  if (f.size() > max_fraction) {
    Rational c = x;
    c.canonicalize();
    f = std::to_string(mpz_sizeinbase(c.get_num_mpz_t(), 10)) + "-digit/" +
        std::to_string(mpz_sizeinbase(c.get_den_mpz_t(), 10)) + "-digit fraction";
  }
  return to_decimal(x) + " (" + f + ")";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string summary_csv_header() {
  return "setting,learner,estimator,epsilon,trials,failures,rate,wilson_lo,wilson_hi,theory,z";
}

std::string summary_csv_row(const expharness::Summary& s) {
  std::ostringstream os;
  os << csv_field(s.setting) << ',' << csv_field(s.learner) << ',' << csv_field(s.estimator) << ','
     << to_decimal(s.epsilon) << ',' << s.trials << ',' << s.failures << ',' << to_decimal(s.rate) << ','
     << format_double(s.wilson_lo) << ',' << format_double(s.wilson_hi) << ','
     << (s.theory ? to_decimal(*s.theory) : "") << ',' << (s.z ? format_double(*s.z) : "");
  return os.str();
}

void write_summary_csv(std::ostream& os, const Json& prov, const std::vector<expharness::Summary>& rows) {
  os << provenance_header(prov) << summary_csv_header() << '\n';
  for (const auto& r : rows) os << summary_csv_row(r) << '\n';
}

Json summary_json(const expharness::Summary& s) {
  Json j;
  j["setting"] = s.setting;
  j["learner"] = s.learner;
  j["estimator"] = s.estimator;
  j["epsilon"] = to_fraction(s.epsilon);
  j["trials"] = s.trials;
  j["failures"] = s.failures;
  j["rate"] = to_decimal(s.rate);
  j["wilson_lo"] = format_double(s.wilson_lo);
  j["wilson_hi"] = format_double(s.wilson_hi);
  j["theory"] = s.theory ? Json(to_decimal(*s.theory)) : Json(nullptr);
  j["theory_fraction"] = s.theory ? Json(to_fraction(*s.theory)) : Json(nullptr);
  j["z"] = s.z ? Json(format_double(*s.z)) : Json(nullptr);
  j["learner_errors"] = s.learner_errors;
  j["spanned"] = s.spanned;
  j["mean_true_loss"] = to_decimal(s.mean_true_loss);
  return j;
}

Json trial_json(const expharness::TrialRecord& r) {
  Json j;
  j["trial"] = r.trial;
  j["class"] = r.dist_class;
  j["truth"] = r.truth_digest;
  if (r.rank_k >= 0) j["rank"] = r.rank_k;
  if (r.spanned >= 0) j["spanned"] = r.spanned == 1;
  if (r.distinct >= 0) j["distinct"] = r.distinct;
  j["output"] = r.output_digest;
  j["learner_error"] = r.learner_error;
  j["true_loss"] = to_fraction(r.true_loss);
  j["estimate"] = to_fraction(r.estimate);
  j["failure"] = r.failure;
  return j;
}

void write_trials_jsonl(std::ostream& os, const Json& prov,
                        const std::vector<expharness::TrialRecord>& records) {
  os << Json{{"provenance", prov}}.dump() << '\n';
  for (const auto& r : records) os << trial_json(r).dump() << '\n';
}

Json audit_json(const expharness::AuditReport& a) {
  Json j;
  j["setting"] = a.setting;
  j["bound"] = a.bound;
  j["trials"] = a.trials;
  j["alpha"] = to_fraction(a.alpha);
  j["epsilon"] = to_fraction(a.epsilon);
  j["validity_rate"] = to_decimal(a.validity_rate);
  j["exceed_alpha_rate"] = to_decimal(a.exceed_alpha_rate);
  j["mean_violation"] = to_decimal(a.mean_violation);
  j["mean_true_loss"] = to_decimal(a.mean_true_loss);
  Json q = Json::object();
  for (const auto& [p, v] : a.looseness_quantiles) q[format_double(p)] = to_decimal(v);
  j["looseness_quantiles"] = q;
  j["loose_rate"] = to_decimal(a.loose_rate);
  j["loose_threshold"] = to_decimal(a.loose_threshold);
  j["loose_meets_threshold"] = a.loose_meets_threshold;
  return j;
}

void write_audit_csv(std::ostream& os, const Json& prov, const expharness::AuditReport& a) {
  os << provenance_header(prov) << "metric,value\n";
  os << "setting," << csv_field(a.setting) << '\n';
  os << "bound," << csv_field(a.bound) << '\n';
  os << "trials," << a.trials << '\n';
  os << "alpha," << to_decimal(a.alpha) << '\n';
  os << "epsilon," << to_decimal(a.epsilon) << '\n';
  os << "validity_rate," << to_decimal(a.validity_rate) << '\n';
  os << "exceed_alpha_rate," << to_decimal(a.exceed_alpha_rate) << '\n';
  os << "mean_violation," << to_decimal(a.mean_violation) << '\n';
  os << "mean_true_loss," << to_decimal(a.mean_true_loss) << '\n';
  for (const auto& [p, v] : a.looseness_quantiles) {
    os << "looseness_q" << format_double(p) << ',' << to_decimal(v) << '\n';
  }
  os << "loose_rate," << to_decimal(a.loose_rate) << '\n';
  os << "loose_threshold," << to_decimal(a.loose_threshold) << '\n';
  os << "loose_meets_threshold," << (a.loose_meets_threshold ? "true" : "false") << '\n';
}

Json tradeoff_json(const expharness::TradeoffReport& t) {
  auto item = [](const expharness::TradeoffItem& i) {
    Json j = summary_json(i.summary);
    j["threshold"] = to_decimal(i.threshold);
    j["sigma"] = format_double(i.sigma);
    j["violated"] = i.violated;
    return j;
  };
  Json j;
  j["setting"] = t.setting;
  j["estimator"] = t.estimator;
  j["epsilon"] = to_fraction(t.epsilon);
  j["epsilon_threshold"] = to_fraction(t.epsilon_threshold);
  j["item1"] = item(t.item1);
  j["item2"] = item(t.item2);
  j["verdict"] = t.verdict;
  return j;
}

}  // namespace estimlab::report
