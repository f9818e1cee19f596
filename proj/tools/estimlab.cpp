#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "estimlab/errors.hpp"
#include "estimlab/exactprob.hpp"
#include "estimlab/expharness.hpp"
#include "estimlab/learners.hpp"
#include "estimlab/report.hpp"
#include "selftest.hpp"

namespace el = estimlab;
using el::exactprob::BigInt;
using el::exactprob::Rational;
using el::report::Json;

namespace {

constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;

// ------------------------------------------------------------ parsing

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// "p/q", integers and decimals (with optional exponent), parsed exactly.
Rational parse_rational(const std::string& raw) {
  const std::string s = trim(raw);
  auto bad = [&] { return el::ConfigError("cannot parse '" + raw + "' as a number"); };
  if (s.empty()) throw bad();
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    std::string p = trim(s.substr(0, slash)), q = trim(s.substr(slash + 1));
    bool neg = false;
    if (!p.empty() && (p[0] == '-' || p[0] == '+')) {
      neg = p[0] == '-';
      p.erase(0, 1);
    }
    if (!all_digits(p) || !all_digits(q)) throw bad();
    const BigInt den(q, 10);
    if (den == 0) throw el::ConfigError("zero denominator in '" + raw + "'");
    Rational r(BigInt(p, 10), den);
    r.canonicalize();
    return neg ? Rational(-r) : r;
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '-' || s[i] == '+') neg = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool any = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++], any = true;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++], --scale, any = true;
  }
  if (!any) throw bad();
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::string ex;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ex += s[i++];
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ex += s[i++];
    if (ex.empty() || ex == "-" || ex == "+") throw bad();
    scale += std::stol(ex);
  }
  if (i != s.size()) throw bad();
  Rational r(BigInt(digits.empty() ? "0" : digits, 10));
  r *= el::exactprob::power(10, scale);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

std::pair<std::string, std::optional<std::string>> split_arg(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, std::nullopt};
  return {s.substr(0, colon), s.substr(colon + 1)};
}

std::string builtin_bound_list() {
  std::string out;
  for (const auto& n : el::learners::ComplexityFn::builtin_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

Rational json_rational(const Json& v, const std::string& what) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number()) return parse_rational(v.dump());
  throw el::ConfigError(what + " must be a number or a fraction string");
}

// Built-in name, or a JSON file {"name": ..., "constant": c, "weight": w}
// describing C(h) = c + w * weight(h) / d.
el::learners::ComplexityFn parse_bound(const std::string& arg) {
  if (auto b = el::learners::ComplexityFn::builtin(arg)) return *b;
  if (!std::filesystem::is_regular_file(arg)) {
    throw el::ConfigError("unknown bound '" + arg + "'; built-ins: " + builtin_bound_list() +
                          " (or a JSON file with \"constant\" and \"weight\")");
  }
  std::ifstream in(arg);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw el::ConfigError("bound file " + arg + ": " + e.what());
  }
  el::learners::ComplexityFn c;
  c.name = j.value("name", std::filesystem::path(arg).stem().string());
  if (j.contains("constant")) c.constant = json_rational(j["constant"], "bound constant");
  if (j.contains("weight")) c.weight_scale = json_rational(j["weight"], "bound weight");
  for (const auto& [k, _] : j.items()) {
    if (k != "name" && k != "constant" && k != "weight") {
      throw el::ConfigError("bound file " + arg + ": unknown key '" + k + "'");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw el::ConfigError(e.what());
  }
  return c;
}

el::estimators::EstimatorSpec parse_estimator(const std::string& arg) {
  namespace es = el::estimators;
  const auto [name, param] = split_arg(arg);
  const Rational c = param ? parse_rational(*param) : Rational(1, 2);
  if (name == "empirical" && !param) return es::EmpiricalLoss{};
  if (name == "random" && !param) return es::RandomGuess{};
  if (name == "constant" && param) return es::ConstantValue{c};
  if (name == "parity-opt-det") return es::ParityOptimalDet{c};
  if (name == "parity-opt-rand") return es::ParityOptimalRand{c};
  throw el::ConfigError("unknown estimator '" + arg +
                        "'; known: empirical, constant:<c>, parity-opt-det[:c], parity-opt-rand[:c], random");
}

el::learners::LinFamily::Kind parse_family(const std::string& s, std::size_t d, std::size_t n) {
  using K = el::learners::LinFamily::Kind;
  if (s == "auto") return n < d ? K::D01 : K::Full;
  if (s == "d0") return K::D0;
  if (s == "d01") return K::D01;
  if (s == "full") return K::Full;
  throw el::ConfigError("unknown family '" + s + "'; known: d0, d01, full, auto");
}

el::learners::LearnerSpec parse_lin_learner(const std::string& arg, std::uint32_t q, std::size_t d,
                                            std::size_t n) {
  namespace lr = el::learners;
  const el::ffmat::PrimeField f(q);
  const auto [name, param] = split_arg(arg);
  if (d < 1 || n < 1 || n > d) throw el::ConfigError("Lin setting needs 1 <= n <= d");
  if ((name == "a0" || name == "linear-bias") && !param) return lr::LinearBiasERM{el::linclass::canonical_bias(f, d, n)};
  if (name == "a1" && !param) {
    if (n >= d) throw el::ConfigError("learner a1 needs n < d");
    return lr::LinearBiasERM{el::linclass::canonical_bias(f, d, n).shifted(1)};
  }
  if (name == "uniform" && !param) return lr::LinearBiasERM{el::linclass::SubclassSpec::ambient_n(f, d, n)};
  if (name == "bayes" && !param) return lr::BayesLikeERM{};
  if (name == "constant" && !param) return lr::ConstantERM{};
  if (name == "boundmin" && param) return lr::BoundMinERM{parse_bound(*param)};
  throw el::ConfigError("unknown Lin learner '" + arg + "'; known: a0, a1, uniform, bayes, constant, boundmin:<bound>");
}

el::learners::LearnerSpec parse_shattered_learner(const std::string& arg) {
  namespace lr = el::learners;
  const auto [name, param] = split_arg(arg);
  if (name == "uniform" && !param) return lr::UniformShatteredERM{};
  if (name == "biased" && param) {
    const Rational p = parse_rational(*param);
    if (p < 0 || p > 1 || !p.get_num().fits_ulong_p() || !p.get_den().fits_ulong_p()) {
      throw el::ConfigError("biased:<p> needs a probability with a small denominator");
    }
    return lr::UniformShatteredERM{el::shattered::Coin{p.get_num().get_ui(), p.get_den().get_ui()}};
  }
  if (name == "bayes" && !param) return lr::BayesLikeERM{};
  if (name == "constant" && !param) return lr::ConstantERM{};
  if (name == "boundmin" && param) return lr::BoundMinERM{parse_bound(*param)};
  throw el::ConfigError("unknown shattered learner '" + arg +
                        "'; known: uniform, biased:<p>, bayes, constant, boundmin:<bound>");
}

// --------------------------------------------------- options and config file

// Every option also answers to a key of the same name in the --config JSON;
// keys only apply when the flag itself was not given.
struct Registry {
  struct Entry {
    CLI::Option* opt;
    std::function<void(const Json&)> set;
  };
  std::map<CLI::App*, std::map<std::string, Entry>> entries;  // per subcommand
  std::string config_path;
  bool seed_from_config = false;

  static std::string key_of(std::string flag) {
    while (!flag.empty() && flag[0] == '-') flag.erase(0, 1);
    std::replace(flag.begin(), flag.end(), '-', '_');
    return flag;
  }

  template <class T>
  CLI::Option* bind(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, var, help);
    entries[app][key_of(flag)] = {opt, [&var, flag](const Json& v) {
                               if constexpr (std::is_same_v<T, std::string>) {
                                 var = v.is_string() ? v.get<std::string>() : v.dump();
                               } else {
                                 try {
                                   var = v.get<T>();
                                 } catch (const std::exception&) {
                                   throw el::ConfigError("config key for " + flag + " has the wrong type");
                                 }
                               }
                             }};
    return opt;
  }

  void config_option(CLI::App* app) {
    app->add_option("--config", config_path, "JSON file with option values; flags win");
  }

  void apply() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw el::ConfigError("cannot open config file " + config_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const std::exception& e) {
      throw el::ConfigError("config file " + config_path + ": " + e.what());
    }
    if (!j.is_object()) throw el::ConfigError("config file must hold a JSON object");
    const auto active = std::find_if(entries.begin(), entries.end(), [](const auto& e) { return e.first->parsed(); });
    if (active == entries.end()) return;
    const auto& keys = active->second;
    for (const auto& [k, v] : j.items()) {
      const auto it = keys.find(k);
      if (it == keys.end()) throw el::ConfigError("config file: unknown key '" + k + "'");
      if (it->second.opt->count() > 0) continue;
      it->second.set(v);
      if (k == "seed") seed_from_config = true;
    }
  }
};

struct SeedOpt {
  std::uint64_t value = 0;
  CLI::Option* opt = nullptr;

  std::uint64_t resolve(const Registry& reg) const {
    if (opt->count() > 0 || reg.seed_from_config) return value;
    if (const char* env = std::getenv("ESTIMLAB_SEED"); env && *env) {
      const std::string s = trim(env);
      if (!all_digits(s)) throw el::ConfigError("ESTIMLAB_SEED must be a non-negative integer");
      try {
        return std::stoull(s);
      } catch (const std::exception&) {
        throw el::ConfigError("ESTIMLAB_SEED out of range");
      }
    }
    return 0;
  }
};

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Machine output goes to --out when given, otherwise to stdout.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw el::ConfigError("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

void check_format(const std::string& fmt, bool allow_table = false) {
  if (fmt == "csv" || fmt == "jsonl" || (allow_table && fmt == "table")) return;
  throw el::ConfigError("unknown format '" + fmt + "'; known: csv, jsonl" + (allow_table ? ", table" : ""));
}

std::string fmt_rational(const Rational& r) { return el::report::format_exact(r); }

// ------------------------------------------------------------- rank-dist

struct RankDistOpts {
  std::uint32_t q = 2;
  std::size_t n1 = 2, n2 = 2;
  std::uint64_t trials = 0;
  SeedOpt seed;
  unsigned workers = default_workers();
  std::string out, format = "table";
};

int cmd_rank_dist(RankDistOpts& o, Registry& reg) {
  check_format(o.format, true);
  const el::ffmat::PrimeField field(o.q);
  (void)field;
  if (o.n1 < 1 || o.n2 < 1) throw el::ConfigError("matrix shape must be at least 1 x 1");
  const std::uint64_t seed = o.seed.resolve(reg);
  const std::size_t rmax = std::min(o.n1, o.n2);
  std::vector<std::uint64_t> counts;
  if (o.trials > 0) counts = el::expharness::rank_histogram(o.q, o.n1, o.n2, o.trials, seed, o.workers);

  Json cfg{{"q", o.q}, {"n1", o.n1}, {"n2", o.n2}, {"trials", o.trials}};
  const Json prov = el::report::provenance("rank-dist", cfg, seed);

  bool ok = true;
  Json rows = Json::array();
  Rational total(0);
  for (std::size_t r = 0; r <= rmax; ++r) {
    const Rational p = el::exactprob::rank_prob(o.q, o.n1, o.n2, r);
    total += p;
    Json row{{"rank", r}, {"exact", el::exactprob::to_fraction(p)}, {"decimal", el::exactprob::to_decimal(p)}};
    if (o.trials > 0) {
      const auto [lo, hi] = el::expharness::wilson_interval(counts[r], o.trials, 1.96);
      Rational rate(BigInt(static_cast<unsigned long>(counts[r])), BigInt(static_cast<unsigned long>(o.trials)));
      rate.canonicalize();
      const double z = el::expharness::z_score(rate, p, o.trials);
      const bool pass = el::expharness::within_wilson(counts[r], o.trials, p, 3.0);
      ok = ok && pass;
      row["count"] = counts[r];
      row["rate"] = el::exactprob::to_decimal(rate);
      row["wilson_lo"] = el::report::format_double(lo);
      row["wilson_hi"] = el::report::format_double(hi);
      row["z"] = el::report::format_double(z);
      row["check"] = pass ? "pass" : "FAIL";
    }
    rows.push_back(row);
  }
  if (total != 1) ok = false;

  emit(o.out, [&](std::ostream& os) {
    if (o.format == "jsonl") {
      os << Json{{"provenance", prov}}.dump() << '\n';
      for (const auto& r : rows) os << r.dump() << '\n';
      return;
    }
    if (o.format == "csv") {
      os << el::report::provenance_header(prov);
      bool first = true;
      for (const auto& r : rows) {
        if (first) {
          std::string h;
          for (const auto& [k, _] : r.items()) h += (h.empty() ? "" : ",") + k;
          os << h << '\n';
          first = false;
        }
        std::string line;
        bool lead = true;
        for (const auto& [_, v] : r.items()) {
          line += (lead ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
          lead = false;
        }
        os << line << '\n';
      }
      return;
    }
    os << "R_" << o.q << "(" << o.n1 << ", " << o.n2 << ", r)\n";
    os << std::left << std::setw(6) << "rank" << std::setw(30) << "exact" << std::setw(22) << "decimal";
    if (o.trials > 0) os << std::setw(11) << "count" << std::setw(22) << "rate" << std::setw(36) << "wilson95" << std::setw(20) << "z" << "3sigma";
    os << '\n';
    for (const auto& r : rows) {
      os << std::left << std::setw(6) << r["rank"].get<std::size_t>() << std::setw(30)
         << r["exact"].get<std::string>() << std::setw(22) << r["decimal"].get<std::string>();
      if (o.trials > 0) {
        os << std::setw(11) << r["count"].get<std::uint64_t>() << std::setw(22) << r["rate"].get<std::string>()
           << std::setw(36)
           << ("[" + r["wilson_lo"].get<std::string>() + ", " + r["wilson_hi"].get<std::string>() + "] ")
           << std::setw(20) << r["z"].get<std::string>() << r["check"].get<std::string>();
      }
      os << '\n';
    }
    os << "sum of exact column: " << el::exactprob::to_fraction(total) << '\n';
    if (o.trials > 0) os << "trials: " << o.trials << ", seed: " << seed << '\n';
  });
  return ok ? 0 : kExitCheck;
}

// ------------------------------------------------------------- eta-table

struct EtaOpts {
  std::vector<std::uint32_t> qs{2, 3, 5, 11, 31, 101};
  std::vector<unsigned> ns{1, 5, 10, 50};
  std::string out, format = "table";
};

int cmd_eta_table(EtaOpts& o) {
  check_format(o.format, true);
  for (auto q : o.qs) el::ffmat::PrimeField check(q);
  for (auto n : o.ns) {
    if (n < 1) throw el::ConfigError("n must be >= 1");
  }
  bool ok = true;
  Json rows = Json::array();
  for (auto q : o.qs) {
    for (auto n : o.ns) {
      const Rational eta = el::exactprob::eta_F(q, n);
      const Rational ref = Rational(1, 2) - Rational(1, q);
      Rational scaled = abs(eta - ref) * q;
      std::string flag = "-";
      if (q > 10) {
        const bool pass = eta > Rational(2, 5);
        ok = ok && pass;
        flag = pass ? "pass" : "FAIL";
      }
      rows.push_back(Json{{"q", q},
                          {"n", n},
                          {"eta", el::exactprob::to_decimal(eta)},
                          {"eta_exact", el::exactprob::to_fraction(eta)},
                          {"half_minus_inv_q", el::exactprob::to_decimal(ref)},
                          {"q_abs_diff", el::exactprob::to_decimal(scaled)},
                          {"eta_gt_0.4", flag}});
    }
  }
  emit(o.out, [&](std::ostream& os) {
    if (o.format == "jsonl") {
      os << Json{{"provenance", el::report::provenance("eta-table", Json{{"q", o.qs}, {"n", o.ns}}, 0)}}.dump()
         << '\n';
      for (const auto& r : rows) os << r.dump() << '\n';
      return;
    }
    if (o.format == "csv") {
      os << el::report::provenance_header(el::report::provenance("eta-table", Json{{"q", o.qs}, {"n", o.ns}}, 0));
      os << "q,n,eta,eta_exact,half_minus_inv_q,q_abs_diff,eta_gt_0.4\n";
      for (const auto& r : rows) {
        os << r["q"].get<std::uint32_t>() << ',' << r["n"].get<unsigned>() << ',' << r["eta"].get<std::string>()
           << ',' << r["eta_exact"].get<std::string>() << ',' << r["half_minus_inv_q"].get<std::string>() << ','
           << r["q_abs_diff"].get<std::string>() << ',' << r["eta_gt_0.4"].get<std::string>() << '\n';
      }
      return;
    }
    os << std::left << std::setw(6) << "q" << std::setw(5) << "n" << std::setw(18) << "eta" << std::setw(18)
       << "1/2 - 1/q" << std::setw(18) << "q*|diff|" << "eta > 0.4\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(6) << r["q"].get<std::uint32_t>() << std::setw(5) << r["n"].get<unsigned>()
         << std::setw(18) << r["eta"].get<std::string>() << std::setw(18) << r["half_minus_inv_q"].get<std::string>()
         << std::setw(18) << r["q_abs_diff"].get<std::string>() << r["eta_gt_0.4"].get<std::string>() << '\n';
    }
  });
  return ok ? 0 : kExitCheck;
}

// -------------------------------------------------------------- simulate

struct SimOpts {
  std::string setting;
  std::uint32_t q = 2;
  std::size_t d = 8, n = 6;
  std::string family = "auto";
  std::string learner, estimator, epsilon = "1/4";
  std::uint64_t trials = 100000;
  SeedOpt seed;
  unsigned workers = default_workers();
  std::string out, trial_log, format = "csv";
};

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

Rational ratio(std::uint64_t a, std::uint64_t b) {
  Rational r(BigInt(static_cast<unsigned long>(a)), BigInt(static_cast<unsigned long>(b)));
  r.canonicalize();
  return r;
}

std::string wilson_detail(std::uint64_t k, std::uint64_t n, const Rational& theory) {
  const auto [lo, hi] = el::expharness::wilson_interval(k, n, 3.0);
  return "observed " + el::exactprob::to_decimal(ratio(k, n)) + " vs " + fmt_rational(theory) + ", 3-sigma Wilson [" +
         el::report::format_double(lo) + ", " + el::report::format_double(hi) + "]";
}

el::expharness::ExperimentConfig build_sim_config(const SimOpts& o, std::uint64_t seed) {
  namespace ex = el::expharness;
  ex::ExperimentConfig cfg{
      ex::LinSetting{}, el::learners::LinearBiasERM{el::linclass::SubclassSpec::full(el::ffmat::PrimeField(2), 1)},
      el::estimators::EmpiricalLoss{}};
  if (o.setting == "lin") {
    const el::ffmat::PrimeField f(o.q);
    (void)f;
    if (o.d < 1 || o.n < 1 || o.n > o.d) throw el::ConfigError("Lin setting needs 1 <= n <= d");
    cfg.setting = ex::LinSetting{o.q, o.d, o.n, parse_family(o.family, o.d, o.n)};
    cfg.learner = parse_lin_learner(o.learner.empty() ? "a0" : o.learner, o.q, o.d, o.n);
    cfg.estimator = parse_estimator(o.estimator.empty() ? "parity-opt-det" : o.estimator);
  } else if (o.setting == "shattered") {
    if (o.family != "auto") throw el::ConfigError("--family applies to Lin settings only");
    cfg.setting = ex::ShatteredSetting{o.d, o.n};
    cfg.learner = parse_shattered_learner(o.learner.empty() ? "uniform" : o.learner);
    cfg.estimator = parse_estimator(o.estimator.empty() ? "empirical" : o.estimator);
  } else {
    throw el::ConfigError("setting must be lin or shattered");
  }
  cfg.epsilon = parse_rational(o.epsilon);
  cfg.trials = o.trials;
  cfg.seed = seed;
  cfg.workers = o.workers;
  return cfg;
}

Json sim_config_json(const SimOpts& o, const el::expharness::ExperimentConfig& cfg) {
  Json j{{"setting", o.setting}};
  if (o.setting == "lin") {
    j["q"] = o.q;
    j["family"] = el::expharness::family_name(std::get<el::expharness::LinSetting>(cfg.setting).family);
  }
  j["d"] = o.d;
  j["n"] = o.n;
  j["learner"] = el::learners::learner_name(cfg.learner);
  j["estimator"] = el::estimators::estimator_name(cfg.estimator);
  j["epsilon"] = el::exactprob::to_fraction(cfg.epsilon);
  j["trials"] = cfg.trials;
  j["format"] = o.format;
  return j;
}

std::vector<Check> lin_checks(const el::expharness::ExperimentConfig& cfg,
                              const el::expharness::ExperimentResult& res) {
  namespace ex = el::expharness;
  using Kind = el::learners::LinFamily::Kind;
  std::vector<Check> out;
  const auto& ls = std::get<ex::LinSetting>(cfg.setting);
  const auto& s = res.summary;
  const el::ffmat::PrimeField f(ls.q);
  const auto* lb = std::get_if<el::learners::LinearBiasERM>(&cfg.learner);
  const auto canon = el::linclass::canonical_bias(f, ls.d, ls.n);
  if (!lb || !(lb->subclass == canon) || !canon.constrained()) return out;
  const unsigned n = static_cast<unsigned>(ls.n);
  if (ls.family == Kind::D0) {
    const Rational delta = el::exactprob::delta_learn(ls.q, n);
    out.push_back({"learner error on d0 = delta", ex::within_wilson(s.learner_errors, s.trials, delta),
                   wilson_detail(s.learner_errors, s.trials, delta)});
  } else if (ls.family == Kind::D01) {
    const Rational beta = el::exactprob::beta_nonlearn(ls.q, n);
    out.push_back({"learner error on d01 = beta", ex::within_wilson(s.learner_errors, s.trials, beta),
                   wilson_detail(s.learner_errors, s.trials, beta)});
  }
  const Rational span = 1 - el::exactprob::gamma_tv(ls.q, n);
  out.push_back({"constraint-span rate = 1 - gamma", ex::within_wilson(s.spanned, s.trials, span),
                 wilson_detail(s.spanned, s.trials, span)});
  if (const auto* pr = std::get_if<el::estimators::ParityOptimalRand>(&cfg.estimator);
      pr && ls.q == 2 && ls.family == Kind::D01 && pr->c == Rational(1, 2) && cfg.epsilon <= Rational(1, 2)) {
    const auto [lo, hi] = ex::wilson_interval(s.failures, s.trials, 3.0);
    out.push_back({"randomized estimator failure >= 0.14", hi >= 0.14,
                   "observed " + el::exactprob::to_decimal(s.rate) + ", 3-sigma Wilson upper " +
                       el::report::format_double(hi)});
    (void)lo;
  }
  return out;
}

std::vector<Check> shattered_checks(const el::expharness::ExperimentConfig& cfg,
                                    const el::expharness::ExperimentResult& res) {
  namespace lr = el::learners;
  std::vector<Check> out;
  const auto& sh = std::get<el::expharness::ShatteredSetting>(cfg.setting);
  const auto* u = std::get_if<lr::UniformShatteredERM>(&cfg.learner);
  const bool uniform = (u && u->coin.num * 2 == u->coin.den) || std::holds_alternative<lr::BayesLikeERM>(cfg.learner);
  const auto* c = std::get_if<lr::ConstantERM>(&cfg.learner);
  if (uniform) {
    // Given m distinct sample points the loss is Binomial(d - m, 1/2) / d.
    Rational target(0), loss(0), var(0);
    for (const auto& r : res.records) {
      const auto unseen = static_cast<unsigned long>(sh.d - static_cast<std::size_t>(r.distinct));
      target += el::shattered::expected_erm_loss(sh.d, static_cast<std::size_t>(r.distinct));
      var += Rational(unseen, 4ul * sh.d * sh.d);
      loss += r.true_loss;
    }
    const Rational n_rec(static_cast<unsigned long>(res.records.size()));
    target /= n_rec;
    loss /= n_rec;
    const double sigma = std::sqrt(var.get_d()) / n_rec.get_d();
    const double dev = std::fabs(Rational(loss - target).get_d());
    out.push_back({"mean ERM loss = mixture of (d-m)/(2d)", dev <= 3 * sigma,
                   "observed " + el::exactprob::to_decimal(loss) + " vs " + el::exactprob::to_decimal(target) +
                       ", sigma " + el::report::format_double(sigma) + " (distinct-sample reference " +
                       el::exactprob::to_fraction(el::shattered::expected_erm_loss(sh.d, sh.n)) + ")"});
  } else if (c && !c->fixed) {
    bool zero = true;
    for (const auto& r : res.records) zero = zero && r.true_loss == 0;
    out.push_back({"matched constant ERM loss is exactly 0", zero, ""});
  }
  return out;
}

int cmd_simulate(SimOpts& o, Registry& reg) {
  namespace ex = el::expharness;
  check_format(o.format);
  const std::uint64_t seed = o.seed.resolve(reg);
  auto cfg = build_sim_config(o, seed);
  cfg.keep_records = true;
  const auto res = ex::run_experiment(cfg);
  const auto& s = res.summary;
  const Json prov = el::report::provenance("simulate " + o.setting, sim_config_json(o, cfg), seed);

  emit(o.out, [&](std::ostream& os) {
    if (o.format == "jsonl") {
      os << Json{{"provenance", prov}}.dump() << '\n' << el::report::summary_json(s).dump() << '\n';
    } else {
      el::report::write_summary_csv(os, prov, {s});
    }
  });
  if (!o.trial_log.empty()) {
    std::ofstream tl(o.trial_log, std::ios::binary);
    if (!tl) throw el::ConfigError("cannot write " + o.trial_log);
    el::report::write_trials_jsonl(tl, prov, res.records);
  }

  std::vector<Check> checks;
  if (s.theory) {
    checks.push_back({"failure rate = closed form", ex::within_wilson(s.failures, s.trials, *s.theory),
                      wilson_detail(s.failures, s.trials, *s.theory)});
  }
  const auto more = o.setting == "lin" ? lin_checks(cfg, res) : shattered_checks(cfg, res);
  checks.insert(checks.end(), more.begin(), more.end());

  auto& e = std::cerr;
  e << s.setting << "  learner=" << s.learner << "  estimator=" << s.estimator
    << "  epsilon=" << el::exactprob::to_fraction(s.epsilon) << "  trials=" << s.trials << "  seed=" << seed << '\n';
  e << "  failure rate     " << fmt_rational(s.rate) << '\n';
  e << "  wilson 95%       [" << el::report::format_double(s.wilson_lo) << ", " << el::report::format_double(s.wilson_hi)
    << "]\n";
  if (s.theory) e << "  theory           " << fmt_rational(*s.theory) << "  z=" << el::report::format_double(*s.z) << '\n';
  e << "  mean true loss   " << fmt_rational(s.mean_true_loss) << '\n';
  e << "  learner errors   " << s.learner_errors << '\n';
  if (o.setting == "lin" && std::get<ex::LinSetting>(cfg.setting).n < o.d) e << "  constraint span  " << s.spanned << '\n';
  bool ok = true;
  for (const auto& c : checks) {
    e << (c.pass ? "  PASS  " : "  FAIL  ") << c.name;
    if (!c.detail.empty()) e << "  (" << c.detail << ")";
    e << '\n';
    ok = ok && c.pass;
  }
  return ok ? 0 : kExitCheck;
}

// -------------------------------------------------------------- tradeoff

struct TradeoffOpts {
  std::string setting = "shattered";
  std::uint32_t q = 2;
  std::size_t d = 20, n = 10;
  std::string learner = "a0", estimator = "all", epsilon;
  std::uint64_t trials = 100000;
  SeedOpt seed;
  unsigned workers = default_workers();
  std::string out, format = "csv";
};

int cmd_tradeoff(TradeoffOpts& o, Registry& reg) {
  namespace ex = el::expharness;
  namespace lr = el::learners;
  check_format(o.format);
  const std::uint64_t seed = o.seed.resolve(reg);
  ex::ExperimentConfig base{ex::ShatteredSetting{o.d, o.n}, lr::ConstantERM{}, el::estimators::EmpiricalLoss{}};
  base.trials = o.trials;
  base.seed = seed;
  base.workers = o.workers;
  base.keep_records = false;
  ex::ExperimentConfig item1 = base, item2 = base;
  Rational default_eps;
  if (o.setting == "shattered") {
    if (o.n > o.d || o.d < 1) throw el::ConfigError("shattered setting needs n <= d");
    item2.learner = lr::UniformShatteredERM{};
    default_eps = Rational(static_cast<unsigned long>(o.d - o.n), 4ul * o.d);
  } else if (o.setting == "lin") {
    if (o.n < 1 || o.n >= o.d) throw el::ConfigError("Lin trade-off needs 1 <= n < d");
    const el::ffmat::PrimeField f(o.q);
    (void)f;
    item1.setting = ex::LinSetting{o.q, o.d, o.n, lr::LinFamily::Kind::D0};
    item2.setting = ex::LinSetting{o.q, o.d, o.n, lr::LinFamily::Kind::D01};
    item1.learner = item2.learner = parse_lin_learner(o.learner, o.q, o.d, o.n);
    default_eps = el::exactprob::lin_theory(o.q, o.d, o.n).nu;
  } else {
    throw el::ConfigError("setting must be lin or shattered");
  }
  item1.epsilon = item2.epsilon = o.epsilon.empty() ? default_eps : parse_rational(o.epsilon);
  std::vector<el::estimators::EstimatorSpec> ests;
  if (o.estimator == "all") {
    ests = ex::builtin_estimators(item2.setting);
  } else {
    ests.push_back(parse_estimator(o.estimator));
  }

  std::vector<ex::TradeoffReport> reports;
  for (const auto& est : ests) {
    item1.estimator = item2.estimator = est;
    reports.push_back(ex::tradeoff_report(item1, item2));
  }

  Json cfg{{"setting", o.setting}};
  if (o.setting == "lin") {
    cfg["q"] = o.q;
    cfg["learner"] = lr::learner_name(item1.learner);
  }
  cfg["d"] = o.d;
  cfg["n"] = o.n;
  cfg["estimator"] = o.estimator;
  cfg["epsilon"] = el::exactprob::to_fraction(item1.epsilon);
  cfg["trials"] = o.trials;
  cfg["format"] = o.format;
  const Json prov = el::report::provenance("tradeoff " + o.setting, cfg, seed);

  emit(o.out, [&](std::ostream& os) {
    if (o.format == "jsonl") {
      os << Json{{"provenance", prov}}.dump() << '\n';
      for (const auto& r : reports) os << el::report::tradeoff_json(r).dump() << '\n';
      return;
    }
    os << el::report::provenance_header(prov);
    os << "setting,estimator,epsilon,epsilon_threshold,item1_rate,item1_threshold,item1_violated,"
          "item2_rate,item2_threshold,item2_violated,verdict\n";
    for (const auto& r : reports) {
      os << r.setting << ',' << r.estimator << ',' << el::exactprob::to_decimal(r.epsilon) << ','
         << el::exactprob::to_decimal(r.epsilon_threshold) << ',' << el::exactprob::to_decimal(r.item1.summary.rate)
         << ',' << el::exactprob::to_decimal(r.item1.threshold) << ',' << (r.item1.violated ? 1 : 0) << ','
         << el::exactprob::to_decimal(r.item2.summary.rate) << ',' << el::exactprob::to_decimal(r.item2.threshold)
         << ',' << (r.item2.violated ? 1 : 0) << ',' << (r.verdict ? "pass" : "fail") << '\n';
    }
  });

  bool ok = true;
  auto& e = std::cerr;
  e << "trade-off " << reports.front().setting << "  epsilon=" << el::exactprob::to_fraction(item1.epsilon)
    << "  (stated at " << el::exactprob::to_fraction(reports.front().epsilon_threshold) << ")  trials=" << o.trials
    << "  seed=" << seed << '\n';
  for (const auto& r : reports) {
    e << (r.verdict ? "  PASS  " : "  FAIL  ") << std::left << std::setw(22) << r.estimator << " item1 "
      << el::exactprob::to_decimal(r.item1.summary.rate) << (r.item1.violated ? " >= " : " < ")
      << el::exactprob::to_decimal(r.item1.threshold) << " - 3sd   item2 " << el::exactprob::to_decimal(r.item2.summary.rate)
      << (r.item2.violated ? " >= " : " < ") << el::exactprob::to_decimal(r.item2.threshold) << " - 3sd\n";
    ok = ok && r.verdict;
  }
  return ok ? 0 : kExitCheck;
}

// ----------------------------------------------------------------- audit

struct AuditOpts {
  std::string setting = "shattered";
  std::string bound = "zero";
  std::uint32_t q = 2;
  std::size_t d = 16, n = 8;
  std::string family = "auto", epsilon;
  std::uint64_t trials = 10000;
  SeedOpt seed;
  unsigned workers = default_workers();
  std::string out, format = "csv";
};

int cmd_audit(AuditOpts& o, Registry& reg) {
  namespace ex = el::expharness;
  check_format(o.format);
  ex::AuditConfig cfg{ex::ShatteredSetting{o.d, o.n}, parse_bound(o.bound), std::nullopt};
  if (o.setting == "lin") {
    const el::ffmat::PrimeField f(o.q);
    (void)f;
    if (o.d < 1 || o.n < 1 || o.n > o.d) throw el::ConfigError("Lin setting needs 1 <= n <= d");
    cfg.setting = ex::LinSetting{o.q, o.d, o.n, parse_family(o.family, o.d, o.n)};
  } else if (o.setting != "shattered") {
    throw el::ConfigError("setting must be lin or shattered");
  }
  if (!o.epsilon.empty()) cfg.epsilon = parse_rational(o.epsilon);
  cfg.trials = o.trials;
  cfg.seed = o.seed.resolve(reg);
  cfg.workers = o.workers;
  const auto a = ex::audit_bound(cfg);

  Json jc{{"setting", o.setting}};
  if (o.setting == "lin") {
    jc["q"] = o.q;
    jc["family"] = ex::family_name(std::get<ex::LinSetting>(cfg.setting).family);
  }
  jc["d"] = o.d;
  jc["n"] = o.n;
  jc["bound"] = a.bound;
  jc["bound_constant"] = el::exactprob::to_fraction(cfg.bound.constant);
  jc["bound_weight"] = el::exactprob::to_fraction(cfg.bound.weight_scale);
  jc["epsilon"] = el::exactprob::to_fraction(a.epsilon);
  jc["trials"] = o.trials;
  jc["format"] = o.format;
  const Json prov = el::report::provenance("audit " + o.setting, jc, cfg.seed);
  emit(o.out, [&](std::ostream& os) {
    if (o.format == "jsonl") {
      os << Json{{"provenance", prov}}.dump() << '\n' << el::report::audit_json(a).dump() << '\n';
    } else {
      el::report::write_audit_csv(os, prov, a);
    }
  });

  auto& e = std::cerr;
  e << "audit of bound '" << a.bound << "' on " << a.setting << "  trials=" << a.trials << "  seed=" << cfg.seed << '\n';
  e << "  alpha                      " << fmt_rational(a.alpha) << '\n';
  e << "  epsilon                    " << fmt_rational(a.epsilon) << '\n';
  e << "  validity rate              " << fmt_rational(a.validity_rate) << "  (" << a.valid << " valid, "
    << (a.trials - a.valid) << " violations)\n";
  e << "  P(L_D(A_C(S)) > alpha)     " << fmt_rational(a.exceed_alpha_rate) << '\n';
  e << "  mean violation size        " << fmt_rational(a.mean_violation) << '\n';
  e << "  mean true loss of A_C      " << fmt_rational(a.mean_true_loss) << '\n';
  e << "  looseness on matched constant ERMs:\n";
  for (const auto& [p, v] : a.looseness_quantiles) {
    e << "    q" << std::left << std::setw(6) << el::report::format_double(p) << fmt_rational(v) << '\n';
  }
  e << "  P(looseness >= alpha - eps) " << fmt_rational(a.loose_rate) << "  vs validity - 1/2 = "
    << fmt_rational(a.loose_threshold) << (a.loose_meets_threshold ? "  (meets)" : "  (below)") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"estimlab: exact and Monte Carlo checks of learnability vs loss-estimability"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(el::report::kToolName) + " " + el::report::kToolVersion);
  Registry reg;

  RankDistOpts rd;
  auto* rank_cmd = app.add_subcommand("rank-dist", "rank law of uniform random matrices over F_q");
  reg.bind(rank_cmd, "--q", rd.q, "field order (prime)");
  reg.bind(rank_cmd, "--n1", rd.n1, "rows");
  reg.bind(rank_cmd, "--n2", rd.n2, "columns");
  reg.bind(rank_cmd, "--trials", rd.trials, "Monte Carlo trials (0 = exact column only)");
  rd.seed.opt = reg.bind(rank_cmd, "--seed", rd.seed.value, "master seed (default $ESTIMLAB_SEED or 0)");
  reg.bind(rank_cmd, "--workers", rd.workers, "worker threads");
  reg.bind(rank_cmd, "--out", rd.out, "output file (default stdout)");
  reg.bind(rank_cmd, "--format", rd.format, "table, csv or jsonl");

  EtaOpts eo;
  auto* eta_cmd = app.add_subcommand("eta-table", "confidence constant of the two-class linear construction");
  eta_cmd->add_option("--q", eo.qs, "comma-separated primes")->delimiter(',');
  eta_cmd->add_option("--n", eo.ns, "comma-separated sample sizes")->delimiter(',');
  eta_cmd->add_option("--out", eo.out, "output file (default stdout)");
  eta_cmd->add_option("--format", eo.format, "table, csv or jsonl");

  SimOpts so;
  auto* sim_cmd = app.add_subcommand("simulate", "run one experiment and check it against the closed forms");
  reg.config_option(sim_cmd);
  reg.bind(sim_cmd, "setting", so.setting, "lin or shattered")->required()->check(CLI::IsMember({"lin", "shattered"}));
  reg.bind(sim_cmd, "--q", so.q, "field order (Lin)");
  reg.bind(sim_cmd, "--d", so.d, "dimension / domain size");
  reg.bind(sim_cmd, "--n", so.n, "sample size");
  reg.bind(sim_cmd, "--family", so.family, "d0, d01, full or auto (Lin)");
  reg.bind(sim_cmd, "--learner", so.learner, "Lin: a0 a1 uniform bayes constant boundmin:<b>; shattered: uniform biased:<p> bayes constant boundmin:<b>");
  reg.bind(sim_cmd, "--estimator", so.estimator, "empirical, constant:<c>, parity-opt-det[:c], parity-opt-rand[:c], random");
  reg.bind(sim_cmd, "--epsilon", so.epsilon, "accuracy (fraction or decimal, read exactly)");
  reg.bind(sim_cmd, "--trials", so.trials, "trials");
  so.seed.opt = reg.bind(sim_cmd, "--seed", so.seed.value, "master seed (default $ESTIMLAB_SEED or 0)");
  reg.bind(sim_cmd, "--workers", so.workers, "worker threads");
  reg.bind(sim_cmd, "--out", so.out, "summary file (default stdout)");
  reg.bind(sim_cmd, "--trial-log", so.trial_log, "per-trial JSON-lines file");
  reg.bind(sim_cmd, "--format", so.format, "csv or jsonl");

  TradeoffOpts to;
  auto* trade_cmd = app.add_subcommand("tradeoff", "check that estimators fail one of the two trade-off items");
  reg.config_option(trade_cmd);
  reg.bind(trade_cmd, "setting", to.setting, "shattered or lin")->check(CLI::IsMember({"lin", "shattered"}));
  reg.bind(trade_cmd, "--q", to.q, "field order (Lin)");
  reg.bind(trade_cmd, "--d", to.d, "dimension / domain size");
  reg.bind(trade_cmd, "--n", to.n, "sample size");
  reg.bind(trade_cmd, "--learner", to.learner, "Lin learner shared by both items");
  reg.bind(trade_cmd, "--estimator", to.estimator, "estimator, or 'all' for the built-in family");
  reg.bind(trade_cmd, "--epsilon", to.epsilon, "accuracy (default: the level the items are stated at)");
  reg.bind(trade_cmd, "--trials", to.trials, "trials per item");
  to.seed.opt = reg.bind(trade_cmd, "--seed", to.seed.value, "master seed (default $ESTIMLAB_SEED or 0)");
  reg.bind(trade_cmd, "--workers", to.workers, "worker threads");
  reg.bind(trade_cmd, "--out", to.out, "output file (default stdout)");
  reg.bind(trade_cmd, "--format", to.format, "csv or jsonl");

  AuditOpts ao;
  auto* audit_cmd = app.add_subcommand("audit", "validity and looseness of a complexity bound");
  reg.config_option(audit_cmd);
  reg.bind(audit_cmd, "setting", ao.setting, "shattered or lin")->check(CLI::IsMember({"lin", "shattered"}));
  reg.bind(audit_cmd, "--bound", ao.bound, "zero, one, weight, or a JSON file {\"constant\": c, \"weight\": w}");
  reg.bind(audit_cmd, "--q", ao.q, "field order (Lin)");
  reg.bind(audit_cmd, "--d", ao.d, "dimension / domain size");
  reg.bind(audit_cmd, "--n", ao.n, "sample size");
  reg.bind(audit_cmd, "--family", ao.family, "d0, d01, full or auto (Lin)");
  reg.bind(audit_cmd, "--epsilon", ao.epsilon, "looseness slack (default alpha / 2)");
  reg.bind(audit_cmd, "--trials", ao.trials, "trials");
  ao.seed.opt = reg.bind(audit_cmd, "--seed", ao.seed.value, "master seed (default $ESTIMLAB_SEED or 0)");
  reg.bind(audit_cmd, "--workers", ao.workers, "worker threads");
  reg.bind(audit_cmd, "--out", ao.out, "CSV report (default stdout)");
  reg.bind(audit_cmd, "--format", ao.format, "csv or jsonl");

  std::string fault;
  auto* self_cmd = app.add_subcommand("selftest", "run every exhaustive oracle check");
  self_cmd->add_option("--inject-fault", fault, "negative control: gaussian-coeff");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    reg.apply();
    if (*rank_cmd) return cmd_rank_dist(rd, reg);
    if (*eta_cmd) return cmd_eta_table(eo);
    if (*sim_cmd) return cmd_simulate(so, reg);
    if (*trade_cmd) return cmd_tradeoff(to, reg);
    if (*audit_cmd) return cmd_audit(ao, reg);
    if (*self_cmd) return el::tools::run_selftest(fault, std::cout);
  } catch (const el::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const el::GuardExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitCheck;
  }
  return 0;
}
