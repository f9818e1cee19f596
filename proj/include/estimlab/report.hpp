#pragma once

// CSV / JSON-lines rendering with a provenance header on every file.

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "estimlab/expharness.hpp"

namespace estimlab::report {

inline constexpr const char* kToolName = "estimlab";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// {"tool", "version", "command", "config", "seed"}. `config` should already
/// exclude anything that must not change the output (worker count, paths).
Json provenance(const std::string& command, const Json& config, std::uint64_t seed);

/// "# key: value" lines.
std::string provenance_header(const Json& prov);

/// Exact value as "<12 significant digits> (<reduced fraction>)"; fractions
/// longer than `max_fraction` characters are abbreviated by their digit counts.
std::string format_exact(const exactprob::Rational& x, std::size_t max_fraction = 40);
/// printf %.12g.
std::string format_double(double x);

std::string summary_csv_header();
std::string summary_csv_row(const expharness::Summary& s);
void write_summary_csv(std::ostream& os, const Json& prov, const std::vector<expharness::Summary>& rows);

Json summary_json(const expharness::Summary& s);
Json trial_json(const expharness::TrialRecord& r);
/// First line {"provenance": ...}, then one record per line.
void write_trials_jsonl(std::ostream& os, const Json& prov,
                        const std::vector<expharness::TrialRecord>& records);

Json audit_json(const expharness::AuditReport& a);
void write_audit_csv(std::ostream& os, const Json& prov, const expharness::AuditReport& a);

Json tradeoff_json(const expharness::TradeoffReport& t);

}  // namespace estimlab::report
