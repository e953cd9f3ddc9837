#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspec/harness/config.hpp"

namespace fluxspec {

enum class PassState { Pass, Fail, NotApplicable, Candidate, Error };

inline const char* to_string(PassState p) noexcept {
  switch (p) {
    case PassState::Pass: return "true";
    case PassState::Fail: return "false";
    case PassState::NotApplicable: return "na";
    case PassState::Candidate: return "candidate";
    case PassState::Error: return "error";
  }
  return "?";
}

struct ReportRow {
  std::string experiment;
  std::string label;
  double phi = 0.0;
  std::string bc;    ///< "dirichlet", "neumann" or empty
  std::string kind;
  std::optional<double> lambda;
  std::optional<double> lambda_ref;
  std::optional<double> gap;
  std::optional<double> est_error;
  PassState pass = PassState::NotApplicable;
  int seq = 0;       ///< tie-breaker within one label and flux
  bool control = false;
  bool strict = false;  ///< decided by gap > k est_error
  std::string note;  ///< error text, not part of the CSV
};

inline bool row_less(const ReportRow& a, const ReportRow& b) {
  return std::tie(a.experiment, a.label, a.phi, a.kind, a.bc, a.seq) <
         std::tie(b.experiment, b.label, b.phi, b.kind, b.bc, b.seq);
}

struct ReportSummary {
  int rows = 0;
  int passed = 0;
  int failed = 0;
  int not_applicable = 0;
  int candidates = 0;
  int errors = 0;
  int excluded = 0;
};

struct VerificationReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  double margin = 10.0;
  std::uint64_t config_hash = 0;
  std::string version = kVersion;
  nlohmann::json observations = nlohmann::json::object();
  int excluded = 0;

  void sort() { std::stable_sort(rows.begin(), rows.end(), row_less); }

  ReportSummary summary() const {
    ReportSummary s;
    s.rows = static_cast<int>(rows.size());
    s.excluded = excluded;
    for (const auto& r : rows) {
      switch (r.pass) {
        case PassState::Pass: ++s.passed; break;
        case PassState::Fail: ++s.failed; break;
        case PassState::NotApplicable: ++s.not_applicable; break;
        case PassState::Candidate: ++s.candidates; break;
        case PassState::Error: ++s.errors; break;
      }
    }
    return s;
  }

  bool all_pass() const {
    const auto s = summary();
    return s.failed == 0 && s.errors == 0;
  }
};

inline std::string csv_header() { return "experiment,label,phi,bc,kind,lambda,lambda_ref,gap,est_error,pass"; }

namespace detail {

inline std::string fmt_opt(const std::optional<double>& v, const char* f) {
  if (!v || !std::isfinite(*v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, f, *v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline std::string csv_row(const ReportRow& r) {
  char phi[48];
  std::snprintf(phi, sizeof phi, "%.10g", r.phi);
  return detail::csv_field(r.experiment) + ',' + detail::csv_field(r.label) + ',' + phi + ',' + r.bc + ',' + r.kind +
         ',' + detail::fmt_opt(r.lambda, "%.12g") + ',' + detail::fmt_opt(r.lambda_ref, "%.12g") + ',' +
         detail::fmt_opt(r.gap, "%.6e") + ',' + detail::fmt_opt(r.est_error, "%.3e") + ',' + to_string(r.pass);
}

/// Schema line, optional timestamp line, provenance line, column header, rows.
inline void write_csv(std::ostream& os, const VerificationReport& rep, bool timestamp = true) {
  os << "# fluxspec-schema v1\n";
  if (timestamp) os << "# generated " << detail::utc_timestamp() << "\n";
  char prov[160];
  std::snprintf(prov, sizeof prov, "# config-hash %016llx version %s margin-k %g\n",
                static_cast<unsigned long long>(rep.config_hash), rep.version.c_str(), rep.margin);
  os << prov << csv_header() << "\n";
  for (const auto& r : rep.rows) os << csv_row(r) << "\n";
}

inline nlohmann::json opt_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline nlohmann::json to_json(const ReportRow& r) {
  nlohmann::json j{{"experiment", r.experiment}, {"label", r.label},   {"phi", r.phi},
                   {"bc", r.bc},                 {"kind", r.kind},     {"lambda", opt_json(r.lambda)},
                   {"lambda_ref", opt_json(r.lambda_ref)},             {"gap", opt_json(r.gap)},
                   {"est_error", opt_json(r.est_error)},               {"pass", to_string(r.pass)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline nlohmann::json summary_json(const VerificationReport& rep) {
  const auto s = rep.summary();
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(rep.config_hash));
  nlohmann::json j{{"experiment", rep.experiment},
                   {"rows", s.rows},
                   {"passed", s.passed},
                   {"failed", s.failed},
                   {"na", s.not_applicable},
                   {"candidates", s.candidates},
                   {"errors", s.errors},
                   {"excluded", s.excluded},
                   {"margin_k", rep.margin},
                   {"all_pass", rep.all_pass()},
                   {"config_hash", hash},
                   {"version", rep.version},
                   {"observations", rep.observations}};
  // smallest gap / (k est_error) over the rows decided by the strict margin
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows)
    if (r.strict && r.gap && r.est_error && *r.est_error > 0.0)
      worst = std::min(worst, *r.gap / (rep.margin * *r.est_error));
  j["worst_margin"] = std::isfinite(worst) ? nlohmann::json(worst) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const VerificationReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  return {{"schema", "fluxspec-schema v1"}, {"summary", summary_json(rep)}, {"rows", rows}};
}

}  // namespace fluxspec
