#pragma once

#include <a3kit/error.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace a3kit {

enum class RunStatus { Pass, Fail, CompileError };

inline const char* to_string(RunStatus s) noexcept {
  switch (s) {
  case RunStatus::Pass: return "pass";
  case RunStatus::Fail: return "fail";
  case RunStatus::CompileError: return "compile_error";
  }
  return "?";
}

struct RunRecord {
  std::string test_id;
  RunStatus status = RunStatus::Fail;
  std::vector<std::string> covered_focal_ids;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Execution outcome per test, as produced by an external runner.
struct RunReport {
  std::vector<RunRecord> records;
};

/// Throws "invalid_report" when test ids repeat or a compile error claims
/// coverage.
inline void validate(const RunReport& report) {
  std::unordered_set<std::string> seen;
  for (const auto& r : report.records) {
    if (!seen.insert(r.test_id).second) throw Error("invalid_report", "duplicate test_id " + r.test_id);
    if (r.status == RunStatus::CompileError && !r.covered_focal_ids.empty()) {
      throw Error("invalid_report", "compile_error record " + r.test_id + " lists covered focal methods");
    }
  }
}

namespace detail {

inline void require_known_tests(const std::vector<TestCase>& tests, const RunReport& report) {
  std::unordered_set<std::string> ids;
  for (const auto& t : tests) ids.insert(t.id);
  for (const auto& r : report.records) {
    if (!ids.contains(r.test_id)) throw Error("unknown_test_id", "report references unknown test " + r.test_id);
  }
}

inline bool is_correct(const TestCase& t, const RunRecord* r) {
  if (r == nullptr || r->status != RunStatus::Pass) return false;
  return std::find(r->covered_focal_ids.begin(), r->covered_focal_ids.end(), t.focal_id) !=
         r->covered_focal_ids.end();
}

inline std::unordered_map<std::string, const RunRecord*> index_report(const RunReport& report) {
  std::unordered_map<std::string, const RunRecord*> by_id;
  for (const auto& r : report.records) by_id.emplace(r.test_id, &r);
  return by_id;
}

inline std::unordered_set<std::string> covered_by_passing(const RunReport& report) {
  std::unordered_set<std::string> covered;
  for (const auto& r : report.records) {
    if (r.status != RunStatus::Pass) continue;
    covered.insert(r.covered_focal_ids.begin(), r.covered_focal_ids.end());
  }
  return covered;
}

} // namespace detail

/// Percentage of generated tests that pass and invoke their own focal
/// method. Tests missing from the report count as incorrect.
inline double correct_test_pct(const std::vector<TestCase>& tests, const RunReport& report) {
  if (tests.empty()) throw Error("no_tests", "no generated tests to score");
  detail::require_known_tests(tests, report);
  const auto by_id = detail::index_report(report);
  std::size_t correct = 0;
  for (const auto& t : tests) {
    auto it = by_id.find(t.id);
    if (detail::is_correct(t, it == by_id.end() ? nullptr : it->second)) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(tests.size());
}

/// Percentage of focal methods covered by at least one passing test.
inline double focal_coverage_pct(const std::vector<FocalMethod>& focal, const RunReport& report) {
  if (focal.empty()) throw Error("no_focal_methods", "no focal methods to cover");
  const auto covered = detail::covered_by_passing(report);
  std::size_t n = 0;
  for (const auto& f : focal) n += covered.contains(f.id) ? 1 : 0;
  return 100.0 * static_cast<double>(n) / static_cast<double>(focal.size());
}

/// (new - old) / old * 100.
inline double relative_improvement(double m_new, double m_old) {
  if (m_old == 0.0) throw Error("division_by_zero_baseline", "baseline measure is zero");
  return (m_new - m_old) / m_old * 100.0;
}

/// 100 * num / den rounded half-up to two decimals, in exact integer
/// arithmetic.
inline double pct_2dp(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return 0.0;
  const std::uint64_t hundredths = (20000 * num + den) / (2 * den);
  return static_cast<double>(hundredths) / 100.0;
}

/// Half-up rounding of a real percentage to two decimals.
inline double round_2dp(double x) {
  const double scaled = x * 100.0;
  return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled))) / 100.0;
}

struct ProjectMetrics {
  std::size_t n_tests = 0;
  std::size_t n_correct = 0;
  std::size_t n_focal = 0;
  std::size_t n_covered = 0;

  [[nodiscard]] double correct_pct() const { return pct_2dp(n_correct, n_tests); }
  [[nodiscard]] double coverage_pct() const { return pct_2dp(n_covered, n_focal); }

  ProjectMetrics& operator+=(const ProjectMetrics& o) {
    n_tests += o.n_tests;
    n_correct += o.n_correct;
    n_focal += o.n_focal;
    n_covered += o.n_covered;
    return *this;
  }
  friend bool operator==(const ProjectMetrics&, const ProjectMetrics&) = default;
};

struct MetricsSummary {
  std::map<std::string, ProjectMetrics> per_project;
  ProjectMetrics totals; // pooled counts, never averaged percentages
};

/// Per-project and pooled metrics. A test's project is its focal method's.
inline MetricsSummary summarize(const std::vector<FocalMethod>& focal, const std::vector<TestCase>& tests,
                                const RunReport& report) {
  validate(report);
  detail::require_known_tests(tests, report);
  std::unordered_map<std::string, const FocalMethod*> focal_by_id;
  for (const auto& f : focal) focal_by_id.emplace(f.id, &f);

  const auto by_id = detail::index_report(report);
  const auto covered = detail::covered_by_passing(report);
  MetricsSummary s;
  for (const auto& f : focal) {
    auto& p = s.per_project[f.project];
    ++p.n_focal;
    if (covered.contains(f.id)) ++p.n_covered;
  }
  for (const auto& t : tests) {
    auto f = focal_by_id.find(t.focal_id);
    if (f == focal_by_id.end()) throw Error("unknown_focal_id", "test " + t.id + " targets unknown focal method");
    auto& p = s.per_project[f->second->project];
    ++p.n_tests;
    auto r = by_id.find(t.id);
    if (detail::is_correct(t, r == by_id.end() ? nullptr : r->second)) ++p.n_correct;
  }
  for (const auto& [name, p] : s.per_project) s.totals += p;
  return s;
}

} // namespace a3kit
