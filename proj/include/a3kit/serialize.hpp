#pragma once

// JSON and JSON-lines encodings of the pipeline records, plus file helpers.
// Every JSON-lines file starts with a {"schema_version": N} header line.

#include <a3kit/corpus_prep.hpp>
#include <a3kit/error.hpp>
#include <a3kit/evaluator.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/verifier.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

namespace a3kit {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// --- enums -----------------------------------------------------------------

inline RunStatus run_status_from(std::string_view s) {
  if (s == "pass") return RunStatus::Pass;
  if (s == "fail") return RunStatus::Fail;
  if (s == "compile_error") return RunStatus::CompileError;
  throw Error("input_format", "unknown run status '" + std::string(s) + "'");
}

inline RepairKind repair_kind_from(std::string_view s) {
  for (auto k : {RepairKind::ParenRepair, RepairKind::NameRepair, RepairKind::SignatureRepair}) {
    if (s == to_string(k)) return k;
  }
  throw Error("input_format", "unknown repair kind '" + std::string(s) + "'");
}

inline LintKind lint_kind_from(std::string_view s) {
  for (auto k : {LintKind::AssertionArity, LintKind::UnknownAssertion, LintKind::PrivateAccessSuspect}) {
    if (s == to_string(k)) return k;
  }
  throw Error("input_format", "unknown lint kind '" + std::string(s) + "'");
}

// --- records ---------------------------------------------------------------

inline void to_json(json& j, const FocalContext& c) {
  j = json{{"constructors", c.constructors}, {"sibling_signatures", c.sibling_signatures}, {"fields", c.fields}};
}
inline void from_json(const json& j, FocalContext& c) {
  j.at("constructors").get_to(c.constructors);
  j.at("sibling_signatures").get_to(c.sibling_signatures);
  j.at("fields").get_to(c.fields);
}

inline void to_json(json& j, const FocalMethod& f) {
  j = json{{"id", f.id},         {"project", f.project}, {"class_name", f.class_name},
           {"signature", f.signature}, {"body", f.body},   {"context", f.context}};
}
inline void from_json(const json& j, FocalMethod& f) {
  j.at("id").get_to(f.id);
  j.at("project").get_to(f.project);
  j.at("class_name").get_to(f.class_name);
  j.at("signature").get_to(f.signature);
  j.at("body").get_to(f.body);
  j.at("context").get_to(f.context);
}

inline void to_json(json& j, const TestCase& t) {
  j = json{{"id", t.id}, {"focal_id", t.focal_id}, {"text", t.text}, {"generator_id", t.generator_id}};
  j["logprob"] = t.logprob ? json(*t.logprob) : json(nullptr);
}
inline void from_json(const json& j, TestCase& t) {
  j.at("id").get_to(t.id);
  j.at("focal_id").get_to(t.focal_id);
  j.at("text").get_to(t.text);
  t.generator_id = j.value("generator_id", std::string{});
  if (auto it = j.find("logprob"); it != j.end() && !it->is_null()) {
    t.logprob = it->get<double>();
  } else {
    t.logprob.reset();
  }
}

inline void to_json(json& j, const AssertPair& p) {
  j = json{{"focal_method", p.focal_method}, {"assertion", p.assertion}};
}
inline void from_json(const json& j, AssertPair& p) {
  j.at("focal_method").get_to(p.focal_method);
  j.at("assertion").get_to(p.assertion);
}

inline void to_json(json& j, const MaskedPair& m) {
  j = json{{"masked_input", m.masked_input}, {"target", m.target}, {"masked_indices", m.masked_indices},
           {"seed", m.seed}};
}
inline void from_json(const json& j, MaskedPair& m) {
  j.at("masked_input").get_to(m.masked_input);
  j.at("target").get_to(m.target);
  j.at("masked_indices").get_to(m.masked_indices);
  j.at("seed").get_to(m.seed);
}

inline void to_json(json& j, const SplitManifest& m) {
  j = json{{"schema_version", kSchemaVersion}, {"train_ids", m.train_ids}, {"valid_ids", m.valid_ids},
           {"holdout_ids", m.holdout_ids}, {"seed", m.seed}};
}
inline void from_json(const json& j, SplitManifest& m) {
  j.at("train_ids").get_to(m.train_ids);
  j.at("valid_ids").get_to(m.valid_ids);
  j.at("holdout_ids").get_to(m.holdout_ids);
  j.at("seed").get_to(m.seed);
}

inline void to_json(json& j, const RunRecord& r) {
  j = json{{"test_id", r.test_id}, {"status", to_string(r.status)}, {"covered_focal_ids", r.covered_focal_ids}};
}
inline void from_json(const json& j, RunRecord& r) {
  j.at("test_id").get_to(r.test_id);
  r.status = run_status_from(j.at("status").get<std::string>());
  r.covered_focal_ids = j.value("covered_focal_ids", std::vector<std::string>{});
}

inline void to_json(json& j, const Lint& l) {
  j = json{{"kind", to_string(l.kind)}, {"message", l.message}, {"token_offset", l.token_offset},
           {"definite", l.definite}};
}
inline void from_json(const json& j, Lint& l) {
  l.kind = lint_kind_from(j.at("kind").get<std::string>());
  j.at("message").get_to(l.message);
  j.at("token_offset").get_to(l.token_offset);
  l.definite = j.value("definite", true);
}

inline void to_json(json& j, const RepairReport& r) {
  json applied = json::array();
  for (auto k : r.applied) applied.push_back(to_string(k));
  j = json{{"test_id", r.test_id}, {"applied", applied},     {"diagnostics", r.diagnostics},
           {"notes", r.notes},     {"before", r.before},     {"after", r.after}};
}
inline void from_json(const json& j, RepairReport& r) {
  j.at("test_id").get_to(r.test_id);
  r.applied.clear();
  for (const auto& k : j.at("applied")) r.applied.push_back(repair_kind_from(k.get<std::string>()));
  j.at("diagnostics").get_to(r.diagnostics);
  r.notes = j.value("notes", std::vector<std::string>{});
  j.at("before").get_to(r.before);
  j.at("after").get_to(r.after);
}

inline json metrics_json(const ProjectMetrics& p) {
  return json{{"correct_pct", p.correct_pct()}, {"coverage_pct", p.coverage_pct()}, {"n_tests", p.n_tests},
              {"n_correct", p.n_correct},       {"n_focal", p.n_focal},             {"n_covered", p.n_covered}};
}

inline json summary_json(const MetricsSummary& s) {
  json per = json::object();
  for (const auto& [name, p] : s.per_project) per[name] = metrics_json(p);
  return json{{"schema_version", kSchemaVersion}, {"per_project", per}, {"totals", metrics_json(s.totals)}};
}

// --- JSON lines ------------------------------------------------------------

template <typename T>
std::string to_jsonl(const std::vector<T>& records) {
  std::string out = json{{"schema_version", kSchemaVersion}}.dump();
  out += '\n';
  for (const auto& r : records) {
    out += json(r).dump();
    out += '\n';
  }
  return out;
}

/// Parses JSON lines, skipping blank lines and the optional header.
inline std::vector<json> parse_jsonl(std::string_view content, const std::string& source_name) {
  std::vector<json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("input_format", source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) throw Error("input_format", source_name + ":" + std::to_string(line_no) + ": not an object");
    if (j.size() == 1 && j.contains("schema_version")) {
      if (j["schema_version"] != kSchemaVersion) {
        throw Error("input_format", source_name + ": unsupported schema_version " + j["schema_version"].dump());
      }
      continue;
    }
    out.push_back(std::move(j));
  }
  return out;
}

template <typename T>
std::vector<T> from_jsonl(std::string_view content, const std::string& source_name) {
  std::vector<T> out;
  std::size_t n = 0;
  for (const auto& j : parse_jsonl(content, source_name)) {
    ++n;
    try {
      out.push_back(j.get<T>());
    } catch (const json::exception& e) {
      throw Error("input_format", source_name + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline RunReport report_from_jsonl(std::string_view content, const std::string& source_name) {
  RunReport r;
  r.records = from_jsonl<RunRecord>(content, source_name);
  validate(r);
  return r;
}

// --- files -----------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("input_missing", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {
// Temp file of the write in progress; removed by the CLI's signal handler.
inline char g_pending_temp[4096] = {0};
} // namespace detail

/// Writes `content` to a temp file beside `path` and renames it into place,
/// so `path` only ever holds a complete file.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  const std::string tmp_str = tmp.string();
  if (tmp_str.size() < sizeof(detail::g_pending_temp)) {
    std::copy(tmp_str.begin(), tmp_str.end(), detail::g_pending_temp);
    detail::g_pending_temp[tmp_str.size()] = '\0';
  }
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("output_failed", "cannot write " + tmp_str);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("output_failed", "short write to " + tmp_str);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  detail::g_pending_temp[0] = '\0';
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("output_failed", "cannot rename into " + path.string());
  }
}

} // namespace a3kit
