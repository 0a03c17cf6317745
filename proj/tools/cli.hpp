#pragma once

// a3kit command-line driver. Kept in a header so the test suites can run
// subcommands in-process.

#include <a3kit/config.hpp>
#include <a3kit/corpus_prep.hpp>
#include <a3kit/error.hpp>
#include <a3kit/evaluator.hpp>
#include <a3kit/exec_generator.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/ngram.hpp>
#include <a3kit/report_convert.hpp>
#include <a3kit/serialize.hpp>
#include <a3kit/static_runner.hpp>
#include <a3kit/verifier.hpp>
#include <a3kit/workers.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace a3kit::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kInputFormat = 2, kStageFailure = 3 };

struct Options {
  std::optional<std::string> config;
  std::optional<std::int64_t> seed;
  std::optional<double> mask_ratio;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> attempts;
  std::optional<std::size_t> ngram_order;
  std::optional<std::size_t> max_len;
  std::string generator = "ngram";
  std::vector<std::string> input;
  std::optional<std::string> output;
  std::optional<std::string> report;
  std::vector<std::string> train;
  std::optional<std::string> focal;
  std::optional<std::string> tests;
  std::optional<std::string> sidecar;
  std::optional<std::string> report_out;
  std::optional<std::string> project;
  std::optional<std::string> junit;
  std::vector<std::string> jacoco;
  double train_frac = 0.8;
  double valid_frac = 0.1;
  double timeout_s = 30.0;
  bool no_verify = false;
};

/// Writes human-oriented progress lines.
class Log {
public:
  explicit Log(std::ostream& err) : err_(err) {}
  void info(const std::string& stage, const std::string& msg) { err_ << "a3kit " << stage << ": " << msg << '\n'; }

private:
  std::ostream& err_;
};

namespace detail {

inline bool is_input_error(const std::string& code) {
  static const std::vector<std::string> codes = {"input_missing", "input_format",     "unknown_test_id",
                                                 "invalid_report", "config_format",   "unknown_focal_id",
                                                 "invalid_pair",  "invalid_fractions", "invalid_ratio"};
  return std::find(codes.begin(), codes.end(), code) != codes.end();
}

inline std::vector<fs::path> java_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".java") files.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw Error("input_missing", "no such file or directory: " + in);
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

// Project of a source file: the first directory below the input root, or
// the root's own name for files directly inside it.
inline std::string project_for(const fs::path& file, const std::vector<std::string>& inputs) {
  for (const auto& in : inputs) {
    const fs::path root(in);
    if (!fs::is_directory(root)) continue;
    const fs::path rel = fs::relative(file, root);
    if (rel.empty() || rel.begin()->string() == "..") continue;
    if (std::distance(rel.begin(), rel.end()) > 1) return rel.begin()->string();
    return fs::absolute(root).lexically_normal().filename().string();
  }
  return file.parent_path().filename().string();
}

inline std::string require(const std::optional<std::string>& v, const char* flag) {
  if (!v || v->empty()) throw Error("usage", std::string("missing required option ") + flag);
  return *v;
}

inline std::string sidecar_path(const std::string& output, const std::string& suffix) {
  fs::path p(output);
  std::string stem = p.stem().string();
  return (p.parent_path() / (stem + suffix)).string();
}

} // namespace detail

class Driver {
public:
  Driver(Options opts, PipelineConfig cfg, std::ostream& out, std::ostream& err)
      : opts_(std::move(opts)), cfg_(std::move(cfg)), out_(out), log_(err) {}

  // --- extract ------------------------------------------------------------

  std::vector<FocalMethod> extract(const std::vector<std::string>& inputs) {
    const auto files = detail::java_files(inputs);
    std::vector<Extraction> per_file(files.size());
    parallel_for(files.size(), worker_count(), [&](std::size_t i) {
      const std::string project = opts_.project.value_or(detail::project_for(files[i], inputs));
      per_file[i] = extract_focal_methods(read_file(files[i]), project);
    });
    std::vector<FocalMethod> all;
    for (std::size_t i = 0; i < files.size(); ++i) {
      for (const auto& d : per_file[i].diagnostics) log_.info("extract", files[i].string() + ": " + d);
      for (auto& m : per_file[i].methods) all.push_back(std::move(m));
    }
    std::stable_sort(all.begin(), all.end(), [](const FocalMethod& a, const FocalMethod& b) { return a.id < b.id; });
    std::map<std::string, int> seen;
    for (auto& m : all) {
      if (const int n = seen[m.id]++; n > 0) m.id += "~f" + std::to_string(n + 1);
    }
    log_.info("extract", std::to_string(all.size()) + " focal methods from " + std::to_string(files.size()) + " files");
    return all;
  }

  // --- generate -----------------------------------------------------------

  std::unique_ptr<NgramModel> train_model(const std::vector<std::string>& train_inputs) {
    if (train_inputs.empty()) throw Error("usage", "the ngram generator needs --train");
    std::vector<std::vector<std::string>> corpus;
    for (const auto& f : detail::java_files(train_inputs)) {
      for (const auto& m : extract_test_methods(read_file(f))) corpus.push_back(test_method_training_tokens(m));
    }
    auto model = std::make_unique<NgramModel>(train_ngram(corpus, cfg_.ngram_order));
    log_.info("generate", "trained " + model->id() + " on " + std::to_string(corpus.size()) + " test methods, |V|=" +
                              std::to_string(model->vocabulary().size()));
    return model;
  }

  std::vector<TestCase> generate(const std::vector<FocalMethod>& focal, std::vector<GenerationOutcome>* errors) {
    const std::size_t attempts = cfg_.attempts;
    const std::size_t k = std::max(cfg_.beam_width, attempts);
    std::vector<GenerationOutcome> outcomes(focal.size());
    if (opts_.generator == "ngram") {
      const auto model = train_model(opts_.train);
      parallel_for(focal.size(), worker_count(), [&](std::size_t i) {
        outcomes[i].focal_id = focal[i].id;
        auto cands = beam_search(*model, focal[i], k, cfg_.max_len);
        if (cands.size() > attempts) cands.resize(attempts);
        outcomes[i].candidates = std::move(cands);
      });
    } else if (opts_.generator.starts_with("exec:")) {
      const std::string command = opts_.generator.substr(5);
      const auto timeout = std::chrono::milliseconds(static_cast<long long>(opts_.timeout_s * 1000.0));
      parallel_for(focal.size(), worker_count(), [&](std::size_t i) {
        outcomes[i] = exec_generator(command, focal[i], attempts, timeout);
      });
    } else {
      throw Error("usage", "unknown generator '" + opts_.generator + "' (expected ngram or exec:<cmd>)");
    }
    std::vector<TestCase> tests;
    for (auto& o : outcomes) {
      if (o.error) {
        log_.info("generate", o.focal_id + ": " + *o.error);
        if (errors != nullptr) errors->push_back(o);
      }
      for (auto& t : o.candidates) tests.push_back(std::move(t));
    }
    log_.info("generate", std::to_string(tests.size()) + " candidates for " + std::to_string(focal.size()) +
                              " focal methods");
    return tests;
  }

  // --- verify -------------------------------------------------------------

  std::pair<std::vector<TestCase>, std::vector<RepairReport>> verify_all(const std::vector<TestCase>& tests,
                                                                         const std::vector<FocalMethod>* focal) {
    std::unordered_map<std::string, const FocalContext*> contexts;
    if (focal != nullptr) {
      for (const auto& f : *focal) contexts.emplace(f.id, &f.context);
    }
    std::vector<Verified> results(tests.size());
    parallel_for(tests.size(), worker_count(), [&](std::size_t i) {
      const auto it = contexts.find(tests[i].focal_id);
      results[i] = verify(tests[i], it == contexts.end() ? nullptr : it->second);
    });
    std::vector<TestCase> fixed;
    std::vector<RepairReport> reports;
    std::size_t repaired = 0;
    for (auto& r : results) {
      repaired += r.report.applied.empty() ? 0 : 1;
      fixed.push_back(std::move(r.test));
      reports.push_back(std::move(r.report));
    }
    log_.info("verify", std::to_string(repaired) + " of " + std::to_string(tests.size()) + " tests repaired");
    return {std::move(fixed), std::move(reports)};
  }

  // --- evaluate -----------------------------------------------------------

  MetricsSummary evaluate(const std::vector<FocalMethod>& focal, const std::vector<TestCase>& tests,
                          const std::optional<std::string>& report_path, const std::optional<std::string>& report_out) {
    RunReport report;
    if (report_path) {
      report = report_from_jsonl(read_file(*report_path), *report_path);
    } else {
      report = static_run(tests, focal);
      log_.info("evaluate", "no --report given; scored with the structural runner");
      if (report_out) write_atomic(*report_out, to_jsonl(report.records));
    }
    MetricsSummary s = summarize(focal, tests, report);
    log_.info("evaluate", "correct " + format_pct(s.totals.correct_pct()) + "%, coverage " +
                              format_pct(s.totals.coverage_pct()) + "%");
    return s;
  }

  static std::string format_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  // --- subcommands --------------------------------------------------------

  int cmd_extract() {
    if (opts_.input.empty()) throw Error("usage", "missing required option --input");
    const auto methods = extract(opts_.input);
    write_atomic(detail::require(opts_.output, "--output"), to_jsonl(methods));
    return kOk;
  }

  int cmd_prep_mask() {
    const std::string in = input_one();
    const auto pairs = from_jsonl<AssertPair>(read_file(in), in);
    std::vector<MaskedPair> masked(pairs.size());
    parallel_for(pairs.size(), worker_count(), [&](std::size_t i) {
      masked[i] = mask_pair(pairs[i], cfg_.mask_ratio, cfg_.seed + static_cast<std::int64_t>(i));
    });
    write_atomic(detail::require(opts_.output, "--output"), to_jsonl(masked));
    log_.info("prep-mask", std::to_string(masked.size()) + " masked pairs");
    return kOk;
  }

  int cmd_prep_split() {
    const std::string in = input_one();
    std::vector<std::string> ids;
    for (const auto& j : parse_jsonl(read_file(in), in)) {
      if (!j.contains("id") || !j["id"].is_string()) throw Error("input_format", in + ": record without string id");
      ids.push_back(j["id"].get<std::string>());
    }
    const SplitManifest m = split_corpus(ids, opts_.train_frac, opts_.valid_frac, cfg_.seed);
    write_atomic(detail::require(opts_.output, "--output"), json(m).dump(2) + "\n");
    log_.info("prep-split", std::to_string(m.train_ids.size()) + "/" + std::to_string(m.valid_ids.size()) + "/" +
                                std::to_string(m.holdout_ids.size()));
    return kOk;
  }

  int cmd_generate() {
    const std::string in = input_one();
    const auto focal = from_jsonl<FocalMethod>(read_file(in), in);
    const std::string output = detail::require(opts_.output, "--output");
    std::vector<GenerationOutcome> errors;
    const auto tests = generate(focal, &errors);
    write_errors(detail::sidecar_path(output, ".errors.jsonl"), errors);
    write_atomic(output, to_jsonl(tests));
    return kOk;
  }

  int cmd_verify() {
    const std::string in = input_one();
    const auto tests = from_jsonl<TestCase>(read_file(in), in);
    std::optional<std::vector<FocalMethod>> focal;
    if (opts_.focal) focal = from_jsonl<FocalMethod>(read_file(*opts_.focal), *opts_.focal);
    const std::string output = detail::require(opts_.output, "--output");
    auto [fixed, reports] = verify_all(tests, focal ? &*focal : nullptr);
    write_atomic(opts_.sidecar.value_or(detail::sidecar_path(output, ".repairs.jsonl")), to_jsonl(reports));
    write_atomic(output, to_jsonl(fixed));
    return kOk;
  }

  int cmd_evaluate() {
    const std::string focal_path = detail::require(opts_.focal, "--focal");
    const std::string tests_path = opts_.tests ? *opts_.tests : input_one();
    const auto focal = from_jsonl<FocalMethod>(read_file(focal_path), focal_path);
    const auto tests = from_jsonl<TestCase>(read_file(tests_path), tests_path);
    const MetricsSummary s = evaluate(focal, tests, opts_.report, opts_.report_out);
    const std::string doc = summary_json(s).dump(2) + "\n";
    if (opts_.output) write_atomic(*opts_.output, doc);
    out_ << doc;
    return kOk;
  }

  int cmd_pipeline() {
    if (opts_.input.empty()) throw Error("usage", "missing required option --input");
    const fs::path dir = detail::require(opts_.output, "--output");
    const auto focal = extract(opts_.input);
    write_atomic(dir / "focal.jsonl", to_jsonl(focal));

    std::vector<GenerationOutcome> errors;
    const auto candidates = generate(focal, &errors);
    write_errors((dir / "candidates.errors.jsonl").string(), errors);
    write_atomic(dir / "candidates.jsonl", to_jsonl(candidates));

    std::vector<TestCase> final_tests = candidates;
    if (!opts_.no_verify) {
      auto [fixed, reports] = verify_all(candidates, &focal);
      write_atomic(dir / "repairs.jsonl", to_jsonl(reports));
      write_atomic(dir / "verified.jsonl", to_jsonl(fixed));
      final_tests = std::move(fixed);
    } else {
      std::error_code ec;
      fs::remove(dir / "repairs.jsonl", ec);
      fs::remove(dir / "verified.jsonl", ec);
    }
    const auto summary =
        evaluate(focal, final_tests, opts_.report, opts_.report ? std::nullopt : std::optional<std::string>((dir / "runreport.jsonl").string()));
    const std::string doc = summary_json(summary).dump(2) + "\n";
    write_atomic(dir / "metrics.json", doc);
    out_ << doc;
    return kOk;
  }

  int cmd_convert_report() {
    const std::string junit = detail::require(opts_.junit, "--junit");
    std::vector<std::string> coverage;
    for (const auto& p : opts_.jacoco) coverage.push_back(read_file(p));
    std::vector<FocalMethod> focal;
    if (opts_.focal) focal = from_jsonl<FocalMethod>(read_file(*opts_.focal), *opts_.focal);
    const RunReport report = convert_reports(read_file(junit), coverage, focal);
    write_atomic(detail::require(opts_.output, "--output"), to_jsonl(report.records));
    log_.info("convert-report", std::to_string(report.records.size()) + " records");
    return kOk;
  }

private:
  std::string input_one() {
    if (opts_.input.size() != 1) throw Error("usage", "expected exactly one --input file");
    return opts_.input.front();
  }

  void write_errors(const std::string& path, const std::vector<GenerationOutcome>& errors) {
    if (errors.empty()) {
      std::error_code ec;
      fs::remove(path, ec);
      return;
    }
    std::vector<json> rows;
    for (const auto& e : errors) rows.push_back(json{{"focal_id", e.focal_id}, {"error", *e.error}});
    std::string doc = json{{"schema_version", kSchemaVersion}}.dump() + "\n";
    for (const auto& r : rows) doc += r.dump() + "\n";
    write_atomic(path, doc);
  }

  Options opts_;
  PipelineConfig cfg_;
  std::ostream& out_;
  Log log_;
};

inline void emit_error(std::ostream& err, const std::string& code, const std::string& message, int exit_code) {
  err << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << '\n';
}

/// Entry point shared by main() and the tests. args[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"a3kit: focal-method extraction, test generation, verification and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--input", o.input, "input file(s) or directories");
    sub->add_option("--output", o.output, "output file (or directory for pipeline)");
  };
  auto generation = [&](CLI::App* sub) {
    sub->add_option("--beam", o.beam, "beam width (default 4)");
    sub->add_option("--attempts", o.attempts, "candidates per focal method (default 1)");
    sub->add_option("--generator", o.generator, "ngram | exec:<command>");
    sub->add_option("--train", o.train, "Java test sources for the ngram backend");
    sub->add_option("--ngram-order", o.ngram_order, "n-gram order (default 3)");
    sub->add_option("--max-len", o.max_len, "generated tokens per candidate (default 64)");
    sub->add_option("--timeout", o.timeout_s, "seconds per external generator call");
  };

  auto* extract = app.add_subcommand("extract", "extract public focal methods from Java sources");
  common(extract);
  extract->add_option("--project", o.project, "project name for every file");

  auto* prep_mask = app.add_subcommand("prep-mask", "mask focal-method/assertion pairs");
  common(prep_mask);
  prep_mask->add_option("--mask-ratio", o.mask_ratio, "fraction of tokens masked (default 0.2)");

  auto* prep_split = app.add_subcommand("prep-split", "split a corpus into train/valid/holdout");
  common(prep_split);
  prep_split->add_option("--train-frac", o.train_frac, "training fraction")->capture_default_str();
  prep_split->add_option("--valid-frac", o.valid_frac, "validation fraction")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "generate candidate test cases");
  common(generate);
  generation(generate);

  auto* verify_cmd = app.add_subcommand("verify", "repair delimiters, names and test signatures");
  common(verify_cmd);
  verify_cmd->add_option("--focal", o.focal, "focal methods (context for the private-access lint)");
  verify_cmd->add_option("--sidecar", o.sidecar, "RepairReport output (default <output>.repairs.jsonl)");

  auto* evaluate = app.add_subcommand("evaluate", "compute correct-test and focal-coverage metrics");
  common(evaluate);
  evaluate->add_option("--focal", o.focal, "focal methods JSON-lines");
  evaluate->add_option("--tests", o.tests, "test cases JSON-lines (alias of --input)");
  evaluate->add_option("--report", o.report, "RunReport JSON-lines from an external runner");
  evaluate->add_option("--report-out", o.report_out, "where to write the structural runner's report");

  auto* pipeline = app.add_subcommand("pipeline", "extract -> generate -> verify -> evaluate");
  common(pipeline);
  generation(pipeline);
  pipeline->add_option("--project", o.project, "project name for every file");
  pipeline->add_option("--report", o.report, "RunReport JSON-lines from an external runner");
  pipeline->add_flag("--no-verify", o.no_verify, "skip the verification stage");

  auto* convert = app.add_subcommand("convert-report", "convert JUnit + JaCoCo XML into a RunReport");
  common(convert);
  convert->add_option("--junit", o.junit, "JUnit XML results");
  convert->add_option("--jacoco", o.jacoco, "per-test JaCoCo XML reports");
  convert->add_option("--focal", o.focal, "focal methods JSON-lines");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what(), kUsage);
    return kUsage;
  }

  try {
    PipelineConfig cfg;
    if (o.config) {
      cfg = parse_config(read_file(*o.config));
      // Relative paths in a config file are relative to the file itself.
      const fs::path base = fs::path(*o.config).parent_path();
      for (auto& [key, value] : cfg.paths) {
        if (fs::path(value).is_relative()) value = (base / value).lexically_normal().string();
      }
    }
    auto path_default = [&](const char* key, auto& slot) {
      auto it = cfg.paths.find(key);
      if (it == cfg.paths.end()) return;
      using Slot = std::decay_t<decltype(slot)>;
      if constexpr (std::is_same_v<Slot, std::vector<std::string>>) {
        if (slot.empty()) slot.push_back(it->second);
      } else {
        if (!slot) slot = it->second;
      }
    };
    path_default("input", o.input);
    path_default("output", o.output);
    path_default("train", o.train);
    path_default("report", o.report);
    path_default("focal", o.focal);
    path_default("tests", o.tests);
    if (o.seed) cfg.seed = *o.seed;
    if (o.mask_ratio) cfg.mask_ratio = *o.mask_ratio;
    if (o.beam) cfg.beam_width = *o.beam;
    if (o.attempts) cfg.attempts = *o.attempts;
    if (o.ngram_order) cfg.ngram_order = *o.ngram_order;
    if (o.max_len) cfg.max_len = *o.max_len;
    if (!(cfg.mask_ratio > 0.0 && cfg.mask_ratio <= 1.0)) throw Error("usage", "--mask-ratio must lie in (0, 1]");
    if (cfg.beam_width == 0 || cfg.attempts == 0 || cfg.max_len == 0 || cfg.ngram_order < 2) {
      throw Error("usage", "--beam, --attempts, --max-len must be positive and --ngram-order at least 2");
    }

    Driver d(o, cfg, out, err);
    if (*extract) return d.cmd_extract();
    if (*prep_mask) return d.cmd_prep_mask();
    if (*prep_split) return d.cmd_prep_split();
    if (*generate) return d.cmd_generate();
    if (*verify_cmd) return d.cmd_verify();
    if (*evaluate) return d.cmd_evaluate();
    if (*pipeline) return d.cmd_pipeline();
    if (*convert) return d.cmd_convert_report();
    return kUsage;
  } catch (const Error& e) {
    const int code = e.code() == "usage" ? kUsage : detail::is_input_error(e.code()) ? kInputFormat : kStageFailure;
    emit_error(err, e.code(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kStageFailure);
    return kStageFailure;
  }
}

} // namespace a3kit::cli
