#pragma once

// Structural stand-in for a JUnit run, used when no external RunReport is
// available. It approximates what javac + JUnit 4 would decide from the
// token stream alone; it does not resolve symbols or execute anything.
//
//   compile_error  unbalanced delimiters, unterminated literal or comment, no
//                  method declaration or body, an unterminated last
//                  statement, a dangling comma, or an assertion with an
//                  impossible arity
//   fail           compiles but would not be discovered as a test: missing
//                  @Test, not public, static, non-void, or no "test" prefix
//   pass           otherwise; covers every focal method of the test's class
//                  whose name is called in the body

#include <a3kit/evaluator.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/java_tokens.hpp>
#include <a3kit/verifier.hpp>

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace a3kit {

namespace detail {

inline bool delimiters_balanced(const TokenStream& ts) {
  std::vector<char> stack;
  for (const auto& t : ts.tokens) {
    if (t.kind != TokenKind::Delimiter) continue;
    const char c = t.text[0];
    if (is_opener(c)) {
      stack.push_back(c);
    } else {
      if (stack.empty() || closer_for(stack.back()) != c) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

// A method declaration needs a body: ( params ) [throws ...] { ... } with
// nothing but comments after the closing brace.
inline bool has_method_body(const TokenStream& ts, std::size_t name_idx) {
  const auto& toks = ts.tokens;
  const std::size_t open = next_code_token(toks, name_idx + 1);
  if (open >= toks.size() || !toks[open].is_delim('(')) return false;
  const auto close = matching_close(toks, open);
  if (!close) return false;
  std::size_t i = next_code_token(toks, *close + 1);
  if (i < toks.size() && toks[i].is(TokenKind::Keyword, "throws")) {
    while (i < toks.size() && !toks[i].is_delim('{') && !toks[i].is(TokenKind::Operator, ";")) ++i;
  }
  if (i >= toks.size() || !toks[i].is_delim('{')) return false;
  const auto body_end = matching_close(toks, i);
  if (!body_end || next_code_token(toks, *body_end + 1) < toks.size()) return false;
  // The last statement must be terminated: "... ; }" or "... } }".
  std::size_t last = *body_end;
  for (std::size_t j = *body_end; j-- > i + 1;) {
    if (toks[j].kind != TokenKind::Comment) {
      last = j;
      break;
    }
  }
  return last == *body_end || toks[last].is(TokenKind::Operator, ";") || toks[last].is_delim('}');
}

// "f(a,)" and "f(,a)" never compile.
inline bool has_dangling_comma(const TokenStream& ts) {
  const auto& toks = ts.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].is(TokenKind::Operator, ",")) continue;
    const std::size_t next = next_code_token(toks, i + 1);
    if (next < toks.size() && toks[next].is_delim(')')) return true;
    for (std::size_t j = i; j-- > 0;) {
      if (toks[j].kind == TokenKind::Comment) continue;
      if (toks[j].is_delim('(')) return true;
      break;
    }
  }
  return false;
}

} // namespace detail

inline RunRecord static_run_one(const TestCase& test, const std::vector<const FocalMethod*>& class_methods) {
  using namespace detail;
  RunRecord rec;
  rec.test_id = test.id;
  const TokenStream ts = lex(test.text);

  const bool literals_ok = std::all_of(ts.tokens.begin(), ts.tokens.end(), [](const Token& t) { return is_terminated(t); });
  const auto name_idx = method_name_index(ts);
  const auto lints = lint_assertions_text(test.text);
  const bool arity_ok = std::none_of(lints.begin(), lints.end(), [](const Lint& l) {
    return l.kind == LintKind::AssertionArity && l.definite;
  });
  if (!delimiters_balanced(ts) || !literals_ok || !name_idx || !arity_ok ||
      !has_method_body(ts, *name_idx) || has_dangling_comma(ts)) {
    rec.status = RunStatus::CompileError;
    return rec;
  }

  bool has_test = false;
  bool is_public = false;
  bool is_static = false;
  const Token* return_type = nullptr;
  for (std::size_t i = 0; i < *name_idx; ++i) {
    const Token& t = ts.tokens[i];
    if (t.kind == TokenKind::Comment) continue;
    if (is_test_annotation(t)) has_test = true;
    if (t.is(TokenKind::Keyword, "public")) is_public = true;
    if (t.is(TokenKind::Keyword, "static")) is_static = true;
    return_type = &t;
  }
  const bool is_void = return_type != nullptr && return_type->is(TokenKind::Keyword, "void");
  const bool named = lower_prefix(ts.tokens[*name_idx].text, 4) == "test";
  if (!has_test || !is_public || is_static || !is_void || !named) {
    rec.status = RunStatus::Fail;
    return rec;
  }

  rec.status = RunStatus::Pass;
  std::set<std::string> called;
  for (std::size_t i = *name_idx + 1; i < ts.tokens.size(); ++i) {
    const Token& t = ts.tokens[i];
    if (t.kind != TokenKind::Identifier) continue;
    const std::size_t n = next_code_token(ts.tokens, i + 1);
    if (n < ts.tokens.size() && ts.tokens[n].is_delim('(')) called.insert(t.text);
  }
  std::set<std::string> covered;
  for (const FocalMethod* f : class_methods) {
    if (called.contains(f->method_name())) covered.insert(f->id);
  }
  rec.covered_focal_ids.assign(covered.begin(), covered.end());
  return rec;
}

/// One record per test, in input order.
inline RunReport static_run(const std::vector<TestCase>& tests, const std::vector<FocalMethod>& focal) {
  std::unordered_map<std::string, const FocalMethod*> by_id;
  std::map<std::pair<std::string, std::string>, std::vector<const FocalMethod*>> by_class;
  for (const auto& f : focal) {
    by_id.emplace(f.id, &f);
    by_class[{f.project, f.class_name}].push_back(&f);
  }
  RunReport report;
  static const std::vector<const FocalMethod*> none;
  for (const auto& t : tests) {
    const auto it = by_id.find(t.focal_id);
    const auto& methods = it == by_id.end() ? none : by_class[{it->second->project, it->second->class_name}];
    report.records.push_back(static_run_one(t, methods));
  }
  return report;
}

} // namespace a3kit
