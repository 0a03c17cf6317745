#pragma once

// Repair passes for generated JUnit test methods: delimiter completion,
// test-name prefixing and test-signature normalization, plus an assertion
// lint. Every pass is a pure text -> text function.

#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/java_tokens.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace a3kit {

enum class RepairKind { ParenRepair, NameRepair, SignatureRepair };
enum class LintKind { AssertionArity, UnknownAssertion, PrivateAccessSuspect };

inline const char* to_string(RepairKind k) noexcept {
  switch (k) {
  case RepairKind::ParenRepair: return "ParenRepair";
  case RepairKind::NameRepair: return "NameRepair";
  case RepairKind::SignatureRepair: return "SignatureRepair";
  }
  return "?";
}

inline const char* to_string(LintKind k) noexcept {
  switch (k) {
  case LintKind::AssertionArity: return "AssertionArity";
  case LintKind::UnknownAssertion: return "UnknownAssertion";
  case LintKind::PrivateAccessSuspect: return "PrivateAccessSuspect";
  }
  return "?";
}

struct Lint {
  LintKind kind;
  std::string message;
  std::size_t token_offset; // byte offset of the offending token
  bool definite = true;     // false when the call may be valid (e.g. a delta overload)

  friend bool operator==(const Lint&, const Lint&) = default;
};

struct RepairReport {
  std::string test_id;
  std::vector<RepairKind> applied;
  std::vector<Lint> diagnostics;
  std::vector<std::string> notes;
  std::string before;
  std::string after;
};

struct PassResult {
  std::string text;
  bool changed = false;
  std::vector<std::string> notes;
};

namespace detail {

inline char closer_for(char open) {
  switch (open) {
  case '(': return ')';
  case '{': return '}';
  default: return ']';
  }
}

inline bool is_opener(char c) { return c == '(' || c == '{' || c == '['; }

inline std::string lower_prefix(std::string_view s, std::size_t n) {
  std::string out(s.substr(0, std::min(n, s.size())));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_test_annotation(const Token& t) {
  return t.kind == TokenKind::Annotation && (t.text == "@Test" || t.text.ends_with(".Test"));
}

inline bool is_access_modifier(const Token& t) {
  return t.kind == TokenKind::Keyword && (t.text == "public" || t.text == "private" || t.text == "protected");
}

inline bool is_other_modifier(const Token& t) {
  static constexpr std::array<std::string_view, 9> mods = {
      "static", "final", "abstract", "native", "synchronized", "strictfp", "default", "transient", "volatile",
  };
  return t.kind == TokenKind::Keyword && std::find(mods.begin(), mods.end(), t.text) != mods.end();
}

// An annotation and its optional argument group, as a token range.
struct AnnotationUnit {
  std::size_t first;
  std::size_t last; // inclusive
};

inline AnnotationUnit annotation_unit(const std::vector<Token>& toks, std::size_t at, std::size_t limit) {
  const std::size_t n = next_code_token(toks, at + 1);
  if (n < limit && toks[n].is_delim('(')) {
    const auto close = matching_close(toks, n);
    if (close && *close < limit) return {at, *close};
  }
  return {at, at};
}

inline std::string span_text(const TokenStream& ts, std::size_t first, std::size_t last) {
  const std::size_t b = ts.tokens[first].byte_offset;
  return ts.source.substr(b, ts.tokens[last].end() - b);
}

// True when deleting whatever sits between `a` and `b` would let them lex
// as one token ("a)b" -> "ab", "+)+" -> "++").
inline bool would_fuse(char a, char b) {
  const auto ua = static_cast<unsigned char>(a);
  const auto ub = static_cast<unsigned char>(b);
  if (is_ident_part(ua) && is_ident_part(ub)) return true;
  constexpr std::string_view ops = "+-*/=<>!&|^%:?.";
  if (ops.find(a) != std::string_view::npos && ops.find(b) != std::string_view::npos) return true;
  return (a == '"' || a == '\'') && (b == '"' || b == '\'');
}

} // namespace detail

/// Push-pop delimiter completion. Closers that do not match the innermost
/// open delimiter are deleted; still-open delimiters are closed at the end of
/// the text, innermost first. Literals and comments are shielded by the lexer.
inline PassResult repair_parentheses_text(std::string_view text) {
  using namespace detail;
  const TokenStream ts = lex(text);
  std::vector<char> stack;
  std::vector<std::size_t> deleted;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    const Token& t = ts.tokens[i];
    if (t.kind != TokenKind::Delimiter) continue;
    const char c = t.text[0];
    if (is_opener(c)) {
      stack.push_back(c);
    } else if (!stack.empty() && closer_for(stack.back()) == c) {
      stack.pop_back();
    } else {
      deleted.push_back(i);
    }
  }
  PassResult out;
  if (deleted.empty() && stack.empty()) {
    out.text = std::string(text);
    return out;
  }
  out.changed = true;

  std::string fixed;
  fixed.reserve(text.size() + stack.size() + 2);
  std::size_t pos = 0;
  bool gap = false;
  // Keeps the text on either side of a deletion apart so it cannot fuse.
  auto append = [&](std::string_view piece) {
    if (piece.empty()) return;
    if (gap && !fixed.empty() && would_fuse(fixed.back(), piece.front())) fixed += ' ';
    gap = false;
    fixed.append(piece);
  };
  for (auto idx : deleted) {
    const Token& t = ts.tokens[idx];
    append(text.substr(pos, t.byte_offset - pos));
    gap = true;
    pos = t.end();
  }
  append(text.substr(pos));

  if (!stack.empty()) {
    if (!ts.tokens.empty()) {
      const Token& tail = ts.tokens.back();
      const bool open_text_block =
          tail.kind == TokenKind::StringLit && tail.text.starts_with(R"(""")") && !is_terminated(tail);
      const bool line_bound = (tail.kind == TokenKind::Comment && tail.text.starts_with("//")) ||
                              ((tail.kind == TokenKind::StringLit || tail.kind == TokenKind::CharLit) &&
                               !is_terminated(tail));
      const bool open_block = tail.kind == TokenKind::Comment && !is_terminated(tail);
      const std::string_view after = text.substr(tail.end());
      if (open_block) {
        fixed += "*/";
      } else if (open_text_block) {
        // A text block spans lines; the newline also absorbs a trailing escape.
        fixed += "\n\"\"\"";
      } else if (line_bound && after.find('\n') == std::string_view::npos &&
                 after.find('\r') == std::string_view::npos) {
        fixed += '\n';
      }
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) fixed += closer_for(*it);
  }
  out.text = std::move(fixed);
  out.notes.push_back("deleted " + std::to_string(deleted.size()) + " unmatched closer(s), appended " +
                      std::to_string(stack.size()) + " closer(s)");
  return out;
}

/// Prefixes the declared method name with "test" unless its first four
/// characters already spell it (any case). Only the declaration site changes.
inline PassResult repair_name_text(std::string_view text) {
  const TokenStream ts = lex(text);
  PassResult out;
  out.text = std::string(text);
  const auto idx = method_name_index(ts);
  if (!idx) {
    out.notes.emplace_back("no method name found");
    return out;
  }
  const Token& name = ts.tokens[*idx];
  if (detail::lower_prefix(name.text, 4) == "test") return out;
  out.text = std::string(text.substr(0, name.byte_offset)) + "test" + name.text +
             std::string(text.substr(name.end()));
  out.changed = true;
  return out;
}

/// Normalizes the declaration prefix to "@Test public void <name>".
///
/// A missing @Test is added, private/protected become public, other
/// modifiers are dropped, and void is inserted when no return type exists.
/// Other annotations and comments stay in front of @Test; an existing
/// non-void return type is kept and reported. Everything from the method
/// name onwards is untouched.
inline PassResult repair_signature_text(std::string_view text) {
  using namespace detail;
  const TokenStream ts = lex(text);
  const auto& toks = ts.tokens;
  PassResult out;
  out.text = std::string(text);
  const auto name_idx = method_name_index(ts);
  if (!name_idx) {
    out.notes.emplace_back("no method declaration found");
    return out;
  }

  std::vector<std::size_t> comments;
  std::vector<AnnotationUnit> other_annotations;
  std::optional<AnnotationUnit> test_annotation;
  std::vector<std::size_t> type_tokens;
  std::vector<std::string> dropped;
  bool has_public = false;
  std::vector<std::string> units; // coarse sequence used for the canonical check

  for (std::size_t i = 0; i < *name_idx; ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) {
      comments.push_back(i);
      continue;
    }
    if (t.kind == TokenKind::Annotation) {
      const auto unit = annotation_unit(toks, i, *name_idx);
      if (is_test_annotation(t) && !test_annotation) {
        test_annotation = unit;
        units.emplace_back("@Test");
      } else if (is_test_annotation(t)) {
        dropped.push_back(span_text(ts, unit.first, unit.last));
        units.emplace_back("@Test+");
      } else {
        other_annotations.push_back(unit);
        units.emplace_back("@other");
      }
      i = unit.last;
      continue;
    }
    if (is_access_modifier(t)) {
      if (t.text == "public") {
        if (has_public) dropped.push_back(t.text);
        has_public = true;
      } else {
        dropped.push_back(t.text);
      }
      units.push_back(t.text);
      continue;
    }
    if (is_other_modifier(t)) {
      dropped.push_back(t.text);
      units.push_back(t.text);
      continue;
    }
    type_tokens.push_back(i);
    units.emplace_back(t.is(TokenKind::Keyword, "void") ? "void" : "type");
  }

  // Canonical: [@other...] @Test public void
  {
    std::size_t u = 0;
    while (u < units.size() && units[u] == "@other") ++u;
    const std::vector<std::string> tail(units.begin() + static_cast<std::ptrdiff_t>(u), units.end());
    if (tail == std::vector<std::string>{"@Test", "public", "void"}) return out;
  }

  std::string rebuilt;
  const std::size_t first_tok = toks.front().byte_offset;
  rebuilt.append(text.substr(0, first_tok));
  for (auto c : comments) {
    rebuilt += toks[c].text;
    rebuilt += toks[c].text.starts_with("//") ? "\n" : " ";
  }
  for (const auto& a : other_annotations) {
    rebuilt += span_text(ts, a.first, a.last);
    rebuilt += ' ';
  }
  rebuilt += test_annotation ? span_text(ts, test_annotation->first, test_annotation->last) : std::string("@Test");
  rebuilt += " public ";
  if (type_tokens.empty()) {
    rebuilt += "void";
  } else {
    for (std::size_t k = 0; k < type_tokens.size(); ++k) {
      const Token& t = toks[type_tokens[k]];
      if (k > 0) {
        const Token& p = toks[type_tokens[k - 1]];
        if (type_tokens[k] == type_tokens[k - 1] + 1) {
          rebuilt.append(text.substr(p.end(), t.byte_offset - p.end()));
        } else {
          rebuilt += ' ';
        }
      }
      rebuilt += t.text;
    }
    if (!(type_tokens.size() == 1 && toks[type_tokens[0]].is(TokenKind::Keyword, "void"))) {
      out.notes.emplace_back("non-void return type left intact");
    }
  }
  rebuilt += ' ';
  rebuilt.append(text.substr(toks[*name_idx].byte_offset));

  for (const auto& d : dropped) out.notes.push_back("dropped modifier " + d);
  if (!test_annotation) out.notes.emplace_back("added @Test");
  if (rebuilt != text) {
    out.text = std::move(rebuilt);
    out.changed = true;
  }
  return out;
}

namespace detail {

struct ArityRule {
  std::string_view name;
  std::array<int, 3> allowed; // -1 terminates
  int possible;               // arity that is valid only for some overloads, or -1
};

// org.junit.Assert (JUnit 4). assertEquals/assertNotEquals take exactly two
// arguments in the common form; three is valid only with a message or a
// floating-point delta and is reported as a possible mismatch.
inline constexpr std::array<ArityRule, 12> kArityTable = {{
    {"assertEquals", {2, -1, -1}, 3},
    {"assertNotEquals", {2, -1, -1}, 3},
    {"assertArrayEquals", {2, 3, 4}, -1},
    {"assertTrue", {1, 2, -1}, -1},
    {"assertFalse", {1, 2, -1}, -1},
    {"assertNull", {1, 2, -1}, -1},
    {"assertNotNull", {1, 2, -1}, -1},
    {"assertSame", {2, 3, -1}, -1},
    {"assertNotSame", {2, 3, -1}, -1},
    {"assertThrows", {2, 3, -1}, -1},
    {"fail", {0, 1, -1}, -1},
    {"assertThat", {-1, -1, -1}, -1},
}};

// Top-level argument count of the call group opened at `open`, or nullopt if
// the group never closes.
inline std::optional<int> argument_count(const std::vector<Token>& toks, std::size_t open) {
  const auto close = matching_close(toks, open);
  if (!close) return std::nullopt;
  if (next_code_token(toks, open + 1) == *close) return 0;
  int depth = 0;
  int commas = 0;
  for (std::size_t i = open + 1; i < *close; ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Delimiter) {
      depth += is_opener(t.text[0]) ? 1 : -1;
    } else if (depth == 0 && t.is(TokenKind::Operator, ",")) {
      ++commas;
    }
  }
  return commas + 1;
}

// Names declared private in a class's field list.
inline std::vector<std::string> private_field_names(const FocalContext& ctx) {
  std::vector<std::string> names;
  for (const auto& decl : ctx.fields) {
    const TokenStream ts = lex(decl);
    bool is_private = false;
    std::optional<std::string> last_ident;
    for (const auto& t : ts.tokens) {
      if (t.is(TokenKind::Keyword, "private")) is_private = true;
      if (t.is(TokenKind::Operator, "=") || t.is(TokenKind::Operator, ";")) break;
      if (t.kind == TokenKind::Identifier) last_ident = t.text;
    }
    if (is_private && last_ident) names.push_back(*last_ident);
  }
  return names;
}

} // namespace detail

/// Flags JUnit 4 assertion calls whose argument count matches no overload,
/// deprecated assertThat calls, and (given the focal class context) direct
/// use of the focal class's private fields or reflective access.
inline std::vector<Lint> lint_assertions_text(std::string_view text, const FocalContext* context = nullptr) {
  using namespace detail;
  const TokenStream ts = lex(text);
  const auto& toks = ts.tokens;
  std::vector<Lint> lints;
  const std::vector<std::string> private_fields = context ? private_field_names(*context) : std::vector<std::string>{};

  auto prev_code = [&](std::size_t i) -> const Token* {
    while (i > 0) {
      --i;
      if (toks[i].kind != TokenKind::Comment) return &toks[i];
    }
    return nullptr;
  };

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Identifier) continue;
    const std::size_t next = next_code_token(toks, i + 1);
    const bool is_call = next < toks.size() && toks[next].is_delim('(');

    if (is_call && t.text == "setAccessible") {
      lints.push_back({LintKind::PrivateAccessSuspect, "reflective access via setAccessible", t.byte_offset, true});
      continue;
    }
    if (!is_call) {
      if (!private_fields.empty()) {
        const Token* p = prev_code(i);
        if (p != nullptr && p->is(TokenKind::Operator, ".") &&
            std::find(private_fields.begin(), private_fields.end(), t.text) != private_fields.end()) {
          lints.push_back({LintKind::PrivateAccessSuspect, "access to private field " + t.text, t.byte_offset, true});
        }
      }
      continue;
    }

    const auto rule = std::find_if(kArityTable.begin(), kArityTable.end(),
                                   [&](const ArityRule& r) { return r.name == t.text; });
    if (rule == kArityTable.end()) continue;
    // Skip declarations such as "void assertEquals(" and foreign receivers.
    if (const Token* p = prev_code(i); p != nullptr) {
      if (p->kind == TokenKind::Identifier || (p->kind == TokenKind::Keyword && p->text != "return")) continue;
      if (p->is(TokenKind::Operator, ".")) {
        const std::size_t dot = static_cast<std::size_t>(p - toks.data());
        const Token* recv = prev_code(dot);
        if (recv == nullptr || !(recv->text == "Assert" || recv->text.ends_with(".Assert"))) continue;
      }
    }
    if (rule->name == "assertThat") {
      lints.push_back({LintKind::UnknownAssertion, "assertThat is deprecated in JUnit 4.13", t.byte_offset, true});
      continue;
    }
    const auto argc = argument_count(toks, next);
    if (!argc) continue;
    const bool ok = std::find(rule->allowed.begin(), rule->allowed.end(), *argc) != rule->allowed.end();
    if (ok) continue;
    const bool possible = *argc == rule->possible;
    std::string msg = std::string(rule->name) + " called with " + std::to_string(*argc) + " argument(s)";
    if (possible) msg += "; valid only as (message, expected, actual) or (expected, actual, delta)";
    lints.push_back({LintKind::AssertionArity, std::move(msg), t.byte_offset, !possible});
  }
  return lints;
}

namespace detail {
inline TestCase with_text(const TestCase& test, std::string text) {
  TestCase out = test;
  out.text = std::move(text);
  return out;
}
} // namespace detail

inline TestCase repair_parentheses(const TestCase& test) {
  return detail::with_text(test, repair_parentheses_text(test.text).text);
}
inline TestCase repair_name(const TestCase& test) { return detail::with_text(test, repair_name_text(test.text).text); }
inline TestCase repair_signature(const TestCase& test) {
  return detail::with_text(test, repair_signature_text(test.text).text);
}
inline std::vector<Lint> lint_assertions(const TestCase& test, const FocalContext* context = nullptr) {
  return lint_assertions_text(test.text, context);
}

struct Verified {
  TestCase test;
  RepairReport report;
};

/// parentheses -> name -> signature -> lint. Balancing first keeps the
/// declaration locatable for the later passes.
inline Verified verify(const TestCase& test, const FocalContext* context = nullptr) {
  Verified v;
  v.report.test_id = test.id;
  v.report.before = test.text;
  std::string text = test.text;
  auto run = [&](RepairKind kind, PassResult r) {
    if (r.changed) v.report.applied.push_back(kind);
    for (auto& n : r.notes) v.report.notes.push_back(std::string(to_string(kind)) + ": " + n);
    text = std::move(r.text);
  };
  run(RepairKind::ParenRepair, repair_parentheses_text(text));
  run(RepairKind::NameRepair, repair_name_text(text));
  run(RepairKind::SignatureRepair, repair_signature_text(text));
  v.report.diagnostics = lint_assertions_text(text, context);
  v.report.after = text;
  v.test = detail::with_text(test, std::move(text));
  return v;
}

} // namespace a3kit
