#pragma once

// Shared helpers for the unit and acceptance suites: a random table-driven
// scoring model, an exhaustive decoding oracle, invariant checkers for the
// verifier and a fuzzer producing malformed test methods.

#include <a3kit/a3kit.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#ifndef A3KIT_FIXTURES
#error "A3KIT_FIXTURES must point at tests/fixtures"
#endif

namespace a3test {

using namespace a3kit;

inline std::filesystem::path fixtures() { return std::filesystem::path(A3KIT_FIXTURES); }

// The test method of the focal-class listing, with its closing brace on its
// own line so the method is balanced.
inline constexpr std::string_view kListingTest = "@Test \n"
                                                 "    public void testSum(){\n"
                                                 "        double first = 10;\n"
                                                 "        double second = 20;\n"
                                                 "        var calculator = new Calculator();\n"
                                                 "        double result = calculator.Sum(first, second);\n"
                                                 "        Assert.Equal(30, result); // Assert Statement\n"
                                                 "}";

// As printed: the method's closing brace sits inside the trailing comment.
inline constexpr std::string_view kListingTestAsPrinted = "@Test \n"
                                                          "    public void testSum(){\n"
                                                          "        double first = 10;\n"
                                                          "        double second = 20;\n"
                                                          "        var calculator = new Calculator();\n"
                                                          "        double result = calculator.Sum(first, second);\n"
                                                          "        Assert.Equal(30, result); // Assert Statement}";

inline constexpr std::string_view kListingClass = "// Focal Class \n"
                                                  "public class Calculator{\n"
                                                  "    // Focal Method\n"
                                                  "    public double Sum(double first, double second){\n"
                                                  "        return first + second;\n"
                                                  "    }\n"
                                                  "}\n";

inline FocalMethod dummy_focal(std::string name = "sum") {
  FocalMethod f;
  f.id = "p/C/" + name + "()";
  f.project = "p";
  f.class_name = "C";
  f.signature = "public int " + name + "()";
  f.body = f.signature + " { return 0; }";
  return f;
}

inline TestCase make_test(std::string text, std::string id = "t#1") {
  TestCase t;
  t.id = std::move(id);
  t.focal_id = "p/C/sum()";
  t.text = std::move(text);
  t.generator_id = "fixture";
  return t;
}

// --- beam search ------------------------------------------------------------

/// Scoring model whose next-token distribution is a pseudo-random function
/// of (seed, prefix). Vocabulary: "</s>", "a", "b", ... .
class RandomTableModel final : public ScoringModel {
public:
  RandomTableModel(std::uint64_t seed, std::size_t vocab_size, bool uniform = false)
      : seed_(seed), uniform_(uniform) {
    vocab_.emplace_back(kEndOfSequence);
    for (std::size_t i = 1; i < vocab_size; ++i) vocab_.push_back(std::string(1, static_cast<char>('a' + i - 1)));
  }

  [[nodiscard]] std::string id() const override { return "table"; }
  [[nodiscard]] const std::vector<std::string>& vocabulary() const override { return vocab_; }

  [[nodiscard]] Distribution next_token_logprobs(std::span<const std::string> prefix,
                                                 const FocalMethod&) const override {
    std::uint64_t h = 1469598103934665603ULL ^ seed_;
    for (const auto& t : prefix) {
      for (char c : t) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
      h = (h ^ 0xff) * 1099511628211ULL;
    }
    Rng rng(h);
    std::vector<double> w(vocab_.size());
    double z = 0.0;
    for (auto& x : w) {
      // A coarse grid makes exact ties between sequences reasonably common.
      x = uniform_ ? 1.0 : static_cast<double>(1 + uniform_below(rng, 8));
      z += x;
    }
    Distribution d;
    for (std::size_t i = 0; i < vocab_.size(); ++i) d.emplace(vocab_[i], std::log(w[i] / z));
    return d;
  }

private:
  std::uint64_t seed_;
  bool uniform_;
  std::vector<std::string> vocab_;
};

/// Every complete hypothesis (ended by EOS or exactly max_len long), scored
/// by summing the model's log-probabilities, in rank order.
inline std::vector<Hypothesis> enumerate_all(const ScoringModel& model, const FocalMethod& focal, std::size_t max_len) {
  std::vector<Hypothesis> done;
  const std::string eos = model.end_token();
  const auto prompt = model.prompt(focal);
  std::vector<Hypothesis> frontier{Hypothesis{}};
  for (std::size_t step = 0; step < max_len; ++step) {
    std::vector<Hypothesis> next;
    for (const auto& h : frontier) {
      std::vector<std::string> prefix = prompt;
      prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
      const auto dist = model.next_token_logprobs(prefix, focal);
      for (const auto& [tok, lp] : dist) {
        Hypothesis e = h;
        e.tokens.push_back(tok);
        e.logprob += lp;
        if (tok == eos) {
          e.finished = true;
          done.push_back(std::move(e));
        } else {
          next.push_back(std::move(e));
        }
      }
    }
    frontier = std::move(next);
  }
  for (auto& h : frontier) done.push_back(std::move(h));
  std::sort(done.begin(), done.end(), ranks_before);
  return done;
}

/// Argmax at every step; ties go to the lexicographically smallest token.
inline Hypothesis greedy(const ScoringModel& model, const FocalMethod& focal, std::size_t max_len) {
  Hypothesis h;
  const auto prompt = model.prompt(focal);
  for (std::size_t step = 0; step < max_len; ++step) {
    std::vector<std::string> prefix = prompt;
    prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
    const auto dist = model.next_token_logprobs(prefix, focal);
    auto best = dist.begin();
    for (auto it = dist.begin(); it != dist.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    h.tokens.push_back(best->first);
    h.logprob += best->second;
    if (best->first == model.end_token()) {
      h.finished = true;
      break;
    }
  }
  return h;
}

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// --- verifier invariants ----------------------------------------------------

/// Counting checker: every prefix of the delimiter sequence has no more
/// closers than openers, the totals match, and every closer matches.
inline bool balanced(std::string_view text) {
  std::vector<char> stack;
  long open = 0;
  long close = 0;
  for (const auto& t : lex(text).tokens) {
    if (t.kind != TokenKind::Delimiter) continue;
    const char c = t.text[0];
    if (c == '(' || c == '{' || c == '[') {
      ++open;
      stack.push_back(c);
    } else {
      ++close;
      if (close > open) return false;
      const char want = stack.back() == '(' ? ')' : stack.back() == '{' ? '}' : ']';
      if (c != want) return false;
      stack.pop_back();
    }
  }
  return open == close;
}

/// The declaration starts with @Test public void <test...>, ignoring
/// comments and other annotations (with their arguments) in front.
inline bool canonical_prefix(std::string_view text) {
  const TokenStream ts = lex(text);
  const auto& toks = ts.tokens;
  std::vector<const Token*> code;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    if (t.kind == TokenKind::Annotation) {
      const std::size_t n = next_code_token(toks, i + 1);
      const bool has_args = n < toks.size() && toks[n].is_delim('(');
      if (t.text == "@Test" || t.text == "@org.junit.Test") {
        code.push_back(&t);
      }
      if (has_args) i = skip_group(toks, n) - 1;
      continue;
    }
    code.push_back(&t);
    if (code.size() >= 5) break;
  }
  if (code.size() < 5) return false;
  std::string name = code[3]->text;
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return (code[0]->text == "@Test" || code[0]->text == "@org.junit.Test") &&
         code[1]->is(TokenKind::Keyword, "public") && code[2]->is(TokenKind::Keyword, "void") &&
         code[3]->kind == TokenKind::Identifier && name.starts_with("test") && code[4]->is_delim('(');
}

/// Text from the declared name's "(" to the end.
inline std::optional<std::string> tail_from_params(std::string_view text) {
  const TokenStream ts = lex(text);
  const auto idx = method_name_index(ts);
  if (!idx) return std::nullopt;
  const std::size_t open = next_code_token(ts.tokens, *idx + 1);
  if (open >= ts.tokens.size()) return std::nullopt;
  return std::string(text.substr(ts.tokens[open].byte_offset));
}

// --- fuzzing ----------------------------------------------------------------

inline constexpr std::array<std::string_view, 8> kFuzzSeeds = {
    "@Test public void testPush() {\n    IntStack s = new IntStack();\n    s.push(1);\n    assertFalse(s.isEmpty());\n}",
    "@Test\npublic void testParse() {\n    assertEquals(Arrays.asList(\"a\", \"b)\"), csv.parse(\"a,b\"));\n}",
    "@Test public void testMedian() { double[] xs = {3, 1, 2}; assertEquals(2.0, s.median(xs), 1e-9); }",
    "// checks the sign\n@Test public void testSignum() { assertEquals(-1, Rounding.signum(-5)); /* } */ }",
    "@Test(timeout = 100)\npublic void testNextPrime() throws Exception {\n  if (p != null) { assertEquals(11, p.nextPrime(7)); }\n}",
    "@Ignore @Test public void testChunk() { List<List<Integer>> c = ops.chunk(xs, 2); assertEquals(2, c.size()); }",
    "@Test public void testEscape() { assertEquals('[', e.first(\"[\")); String s = \"{\"; }",
    "@Test public void testCountChars() {\n    for (int i = 0; i < 3; i++) {\n        assertTrue(c.countChars(\"abc\", 'a') > 0);\n    }\n}",
};

/// Applies 1-4 random defects to a canonical test method: deleted body
/// delimiters, a truncated tail, deleted @Test/public/void, a stripped or
/// mangled "test" name prefix, an access modifier swap or a non-access
/// modifier. A deleted annotation takes its argument list with it. The
/// declaration's own parameter parentheses are never deleted;
/// no prefix-only repair could recover a method without them.
inline std::string fuzz_test_method(Rng& rng) {
  std::string text(kFuzzSeeds[uniform_below(rng, kFuzzSeeds.size())]);
  const std::size_t defects = 1 + uniform_below(rng, 4);
  for (std::size_t d = 0; d < defects; ++d) {
    const TokenStream ts = lex(text);
    const auto name_idx = method_name_index(ts);
    if (!name_idx) break;
    const std::size_t params = next_code_token(ts.tokens, *name_idx + 1);
    const auto params_close = matching_close(ts.tokens, params);
    const std::size_t body_from = params_close ? *params_close + 1 : params + 1;
    auto erase_token = [&](const Token& t) { text.erase(t.byte_offset, t.text.size()); };
    switch (uniform_below(rng, 7)) {
    case 0: { // delete a body delimiter
      std::vector<std::size_t> delims;
      for (std::size_t i = body_from; i < ts.tokens.size(); ++i) {
        if (ts.tokens[i].kind == TokenKind::Delimiter) delims.push_back(i);
      }
      if (!delims.empty()) erase_token(ts.tokens[delims[uniform_below(rng, delims.size())]]);
      break;
    }
    case 1: { // truncate somewhere after the parameter list
      if (body_from >= ts.tokens.size()) break;
      const std::size_t from = ts.tokens[body_from].byte_offset;
      text.resize(from + uniform_below(rng, text.size() - from));
      break;
    }
    case 2:
    case 3: { // delete @Test, public or void
      std::vector<std::size_t> prefix;
      for (std::size_t i = 0; i < *name_idx; ++i) {
        const Token& t = ts.tokens[i];
        if (t.text == "@Test" || t.is(TokenKind::Keyword, "public") || t.is(TokenKind::Keyword, "void")) {
          prefix.push_back(i);
        }
      }
      if (prefix.empty()) break;
      const std::size_t at = prefix[uniform_below(rng, prefix.size())];
      const std::size_t next = next_code_token(ts.tokens, at + 1);
      // An annotation goes together with its argument list.
      const auto args_close = ts.tokens[at].kind == TokenKind::Annotation && next < ts.tokens.size() &&
                                      ts.tokens[next].is_delim('(')
                                  ? matching_close(ts.tokens, next)
                                  : std::nullopt;
      const std::size_t end = args_close ? ts.tokens[*args_close].end() : ts.tokens[at].end();
      text.erase(ts.tokens[at].byte_offset, end - ts.tokens[at].byte_offset);
      break;
    }
    case 4: { // strip or mangle the "test" prefix
      const Token& name = ts.tokens[*name_idx];
      if (name.text.size() > 4 && a3kit::detail::lower_prefix(name.text, 4) == "test") {
        const std::size_t cut = 1 + uniform_below(rng, 4);
        text.erase(name.byte_offset, cut);
      }
      break;
    }
    case 5: { // public -> private/protected
      for (std::size_t i = 0; i < *name_idx; ++i) {
        if (ts.tokens[i].is(TokenKind::Keyword, "public")) {
          text.replace(ts.tokens[i].byte_offset, 6, uniform_below(rng, 2) == 0 ? "private" : "protected");
          break;
        }
      }
      break;
    }
    default: { // add a non-access modifier before the name's type
      const Token& name = ts.tokens[*name_idx];
      const char* mods[] = {"static ", "final ", "synchronized "};
      std::size_t at = name.byte_offset;
      if (*name_idx > 0 && ts.tokens[*name_idx - 1].is(TokenKind::Keyword, "void")) at = ts.tokens[*name_idx - 1].byte_offset;
      text.insert(at, mods[uniform_below(rng, 3)]);
      break;
    }
    }
  }
  return text;
}

} // namespace a3test
