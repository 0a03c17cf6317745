#pragma once

#include <a3kit/error.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/java_tokens.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace a3kit {

inline constexpr std::string_view kEndOfSequence = "</s>";

/// A candidate test method produced for one focal method.
struct TestCase {
  std::string id; // <focal_id>#<rank>, rank starting at 1
  std::string focal_id;
  std::string text;
  std::string generator_id;
  std::optional<double> logprob;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

inline std::string test_case_id(const std::string& focal_id, std::size_t rank) {
  return focal_id + "#" + std::to_string(rank);
}

/// token -> natural-log probability. Ordered so iteration is deterministic.
using Distribution = std::map<std::string, double>;

/// Next-token distribution conditioned on a prefix and a focal method.
/// Implementations must tolerate concurrent calls once constructed.
class ScoringModel {
public:
  virtual ~ScoringModel() = default;

  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual const std::vector<std::string>& vocabulary() const = 0;
  [[nodiscard]] virtual Distribution next_token_logprobs(std::span<const std::string> prefix,
                                                         const FocalMethod& focal) const = 0;

  /// Tokens that seed decoding. They are part of the prefix handed to
  /// next_token_logprobs but carry no score and do not count as generated.
  [[nodiscard]] virtual std::vector<std::string> prompt(const FocalMethod&) const { return {}; }

  /// Surface text of a token when rendering a hypothesis. Lets a model use
  /// placeholder tokens internally.
  [[nodiscard]] virtual std::string surface(const std::string& token, const FocalMethod&) const {
    return token;
  }

  [[nodiscard]] virtual std::string end_token() const { return std::string(kEndOfSequence); }
};

struct Hypothesis {
  std::vector<std::string> tokens; // generated tokens only; EOS included when finished by it
  double logprob = 0.0;
  bool finished = false;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// Descending log-probability, then lexicographic token order.
inline bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  return a.tokens < b.tokens;
}

struct Beam {
  std::vector<Hypothesis> hypotheses;
  std::size_t width = 1;

  /// Hypotheses in rank order.
  [[nodiscard]] std::vector<Hypothesis> ranked() const {
    auto out = hypotheses;
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
  }
};

namespace detail {

// Min-heap adaptor: the top is the best-ranked candidate.
struct WorseRank {
  bool operator()(const Hypothesis& a, const Hypothesis& b) const { return ranks_before(b, a); }
};

} // namespace detail

/// One decoding step over a slot-ordered beam.
///
/// Slot j of the new beam is the best not-yet-chosen expansion of slots
/// 1..j of the old beam; a finished hypothesis expands only to itself. The
/// first j slots therefore never depend on slots beyond j, so the beam of
/// width j is always a prefix of the beam of any larger width, and the best
/// finished score can only improve as the width grows.
inline Beam beam_step(const ScoringModel& model, const FocalMethod& focal, const std::vector<std::string>& prompt,
                      const Beam& beam, std::size_t max_len) {
  const std::string eos = model.end_token();
  std::vector<Hypothesis> heap;
  Beam next;
  next.width = beam.width;
  std::vector<std::string> prefix;
  for (std::size_t slot = 0; slot < beam.width; ++slot) {
    if (slot < beam.hypotheses.size()) {
      const Hypothesis& h = beam.hypotheses[slot];
      if (h.finished) {
        heap.push_back(h);
        std::push_heap(heap.begin(), heap.end(), detail::WorseRank{});
      } else {
        prefix = prompt;
        prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
        const Distribution dist = model.next_token_logprobs(prefix, focal);
        if (dist.empty()) throw Error("model_degenerate", "model returned an empty distribution");
        for (const auto& [tok, lp] : dist) {
          Hypothesis ext;
          ext.tokens = h.tokens;
          ext.tokens.push_back(tok);
          ext.logprob = h.logprob + lp;
          ext.finished = tok == eos || ext.tokens.size() >= max_len;
          heap.push_back(std::move(ext));
          std::push_heap(heap.begin(), heap.end(), detail::WorseRank{});
        }
      }
    }
    if (heap.empty()) break;
    std::pop_heap(heap.begin(), heap.end(), detail::WorseRank{});
    next.hypotheses.push_back(std::move(heap.back()));
    heap.pop_back();
  }
  return next;
}

/// Beam search returning up to k finished hypotheses in rank order.
/// Hypotheses end with the model's end token or are truncated at max_len
/// generated tokens. No length normalization.
inline std::vector<Hypothesis> beam_search_hypotheses(const ScoringModel& model, const FocalMethod& focal,
                                                      std::size_t k, std::size_t max_len) {
  if (k == 0) throw Error("invalid_argument", "beam width must be positive");
  if (max_len == 0) throw Error("invalid_argument", "max_len must be positive");
  const std::vector<std::string> prompt = model.prompt(focal);
  Beam beam;
  beam.width = k;
  beam.hypotheses.push_back(Hypothesis{});
  for (std::size_t step = 0; step < max_len; ++step) {
    const bool all_done = std::all_of(beam.hypotheses.begin(), beam.hypotheses.end(),
                                      [](const Hypothesis& h) { return h.finished; });
    if (all_done) break;
    beam = beam_step(model, focal, prompt, beam, max_len);
  }
  return beam.ranked();
}

/// Joins Java tokens into compilable single-line text.
inline std::string detokenize(std::span<const std::string> tokens) {
  auto glue_left = [](std::string_view t) {
    return t == ")" || t == "]" || t == ";" || t == "," || t == "." || t == "(" || t == "[" ||
           t == "++" || t == "--" || t == "::";
  };
  auto glue_right = [](std::string_view t) { return t == "(" || t == "[" || t == "." || t == "::"; };
  std::string out;
  std::string_view prev;
  for (const auto& tok : tokens) {
    if (!out.empty()) {
      const bool keyword_paren = tok == "(" && (prev == "if" || prev == "for" || prev == "while" ||
                                                prev == "catch" || prev == "switch" || prev == "synchronized");
      const bool after_control = prev == ";" || prev == "{" || prev == "}";
      if (tok == "{" || keyword_paren || !(glue_left(tok) || glue_right(prev)) || after_control) out += ' ';
    }
    out += tok;
    prev = tok;
  }
  return out;
}

/// Renders a hypothesis (prompt + generated tokens, end token dropped).
inline std::string render_hypothesis(const ScoringModel& model, const FocalMethod& focal, const Hypothesis& h) {
  std::vector<std::string> surface;
  const std::string eos = model.end_token();
  for (const auto& t : model.prompt(focal)) surface.push_back(model.surface(t, focal));
  for (const auto& t : h.tokens) {
    if (t == eos) continue;
    surface.push_back(model.surface(t, focal));
  }
  return detokenize(surface);
}

/// Beam search wrapped as test cases; element 0 is the single best test.
inline std::vector<TestCase> beam_search(const ScoringModel& model, const FocalMethod& focal, std::size_t k,
                                         std::size_t max_len) {
  std::vector<TestCase> out;
  const auto hyps = beam_search_hypotheses(model, focal, k, max_len);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    TestCase tc;
    tc.id = test_case_id(focal.id, i + 1);
    tc.focal_id = focal.id;
    tc.text = render_hypothesis(model, focal, hyps[i]);
    tc.generator_id = model.id();
    tc.logprob = hyps[i].logprob;
    out.push_back(std::move(tc));
  }
  return out;
}

} // namespace a3kit
