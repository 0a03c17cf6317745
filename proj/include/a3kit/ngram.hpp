#pragma once

// Add-one smoothed n-gram model over Java test-method tokens. It is the
// reference scoring backend that lets the pipeline run without a neural
// generator.

#include <a3kit/error.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/java_tokens.hpp>

#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace a3kit {

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kFocalPlaceholder = "<FOCAL>";
inline constexpr std::string_view kTestNamePlaceholder = "<TESTNAME>";

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class NgramModel final : public ScoringModel {
public:
  NgramModel(std::size_t order, std::vector<std::string> vocabulary,
             std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> counts)
      : order_(order), vocabulary_(std::move(vocabulary)), counts_(std::move(counts)) {
    for (const auto& [history, next] : counts_) {
      std::size_t total = 0;
      for (const auto& [tok, c] : next) total += c;
      history_totals_[history] = total;
    }
  }

  [[nodiscard]] std::string id() const override { return "ngram:" + std::to_string(order_); }
  [[nodiscard]] const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  [[nodiscard]] std::size_t order() const noexcept { return order_; }

  /// Smoothed P(token | last order-1 tokens of prefix), as a probability.
  [[nodiscard]] double probability(std::span<const std::string> prefix, const std::string& token) const {
    const std::string key = history_key(prefix);
    const double v = static_cast<double>(vocabulary_.size());
    double total = 0.0;
    double count = 0.0;
    if (auto it = history_totals_.find(key); it != history_totals_.end()) total = static_cast<double>(it->second);
    if (auto it = counts_.find(key); it != counts_.end()) {
      if (auto jt = it->second.find(token); jt != it->second.end()) count = static_cast<double>(jt->second);
    }
    return (count + 1.0) / (total + v);
  }

  [[nodiscard]] Distribution next_token_logprobs(std::span<const std::string> prefix,
                                                 const FocalMethod&) const override {
    const std::string key = history_key(prefix);
    const double v = static_cast<double>(vocabulary_.size());
    double total = 0.0;
    const std::unordered_map<std::string, std::size_t>* row = nullptr;
    if (auto it = history_totals_.find(key); it != history_totals_.end()) total = static_cast<double>(it->second);
    if (auto it = counts_.find(key); it != counts_.end()) row = &it->second;
    const double denom = std::log(total + v);
    Distribution out;
    for (const auto& tok : vocabulary_) {
      double c = 0.0;
      if (row != nullptr) {
        if (auto jt = row->find(tok); jt != row->end()) c = static_cast<double>(jt->second);
      }
      out.emplace(tok, std::log(c + 1.0) - denom);
    }
    return out;
  }

  /// "@Test public void test<FocalNameCapitalized>", with the name held as
  /// a placeholder so it matches the training-time normalization.
  [[nodiscard]] std::vector<std::string> prompt(const FocalMethod&) const override {
    return {"@Test", "public", "void", std::string(kTestNamePlaceholder)};
  }

  [[nodiscard]] std::string surface(const std::string& token, const FocalMethod& focal) const override {
    if (token == kTestNamePlaceholder) return "test" + capitalize(focal.method_name());
    if (token == kFocalPlaceholder) return focal.method_name();
    return token;
  }

private:
  [[nodiscard]] std::string history_key(std::span<const std::string> prefix) const {
    std::string key;
    const std::size_t need = order_ - 1;
    const std::size_t have = std::min(need, prefix.size());
    for (std::size_t pad = have; pad < need; ++pad) {
      key += kSentenceStart;
      key += '\x1f';
    }
    for (std::size_t i = prefix.size() - have; i < prefix.size(); ++i) {
      key += prefix[i];
      key += '\x1f';
    }
    return key;
  }

  std::size_t order_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> counts_;
  std::unordered_map<std::string, std::size_t> history_totals_;
};

/// Trains on token sequences. An end token is appended to any sequence that
/// does not already end with one.
inline NgramModel train_ngram(const std::vector<std::vector<std::string>>& corpus, std::size_t n) {
  if (n < 2) throw Error("invalid_argument", "n-gram order must be at least 2");
  bool any = false;
  for (const auto& seq : corpus) any = any || !seq.empty();
  if (!any) throw Error("empty_corpus", "n-gram training corpus is empty");

  std::set<std::string> vocab{std::string(kEndOfSequence)};
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> counts;
  for (const auto& raw : corpus) {
    if (raw.empty()) continue;
    std::vector<std::string> seq(n - 1, std::string(kSentenceStart));
    seq.insert(seq.end(), raw.begin(), raw.end());
    if (seq.back() != kEndOfSequence) seq.emplace_back(kEndOfSequence);
    for (std::size_t i = n - 1; i < seq.size(); ++i) {
      vocab.insert(seq[i]);
      std::string key;
      for (std::size_t h = i - (n - 1); h < i; ++h) {
        key += seq[h];
        key += '\x1f';
      }
      ++counts[key][seq[i]];
    }
  }
  return NgramModel(n, std::vector<std::string>(vocab.begin(), vocab.end()), std::move(counts));
}

/// Training tokens for one test method: comments dropped, the declared test
/// name replaced by a placeholder, and references to the method it tests
/// (the name minus its "test" prefix) replaced by another.
inline std::vector<std::string> test_method_training_tokens(std::string_view test_source) {
  const TokenStream ts = lex(test_source);
  const auto name_idx = method_name_index(ts);
  std::string focal_name;
  if (name_idx) {
    const std::string& name = ts.tokens[*name_idx].text;
    if (name.size() > 4) {
      std::string lower = name.substr(0, 4);
      for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lower == "test") {
        focal_name = name.substr(4);
        focal_name[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(focal_name[0])));
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    const Token& t = ts.tokens[i];
    if (t.kind == TokenKind::Comment) continue;
    if (name_idx && i == *name_idx) {
      out.emplace_back(kTestNamePlaceholder);
    } else if (!focal_name.empty() && t.kind == TokenKind::Identifier && t.text == focal_name) {
      out.emplace_back(kFocalPlaceholder);
    } else {
      out.push_back(t.text);
    }
  }
  return out;
}

} // namespace a3kit
