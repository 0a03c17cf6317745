#pragma once

#include <a3kit/error.hpp>
#include <a3kit/java_tokens.hpp>
#include <a3kit/random.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace a3kit {

struct AssertPair {
  std::string focal_method;
  std::string assertion;
};

struct MaskedPair {
  std::string masked_input;
  std::string target;
  std::vector<std::size_t> masked_indices; // positions in lex(target).tokens
  std::int64_t seed = 0;

  friend bool operator==(const MaskedPair&, const MaskedPair&) = default;
};

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> valid_ids;
  std::vector<std::string> holdout_ids;
  std::int64_t seed = 0;
};

/// focal method, separator, assertion.
inline std::string joined_pair_text(const AssertPair& pair) {
  std::string out = pair.focal_method;
  out += ' ';
  out += kSeparatorText;
  out += ' ';
  out += pair.assertion;
  return out;
}

/// Number of tokens to mask: round-half-up of ratio * maskable, at least one.
inline std::size_t mask_count(double mask_ratio, std::size_t maskable) {
  if (maskable == 0) return 0;
  const auto n = static_cast<std::size_t>(std::floor(mask_ratio * static_cast<double>(maskable) + 0.5));
  return std::clamp<std::size_t>(n, 1, maskable);
}

/// Token positions of `target_tokens` that may be masked. Comments, existing
/// masks and the pair separator are excluded.
inline std::vector<std::size_t> maskable_positions(const std::vector<Token>& target_tokens,
                                                   std::size_t separator_offset) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < target_tokens.size(); ++i) {
    const Token& t = target_tokens[i];
    if (t.kind == TokenKind::Comment || t.kind == TokenKind::Mask) continue;
    if (t.byte_offset == separator_offset && t.text == kSeparatorText) continue;
    out.push_back(i);
  }
  return out;
}

/// Replaces a seeded uniform sample of maskable tokens with "[MASK]". The
/// focal method and the assertion share one masking budget.
inline MaskedPair mask_pair(const AssertPair& pair, double mask_ratio, std::int64_t seed) {
  if (!(mask_ratio > 0.0 && mask_ratio <= 1.0)) {
    throw Error("invalid_ratio", "mask ratio must lie in (0, 1]");
  }
  if (pair.focal_method.empty() || pair.assertion.empty()) {
    throw Error("invalid_pair", "focal_method and assertion must be non-empty");
  }
  MaskedPair out;
  out.seed = seed;
  out.target = joined_pair_text(pair);
  const TokenStream ts = lex(out.target);
  const auto maskable = maskable_positions(ts.tokens, pair.focal_method.size() + 1);
  if (maskable.empty()) throw Error("empty_maskable", "pair has no maskable tokens");

  Rng rng(static_cast<std::uint64_t>(seed));
  const auto picks = sample_without_replacement(maskable.size(), mask_count(mask_ratio, maskable.size()), rng);
  out.masked_indices.reserve(picks.size());
  for (auto p : picks) out.masked_indices.push_back(maskable[p]);

  std::string masked;
  masked.reserve(out.target.size());
  std::size_t pos = 0;
  for (auto idx : out.masked_indices) {
    const Token& t = ts.tokens[idx];
    masked.append(out.target, pos, t.byte_offset - pos);
    masked += kMaskText;
    pos = t.end();
  }
  masked.append(out.target, pos, std::string::npos);
  out.masked_input = std::move(masked);
  return out;
}

/// Seeded shuffle followed by contiguous slicing: floor(train * n) ids for
/// training, floor(valid * n) for validation, the rest held out.
inline SplitManifest split_corpus(std::vector<std::string> ids, double train_fraction, double valid_fraction,
                                  std::int64_t seed) {
  if (ids.empty()) throw Error("empty_corpus", "cannot split an empty corpus");
  if (!(train_fraction > 0.0 && valid_fraction > 0.0 && train_fraction + valid_fraction <= 1.0 + 1e-12)) {
    throw Error("invalid_fractions", "fractions must be positive and sum to at most 1");
  }
  const std::size_t n = ids.size();
  // The epsilon absorbs binary representation error (0.57 * 100 = 56.999...).
  auto portion = [n](double f) {
    return std::min(n, static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9)));
  };
  const std::size_t n_train = portion(train_fraction);
  const std::size_t n_valid = std::min(n - n_train, portion(valid_fraction));

  Rng rng(static_cast<std::uint64_t>(seed));
  seeded_shuffle(ids, rng);

  SplitManifest m;
  m.seed = seed;
  const auto first = ids.begin();
  m.train_ids.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  m.valid_ids.assign(first + static_cast<std::ptrdiff_t>(n_train),
                     first + static_cast<std::ptrdiff_t>(n_train + n_valid));
  m.holdout_ids.assign(first + static_cast<std::ptrdiff_t>(n_train + n_valid), ids.end());
  return m;
}

} // namespace a3kit
