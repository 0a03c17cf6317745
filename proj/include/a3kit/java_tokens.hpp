#pragma once

// Lossless lexer for Java method snippets. Just enough structure for
// delimiter balancing, declaration-prefix analysis and token masking; this
// is not a Java parser.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace a3kit {

enum class TokenKind {
  Identifier,
  Keyword,
  Annotation,
  Delimiter,
  Operator,
  StringLit,
  CharLit,
  NumberLit,
  Comment,
  Mask,
};

inline constexpr std::string_view kMaskText = "[MASK]";
/// Sequence separator between a focal method and its assertion.
inline constexpr std::string_view kSeparatorText = "</s>";

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t byte_offset;

  [[nodiscard]] std::size_t end() const noexcept { return byte_offset + text.size(); }
  [[nodiscard]] bool is(TokenKind k, std::string_view t) const noexcept {
    return kind == k && text == t;
  }
  [[nodiscard]] bool is_delim(char c) const noexcept {
    return kind == TokenKind::Delimiter && text.size() == 1 && text[0] == c;
  }

  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenStream {
  std::vector<Token> tokens;
  std::string source;
};

inline const char* to_string(TokenKind kind) noexcept {
  switch (kind) {
  case TokenKind::Identifier: return "Identifier";
  case TokenKind::Keyword: return "Keyword";
  case TokenKind::Annotation: return "Annotation";
  case TokenKind::Delimiter: return "Delimiter";
  case TokenKind::Operator: return "Operator";
  case TokenKind::StringLit: return "StringLit";
  case TokenKind::CharLit: return "CharLit";
  case TokenKind::NumberLit: return "NumberLit";
  case TokenKind::Comment: return "Comment";
  case TokenKind::Mask: return "Mask";
  }
  return "?";
}

namespace detail {

inline constexpr std::array<std::string_view, 53> kJavaKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",         "case",
    "catch",    "char",       "class",     "const",     "continue",     "default",
    "do",       "double",     "else",      "enum",      "extends",      "final",
    "finally",  "float",      "for",       "goto",      "if",           "implements",
    "import",   "instanceof", "int",       "interface", "long",         "native",
    "new",      "package",    "private",   "protected", "public",       "return",
    "short",    "static",     "strictfp",  "super",     "switch",       "synchronized",
    "this",     "throw",      "throws",    "transient", "try",          "void",
    "volatile", "while",      "true",      "false",     "null",
};

// Longest first; '>' is deliberately absent from compound forms so that
// nested generics ("List<List<T>>") never glue into shift operators.
inline constexpr std::array<std::string_view, 22> kCompoundOperators = {
    "</s>", "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<",
};

inline bool is_ident_start(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

inline bool is_ident_part(unsigned char c) noexcept {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

inline bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }

inline bool is_space(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_delimiter(unsigned char c) noexcept {
  return c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']';
}

inline bool is_keyword(std::string_view word) noexcept {
  return std::find(kJavaKeywords.begin(), kJavaKeywords.end(), word) != kJavaKeywords.end();
}

// Quoted literal starting at `i`; stops after the closing quote or just
// before the end of the line when unterminated.
inline std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  std::size_t j = i + 1;
  while (j < s.size()) {
    const char c = s[j];
    if (c == '\n' || c == '\r') return j;
    if (c == '\\') {
      if (j + 1 < s.size() && s[j + 1] != '\n' && s[j + 1] != '\r') {
        j += 2;
        continue;
      }
      return j + 1;
    }
    if (c == quote) return j + 1;
    ++j;
  }
  return j;
}

inline std::size_t scan_text_block(std::string_view s, std::size_t i) {
  std::size_t j = i + 3;
  while (j < s.size()) {
    if (s[j] == '\\') {
      j += 2;
      continue;
    }
    if (s.compare(j, 3, R"(""")") == 0) return j + 3;
    ++j;
  }
  return s.size();
}

inline std::size_t scan_number(std::string_view s, std::size_t i) {
  const bool hex = s.size() > i + 1 && s[i] == '0' && (s[i + 1] == 'x' || s[i + 1] == 'X');
  std::size_t j = i;
  while (j < s.size()) {
    const auto c = static_cast<unsigned char>(s[j]);
    if (is_ident_part(c) && c < 0x80) {
      ++j;
    } else if (c == '.') {
      ++j;
    } else if ((c == '+' || c == '-') && j > i) {
      const char prev = s[j - 1];
      const bool exponent = hex ? (prev == 'p' || prev == 'P') : (prev == 'e' || prev == 'E');
      if (!exponent) break;
      ++j;
    } else {
      break;
    }
  }
  return j;
}

} // namespace detail

/// Lexes arbitrary text. Never fails: unknown bytes become one-byte Operator
/// tokens, and the gaps between tokens are pure whitespace.
inline TokenStream lex(std::string_view source) {
  using namespace detail;
  TokenStream out;
  out.source = std::string(source);
  const std::string_view s = source;
  std::size_t i = 0;

  auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    out.tokens.push_back(Token{kind, std::string(s.substr(begin, end - begin)), begin});
    i = end;
  };

  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      std::size_t j = i + 2;
      while (j < s.size() && s[j] != '\n' && s[j] != '\r') ++j;
      emit(TokenKind::Comment, i, j);
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const std::size_t close = s.find("*/", i + 2);
      emit(TokenKind::Comment, i, close == std::string_view::npos ? s.size() : close + 2);
      continue;
    }
    if (c == '"') {
      if (s.compare(i, 3, R"(""")") == 0) {
        emit(TokenKind::StringLit, i, scan_text_block(s, i));
      } else {
        emit(TokenKind::StringLit, i, scan_quoted(s, i, '"'));
      }
      continue;
    }
    if (c == '\'') {
      emit(TokenKind::CharLit, i, scan_quoted(s, i, '\''));
      continue;
    }
    if (c == '[' && s.compare(i, kMaskText.size(), kMaskText) == 0) {
      emit(TokenKind::Mask, i, i + kMaskText.size());
      continue;
    }
    if (c == '@' && i + 1 < s.size() && is_ident_start(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      for (;;) {
        while (j < s.size() && is_ident_part(static_cast<unsigned char>(s[j]))) ++j;
        if (j + 1 < s.size() && s[j] == '.' && is_ident_start(static_cast<unsigned char>(s[j + 1]))) {
          ++j;
          continue;
        }
        break;
      }
      emit(TokenKind::Annotation, i, j);
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && is_ident_part(static_cast<unsigned char>(s[j]))) ++j;
      emit(is_keyword(s.substr(i, j - i)) ? TokenKind::Keyword : TokenKind::Identifier, i, j);
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(static_cast<unsigned char>(s[i + 1])))) {
      emit(TokenKind::NumberLit, i, scan_number(s, i));
      continue;
    }
    if (is_delimiter(c)) {
      emit(TokenKind::Delimiter, i, i + 1);
      continue;
    }
    std::size_t len = 1;
    for (const auto op : kCompoundOperators) {
      if (s.compare(i, op.size(), op) == 0) {
        len = op.size();
        break;
      }
    }
    emit(TokenKind::Operator, i, i + len);
  }
  return out;
}

/// Rebuilds the source from token texts plus the original inter-token gaps.
inline std::string reassemble(const TokenStream& stream) {
  std::string out;
  out.reserve(stream.source.size());
  std::size_t pos = 0;
  for (const auto& tok : stream.tokens) {
    out.append(stream.source, pos, tok.byte_offset - pos);
    out += tok.text;
    pos = tok.end();
  }
  out.append(stream.source, pos, std::string::npos);
  return out;
}

/// False for string/char literals cut off by end of line or input, and for
/// block comments with no closing "*/".
inline bool is_terminated(const Token& tok) noexcept {
  const std::string_view t = tok.text;
  switch (tok.kind) {
  case TokenKind::StringLit:
    if (t.starts_with(R"(""")")) return t.size() >= 6 && t.ends_with(R"(""")");
    [[fallthrough]];
  case TokenKind::CharLit: {
    if (t.size() < 2 || t.back() != t.front()) return false;
    std::size_t slashes = 0;
    for (std::size_t k = t.size() - 1; k > 1 && t[k - 1] == '\\'; --k) ++slashes;
    return slashes % 2 == 0;
  }
  case TokenKind::Comment:
    return !t.starts_with("/*") || (t.size() >= 4 && t.ends_with("*/"));
  default:
    return true;
  }
}

/// Index of the next non-comment token at or after `from`, or tokens.size().
inline std::size_t next_code_token(const std::vector<Token>& tokens, std::size_t from) {
  while (from < tokens.size() && tokens[from].kind == TokenKind::Comment) ++from;
  return from;
}

/// Index of the delimiter closing the group opened at `open`, if any.
inline std::optional<std::size_t> matching_close(const std::vector<Token>& tokens, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind != TokenKind::Delimiter) continue;
    const char c = t.text[0];
    if (c == '(' || c == '{' || c == '[') {
      ++depth;
    } else if (--depth == 0) {
      return i;
    }
  }
  return std::nullopt;
}

/// One past the closer of the group opened at `open` (tokens.size() when the
/// group never closes).
inline std::size_t skip_group(const std::vector<Token>& tokens, std::size_t open) {
  const auto close = matching_close(tokens, open);
  return close ? *close + 1 : tokens.size();
}

/// Token index of the declared method name: the Identifier right before the
/// first top-level "(" of the declaration prefix. The prefix ends at the
/// first top-level "{", ";" or "=", so body calls are never mistaken for it.
inline std::optional<std::size_t> method_name_index(const TokenStream& stream) {
  const auto& toks = stream.tokens;
  std::optional<std::size_t> prev;
  std::size_t i = next_code_token(toks, 0);
  while (i < toks.size()) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Annotation) {
      const std::size_t n = next_code_token(toks, i + 1);
      prev.reset();
      i = (n < toks.size() && toks[n].is_delim('(')) ? next_code_token(toks, skip_group(toks, n))
                                                     : n;
      continue;
    }
    if (t.is_delim('(')) {
      if (prev && toks[*prev].kind == TokenKind::Identifier) return prev;
      return std::nullopt;
    }
    if (t.is_delim('{') || t.is(TokenKind::Operator, ";") || t.is(TokenKind::Operator, "=")) {
      return std::nullopt;
    }
    prev = i;
    i = next_code_token(toks, i + 1);
  }
  return std::nullopt;
}

inline std::optional<std::string> method_name(const TokenStream& stream) {
  if (auto idx = method_name_index(stream)) return stream.tokens[*idx].text;
  return std::nullopt;
}

} // namespace a3kit
