#pragma once

#include <a3kit/java_tokens.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace a3kit {

struct FocalContext {
  std::vector<std::string> constructors;
  std::vector<std::string> sibling_signatures;
  std::vector<std::string> fields;

  friend bool operator==(const FocalContext&, const FocalContext&) = default;
};

/// A public method under test together with the surrounding class context.
struct FocalMethod {
  std::string id; // project/Class/name(ParamTypes)
  std::string project;
  std::string class_name;
  std::string signature;
  std::string body; // verbatim source of the whole declaration
  FocalContext context;

  /// Bare method name, taken from the signature.
  [[nodiscard]] std::string method_name() const {
    const auto ts = lex(signature);
    return a3kit::method_name(ts).value_or("");
  }

  friend bool operator==(const FocalMethod&, const FocalMethod&) = default;
};

struct Extraction {
  std::vector<FocalMethod> methods;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline bool is_modifier(const Token& t) {
  static constexpr std::array<std::string_view, 12> mods = {
      "public",   "private",  "protected", "static",   "final",     "abstract",
      "native",   "synchronized", "transient", "volatile", "strictfp", "default",
  };
  return t.kind == TokenKind::Keyword && std::find(mods.begin(), mods.end(), t.text) != mods.end();
}

inline bool is_type_keyword(const Token& t) {
  return t.kind == TokenKind::Keyword &&
         (t.text == "class" || t.text == "interface" || t.text == "enum");
}

inline bool is_record(const Token& t) {
  return t.kind == TokenKind::Identifier && t.text == "record";
}

// Token texts of [begin, end) with comments dropped and every whitespace
// run collapsed to one space.
inline std::string normalized_text(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
  std::string out;
  const Token* prev = nullptr;
  bool gap = false;
  for (std::size_t i = begin; i < end; ++i) {
    const Token& t = toks[i];
    if (prev != nullptr && t.byte_offset > prev->end()) gap = true;
    if (t.kind == TokenKind::Comment) {
      gap = true;
      prev = &t;
      continue;
    }
    if (gap && !out.empty()) out += ' ';
    out += t.text;
    gap = false;
    prev = &t;
  }
  return out;
}

struct Member {
  std::size_t begin = 0;     // first token (annotations included)
  std::size_t decl = 0;      // first non-annotation token
  std::size_t end = 0;       // one past the last token
  std::optional<std::size_t> name;
  std::size_t paren = 0;      // "(" opening the parameter list
  std::size_t params_end = 0; // one past the ")" closing the parameter list
  bool has_body = false;
  bool is_public = false;
  bool is_abstract = false;
  bool is_constructor = false;
  bool is_field = false;
};

// Parameter types of a "(...)" group, e.g. "double,double".
inline std::string parameter_types(const std::vector<Token>& toks, std::size_t open, std::size_t close) {
  std::vector<std::string> types;
  std::vector<std::size_t> current;
  int depth = 0;
  auto flush = [&] {
    // Drop the trailing parameter name; drop annotations and "final".
    std::vector<std::size_t> kept;
    for (auto idx : current) {
      const Token& t = toks[idx];
      if (t.kind == TokenKind::Annotation || t.is(TokenKind::Keyword, "final")) continue;
      kept.push_back(idx);
    }
    if (kept.size() > 1 && toks[kept.back()].kind == TokenKind::Identifier) kept.pop_back();
    std::string ty;
    for (auto idx : kept) ty += toks[idx].text;
    if (!ty.empty()) types.push_back(ty);
    current.clear();
  };
  for (std::size_t i = open + 1; i + 1 < close; ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    if (t.is(TokenKind::Operator, "<")) ++depth;
    if (t.is(TokenKind::Operator, ">")) --depth;
    if (depth == 0 && t.is(TokenKind::Operator, ",")) {
      flush();
      continue;
    }
    current.push_back(i);
  }
  flush();
  std::string out;
  for (std::size_t k = 0; k < types.size(); ++k) {
    if (k) out += ',';
    out += types[k];
  }
  return out;
}

} // namespace detail

/// Extracts every public, non-abstract method of the first top-level class in
/// `source_file`. Methods of nested types are skipped. Results are in source
/// order; ids are unique within the call.
inline Extraction extract_focal_methods(std::string_view source_file, const std::string& project) {
  using namespace detail;
  Extraction result;
  const TokenStream ts = lex(source_file);
  const auto& toks = ts.tokens;

  // Locate the first top-level "class" keyword.
  std::optional<std::size_t> class_kw;
  {
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (t.is_delim('{')) ++depth;
      if (t.is_delim('}')) --depth;
      if (depth == 0 && t.is(TokenKind::Keyword, "class")) {
        class_kw = i;
        break;
      }
    }
  }
  if (!class_kw) {
    result.diagnostics.push_back("no class declaration found");
    return result;
  }
  const std::size_t name_idx = next_code_token(toks, *class_kw + 1);
  if (name_idx >= toks.size() || toks[name_idx].kind != TokenKind::Identifier) {
    result.diagnostics.push_back("class declaration without a name");
    return result;
  }
  const std::string class_name = toks[name_idx].text;

  std::size_t open = name_idx + 1;
  while (open < toks.size() && !toks[open].is_delim('{')) ++open;
  if (open >= toks.size()) {
    result.diagnostics.push_back("class " + class_name + " has no body");
    return result;
  }
  const std::size_t last = matching_close(toks, open).value_or(toks.size());

  // Split the class body into member declarations.
  std::vector<Member> members;
  std::size_t i = open + 1;
  while (i < last) {
    i = next_code_token(toks, i);
    if (i >= last) break;
    if (toks[i].is(TokenKind::Operator, ";")) {
      ++i;
      continue;
    }
    Member m;
    m.begin = i;
    bool nested_type = false;
    std::optional<std::size_t> first_paren;
    std::optional<std::size_t> first_assign;
    std::size_t j = i;
    bool decl_set = false;
    while (j < last) {
      const Token& t = toks[j];
      if (t.kind == TokenKind::Comment) {
        ++j;
        continue;
      }
      if (t.kind == TokenKind::Annotation) {
        const std::size_t n = next_code_token(toks, j + 1);
        j = (n < last && toks[n].is_delim('(')) ? skip_group(toks, n) : j + 1;
        continue;
      }
      if (!decl_set) {
        m.decl = j;
        decl_set = true;
      }
      if (is_type_keyword(t) || (is_record(t) && !first_paren)) nested_type = true;
      if (t.is(TokenKind::Operator, "=") && !first_assign && !first_paren) first_assign = j;
      if (t.is_delim('(')) {
        if (!first_paren) first_paren = j;
        j = skip_group(toks, j);
        if (!first_assign && !m.params_end) m.params_end = j;
        continue;
      }
      if (t.is_delim('[')) {
        j = skip_group(toks, j);
        continue;
      }
      if (t.is_delim('{')) {
        j = skip_group(toks, j);
        m.has_body = true;
        break;
      }
      if (t.is(TokenKind::Operator, ";")) {
        ++j;
        break;
      }
      if (t.is_delim('}')) break; // stray closer
      ++j;
    }
    m.end = std::max(j, i + 1);
    if (!decl_set) m.decl = m.begin;
    i = m.end;
    if (nested_type) continue;

    if (first_paren && !first_assign) {
      // Method or constructor: name precedes the parameter list.
      std::size_t k = *first_paren;
      while (k > m.decl && toks[k - 1].kind == TokenKind::Comment) --k;
      if (k == m.decl || toks[k - 1].kind != TokenKind::Identifier) continue; // initializer etc.
      m.name = k - 1;
      m.paren = *first_paren;
      bool has_type = false;
      for (std::size_t p = m.decl; p < *m.name; ++p) {
        const Token& t = toks[p];
        if (t.kind == TokenKind::Comment) continue;
        if (t.is(TokenKind::Keyword, "public")) m.is_public = true;
        if (t.is(TokenKind::Keyword, "abstract") || t.is(TokenKind::Keyword, "native")) m.is_abstract = true;
        if (!is_modifier(t) && t.kind != TokenKind::Annotation) has_type = true;
      }
      m.is_constructor = !has_type && toks[*m.name].text == class_name;
    } else if (!m.has_body || first_assign) {
      m.is_field = true;
    } else {
      continue; // instance or static initializer block
    }
    members.push_back(m);
  }

  auto signature_of = [&](const Member& m) { return normalized_text(toks, m.decl, m.params_end); };
  auto field_of = [&](const Member& m) { return normalized_text(toks, m.decl, m.end); };

  FocalContext shared;
  std::vector<std::string> method_sigs;
  for (const auto& m : members) {
    if (m.is_field) {
      shared.fields.push_back(field_of(m));
    } else if (m.is_constructor) {
      shared.constructors.push_back(signature_of(m));
    } else {
      method_sigs.push_back(signature_of(m));
    }
  }

  std::map<std::string, int> seen_ids;
  std::size_t method_pos = 0;
  for (const auto& m : members) {
    if (m.is_field || m.is_constructor) continue;
    const std::size_t my_pos = method_pos++;
    if (!m.is_public || m.is_abstract || !m.has_body) continue;

    FocalMethod fm;
    fm.project = project;
    fm.class_name = class_name;
    fm.signature = method_sigs[my_pos];
    const std::size_t body_begin = toks[m.decl].byte_offset;
    const std::size_t body_stop = toks[m.end - 1].end();
    fm.body = std::string(source_file.substr(body_begin, body_stop - body_begin));

    const std::string params = parameter_types(toks, m.paren, m.params_end);
    std::string id = project + "/" + class_name + "/" + toks[*m.name].text + "(" + params + ")";
    if (const int n = seen_ids[id]++; n > 0) id += "~" + std::to_string(n + 1);
    fm.id = std::move(id);

    fm.context.constructors = shared.constructors;
    fm.context.fields = shared.fields;
    for (std::size_t s = 0; s < method_sigs.size(); ++s) {
      if (s != my_pos) fm.context.sibling_signatures.push_back(method_sigs[s]);
    }
    result.methods.push_back(std::move(fm));
  }
  return result;
}

/// Verbatim source of every @Test-annotated method in a file, in source
/// order. Used as training text for the reference generator.
inline std::vector<std::string> extract_test_methods(std::string_view source_file) {
  const TokenStream ts = lex(source_file);
  const auto& toks = ts.tokens;
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < toks.size()) {
    const Token& t = toks[i];
    const bool test_annotation =
        t.kind == TokenKind::Annotation && (t.text == "@Test" || t.text.ends_with(".Test"));
    if (!test_annotation) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    std::optional<std::size_t> close;
    while (j < toks.size()) {
      const Token& u = toks[j];
      if (u.is_delim('(')) {
        j = skip_group(toks, j);
        continue;
      }
      if (u.is(TokenKind::Operator, ";")) break;
      if (u.is_delim('{')) {
        close = matching_close(toks, j);
        break;
      }
      ++j;
    }
    if (!close) {
      i = j;
      continue;
    }
    const std::size_t begin = t.byte_offset;
    out.emplace_back(source_file.substr(begin, toks[*close].end() - begin));
    i = *close + 1;
  }
  return out;
}

} // namespace a3kit
