#pragma once

// Experiment configuration read from a flat key = value file:
//
//   seed = 7
//   mask_ratio = 0.2
//   [paths]
//   focal = out/focal.jsonl
//
// Lines starting with '#' are comments; values may be double-quoted.

#include <a3kit/error.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <stdexcept>

namespace a3kit {

struct PipelineConfig {
  std::int64_t seed = 0;
  double mask_ratio = 0.2; // fraction of tokens masked for assertion pre-training
  std::size_t beam_width = 4;
  std::size_t attempts = 1; // candidates kept per focal method
  std::size_t ngram_order = 3;
  std::size_t max_len = 64; // generated tokens per candidate
  std::map<std::string, std::string> paths;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string v(value);
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(v, &used));
    } else if constexpr (std::is_signed_v<T>) {
      out = static_cast<T>(std::stoll(v, &used));
    } else {
      if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw Error("config_format", "invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
}

} // namespace detail

inline PipelineConfig parse_config(std::string_view text, PipelineConfig cfg = {}) {
  using detail::trim;
  std::string section;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("config_format", "line " + std::to_string(line_no) + ": bad section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "paths") throw Error("config_format", "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error("config_format", "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    if (section == "paths") {
      cfg.paths[key] = std::string(value);
    } else if (key == "seed") {
      cfg.seed = detail::parse_number<std::int64_t>(key, value);
    } else if (key == "mask_ratio") {
      cfg.mask_ratio = detail::parse_number<double>(key, value);
    } else if (key == "beam_width") {
      cfg.beam_width = detail::parse_number<std::size_t>(key, value);
    } else if (key == "attempts") {
      cfg.attempts = detail::parse_number<std::size_t>(key, value);
    } else if (key == "ngram_order") {
      cfg.ngram_order = detail::parse_number<std::size_t>(key, value);
    } else if (key == "max_len") {
      cfg.max_len = detail::parse_number<std::size_t>(key, value);
    } else {
      throw Error("config_format", "unknown key '" + key + "'");
    }
  }
  if (!(cfg.mask_ratio > 0.0 && cfg.mask_ratio <= 1.0)) throw Error("config_format", "mask_ratio must lie in (0, 1]");
  if (cfg.beam_width == 0 || cfg.attempts == 0 || cfg.max_len == 0) {
    throw Error("config_format", "beam_width, attempts and max_len must be positive");
  }
  if (cfg.ngram_order < 2) throw Error("config_format", "ngram_order must be at least 2");
  return cfg;
}

} // namespace a3kit
