#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace a3kit {

/// Library failure carrying a stable, machine-readable code such as
/// "empty_corpus" or "model_degenerate". The CLI maps codes to exit statuses.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  explicit Error(std::string code) : Error(code, code) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

} // namespace a3kit
