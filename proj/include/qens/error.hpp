#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qens {

/// Machine-readable failure category. The CLI maps each one to a distinct
/// exit code and prints the category name on stderr.
enum class ErrorCategory {
  capacity,
  binding,
  index,
  normalization,
  arity,
  registry,
  degenerate,
  input,
  parameter,
  configuration,
  usage,
  parse,
  validation,
  data,
  contract,
  io,
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace qens
