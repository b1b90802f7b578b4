#include "qens/error.hpp"

namespace qens {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::capacity: return "capacity";
    case ErrorCategory::binding: return "binding";
    case ErrorCategory::index: return "index";
    case ErrorCategory::normalization: return "normalization";
    case ErrorCategory::arity: return "arity";
    case ErrorCategory::registry: return "registry";
    case ErrorCategory::degenerate: return "degenerate";
    case ErrorCategory::input: return "input";
    case ErrorCategory::parameter: return "parameter";
    case ErrorCategory::configuration: return "configuration";
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::data: return "data";
    case ErrorCategory::contract: return "contract";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  // 1 is reserved for unexpected failures, 2 for command-line misuse.
  return 10 + static_cast<int>(c);
}

}  // namespace qens
