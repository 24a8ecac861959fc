#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace canon_gnn {

enum class ErrorKind {
  dimension,
  width,
  parse,
  validation,
  size,
  labeling,
  universe,
  parameter,
  configuration,
  numeric,
  generation,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::width: return "width error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::size: return "size error";
    case ErrorKind::labeling: return "labeling error";
    case ErrorKind::universe: return "universe error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::generation: return "generation error";
  }
  return "error";
}

/// Every domain failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace canon_gnn
