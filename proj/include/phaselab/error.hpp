#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phaselab {

enum class ErrorKind {
  kInvalidInput,
  kDimension,
  kCapacity,
  kNumerical,
  kParse,
  kValidation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

// Residuals can be tiny; std::to_string would print them as 0.000000.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

}  // namespace detail
}  // namespace phaselab
