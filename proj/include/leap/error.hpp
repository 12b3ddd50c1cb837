#pragma once

#include <stdexcept>
#include <string>

namespace leap {

/// Malformed or inconsistent data: bad files, contract violations, mismatched
/// inputs. Mapped to exit code 2 by the CLI.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An exhaustive enumeration would exceed its stated bound. Exit code 3.
struct BoundError : std::runtime_error {
  explicit BoundError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace leap
