// Error type shared by all pinsynth modules.

#pragma once

#include <stdexcept>
#include <string>

namespace pinsynth {

/// Raised for malformed inputs, contract violations and I/O failures.
/// Messages name the offending file, line, utterance or field so that
/// operators can act on them directly.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pinsynth
