#pragma once

#include <stdexcept>
#include <string>

namespace graphnls {

// Exit-code conventions used by the CLI: 2 validation/regime, 3 solver
// non-convergence, 4 runtime blow-up.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

class BlowupError : public std::runtime_error {
public:
  explicit BlowupError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace graphnls
