#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lzcd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Argument lies outside the range on which an evaluator is certified.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// The adaptive stepper could not make progress at coordinate `where`.
class StepUnderflow : public Error {
 public:
  StepUnderflow(const std::string& msg, double where) : Error(msg), where_(where) {}
  double where() const noexcept { return where_; }

 private:
  double where_;
};

/// No control coupling in the search bracket drives the transition
/// probability below the root tolerance. Carries the best point seen.
class NoRoot : public Error {
 public:
  NoRoot(const std::string& msg, double b_min, double p_min)
      : Error(msg), b_min_(b_min), p_min_(p_min) {}
  double b_min() const noexcept { return b_min_; }
  double p_min() const noexcept { return p_min_; }

 private:
  double b_min_;
  double p_min_;
};

/// Configuration validation failure; lists every violated field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "invalid configuration:";
    for (const auto& s : p) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace lzcd
