#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rlf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NotCentered : Error { using Error::Error; };
struct DegenerateTeacher : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct NoPhysicalRoot : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NoAdmissibleRoot : Error { using Error::Error; };
struct NoEdgeFound : Error { using Error::Error; };
struct DimensionOverflow : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Every violated invariant of a config, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string msg = "invalid config:";
    for (const auto& s : v) msg += "\n  - " + s;
    return msg;
  }
  std::vector<std::string> violations_;
};

struct IoError : Error { using Error::Error; };

}  // namespace rlf
