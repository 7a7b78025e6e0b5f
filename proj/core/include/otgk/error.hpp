#pragma once

#include <stdexcept>
#include <string>

namespace otgk {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (asymmetric matrix, negative
// distance, mismatched dimensions, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input files.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(format(file, line, what)), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  // 1-based line number, or 0 when the error is not tied to a line.
  long line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& file, long line,
                            const std::string& what) {
    std::string msg = file;
    if (line > 0) msg += ":" + std::to_string(line);
    return msg + ": " + what;
  }

  std::string file_;
  long line_;
};

// Underflow, non-finite values, infeasible transport problems.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace otgk
