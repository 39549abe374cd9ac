#pragma once

#include <stdexcept>
#include <string>

namespace circflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCapacityError : public Error {
 public:
  UnsupportedCapacityError(int line, long long cap)
      : Error("line " + std::to_string(line) + ": capacity " + std::to_string(cap) +
              " not supported (unit capacities only)"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Iterative linear solve or inner optimizer did not reach its tolerance.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A documented precondition or postcondition failed. Usually an upstream bug.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A progress step broke one of its feasibility guarantees; callers may retry with a smaller step.
class StepInfeasible : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace circflow
