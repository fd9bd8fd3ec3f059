#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ngg {

// Input outside the mathematical domain of an operation (bad t, bad space/dimension).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Envelope values incompatible with a graph model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured enumeration cap was exceeded.
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature did not reach its tolerance; carries the last estimate so callers
// can decide whether it is good enough.
class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, std::vector<double> last_estimate, double last_change)
      : std::runtime_error(what), last_estimate_(std::move(last_estimate)), last_change_(last_change) {}

  const std::vector<double>& last_estimate() const noexcept { return last_estimate_; }
  double last_change() const noexcept { return last_change_; }

 private:
  std::vector<double> last_estimate_;
  double last_change_;
};

// Malformed input files (edge lists, adjacency dumps, coefficient files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ngg
