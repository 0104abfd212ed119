#pragma once

#include <stdexcept>
#include <string>

namespace pcgame {

// Raised when an iterative solver cannot deliver a usable result: a follower
// sub-game that does not settle, an exhausted rejection budget, a search
// that would exceed its evaluation cap.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvaluationCapExceeded : public SolverError {
 public:
  EvaluationCapExceeded(double required, double cap);

  double required() const noexcept { return required_; }
  double cap() const noexcept { return cap_; }

 private:
  double required_;
  double cap_;
};

// Malformed input document. The message names the offending line or field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcgame
