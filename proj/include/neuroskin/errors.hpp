#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuroskin {

// Precondition violations on arguments (bad sizes, non-positive lengths, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Length mismatch between series or vectors that must agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Design vector outside its box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Stiffness restricted to free DOFs is singular (not enough supports).
class AssemblyRankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A simulation inside an objective evaluation failed; index identifies the
// perturbation (0 = base point, i+1 = perturbation of variable i) or the
// batch item.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace neuroskin
