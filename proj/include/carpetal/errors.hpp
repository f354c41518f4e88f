#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace carpetal {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// v_tot was requested at a point where P_tot is at or below the node floor.
class NodeSingularity : public Error {
 public:
  using Error::Error;
};

/// Neighbouring trajectories swapped order; reports the first offending output step.
class OrderingViolation : public Error {
 public:
  OrderingViolation(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// The carpet does not extend far enough in t for the requested search.
class InsufficientSpan : public Error {
 public:
  using Error::Error;
};

/// Best correlation found in the search range fell below the acceptance threshold.
class WeakRecurrence : public Error {
 public:
  WeakRecurrence(double peak, const std::string& what)
      : Error(what), peak_(peak) {}
  double peak() const noexcept { return peak_; }

 private:
  double peak_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace carpetal
