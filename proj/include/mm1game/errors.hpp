#pragma once

#include <stdexcept>
#include <string>

namespace mm1game {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates its documented domain (mu <= 0, alpha <= 0, r1 >= r2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Effective load reaches or exceeds the service rate.
class UnstableQueue : public Error {
 public:
  using Error::Error;
};

/// The requested operation needs equal exponents for all users.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Derivative requested exactly at a breakpoint of the keep-probability.
class NonDifferentiable : public Error {
 public:
  using Error::Error;
};

/// No linear policy satisfies the requested design.
class DesignInfeasible : public Error {
 public:
  using Error::Error;
};

/// Simulated queue grew past its configured cap.
class Overload : public Error {
 public:
  using Error::Error;
};

}  // namespace mm1game
