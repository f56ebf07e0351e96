#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace propshare {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector/matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value outside its documented domain (k out of range, alpha outside (0,1), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A user whose weights are all zero has no preference to respond to.
class IndifferentUserError : public Error {
 public:
  using Error::Error;
};

// A positively weighted machine with zero opponent bids and zero reservation:
// the utility jumps at 0, so no best response exists.
class UnboundedMarginalError : public Error {
 public:
  UnboundedMarginalError(const std::string& what, std::size_t machine)
      : Error(what), machine_(machine) {}
  std::size_t machine() const { return machine_; }

 private:
  std::size_t machine_;
};

// Strategy failure during a dynamics run, annotated with user/iteration.
class DynamicsError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace propshare
