#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace quasar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a Monte-Carlo or sampling estimate has no usable samples.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is (numerically) singular.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace quasar
