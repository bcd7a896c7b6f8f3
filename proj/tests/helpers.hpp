#pragma once

#include <cmath>

#include "quasar/objectives.hpp"

namespace qt {

using quasar::Vec;

// f(w) = c/2 |w|^2.
inline quasar::Objective half_norm(Eigen::Index d, double c = 1.0) {
  return quasar::diagonal_quadratic(Vec::Constant(d, c), Vec::Zero(d));
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace qt
