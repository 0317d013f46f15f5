#pragma once

// Dense two-phase simplex for small standard-form programs
//   maximize c'x  subject to  A x = b,  x >= 0.
// Bland's rule guarantees termination; intended for occupancy-measure LPs
// with a few dozen variables.

#include "comoga/core.hpp"

namespace comoga {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double objective = 0.0;
};

LpResult maximize_standard_form(const Vector& c, const Matrix& a, const Vector& b, double tolerance = 1e-11);

}  // namespace comoga
