#pragma once

// Exact solver for the small dense QPs behind gradient aggregation:
//
//   minimize  x' H x   subject to  a_j' x >= c_j  (lower),  a_k' x <= c_k  (upper)
//
// Every constraint subset is enumerated on the Gram matrix G = A H^{-1} A',
// so the cost does not depend on the parameter dimension. At the optimum
// 2 H x = sum_j nu_j a_j - sum_k lambda_k a_k with nu, lambda >= 0.

#include "comoga/core.hpp"

#include <vector>

namespace comoga {

struct LinearConstraint {
  Vector a;
  double c = 0.0;
};

/// Hard cap on the number of constraints (2^16 active sets).
inline constexpr std::size_t kMaxQpConstraints = 16;

struct QPInstance {
  LocalMetric metric;
  std::vector<LinearConstraint> lower;  // a' x >= c
  std::vector<LinearConstraint> upper;  // a' x <= c
};

enum class QPStatus { kOptimal, kInfeasible };

struct QPSolution {
  Vector primal;
  Vector duals_lower;
  Vector duals_upper;
  QPStatus status = QPStatus::kOptimal;
};

/// Dual solution of the Gram-form problem with all constraints written as
/// s_j' x >= r_j. `multipliers` are the KKT multipliers of those rows.
struct GramSolution {
  Vector multipliers;
  QPStatus status = QPStatus::kOptimal;
};

/// Enumerates active sets on the Gram matrix G_ij = s_i' H^{-1} s_j, first by
/// subset size and then by bitmask value, and returns the first KKT-consistent
/// one. Linearly dependent active sets are solved by least squares.
GramSolution solve_gram(const Matrix& gram, const Vector& offsets);

QPSolution solve(const MetricGeometry& metric, const std::vector<LinearConstraint>& lower,
                 const std::vector<LinearConstraint>& upper);

inline QPSolution solve(const QPInstance& instance) {
  return solve(instance.metric, instance.lower, instance.upper);
}

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

/// Max-norm residuals of the KKT blocks (dual sign violations count toward
/// feasibility).
KktResiduals kkt_residual(const MetricGeometry& metric, const std::vector<LinearConstraint>& lower,
                          const std::vector<LinearConstraint>& upper, const QPSolution& solution);

inline KktResiduals kkt_residual(const QPInstance& instance, const QPSolution& solution) {
  return kkt_residual(instance.metric, instance.lower, instance.upper, solution);
}

/// Reference magnitude for the relative KKT tolerances: 1 + max|a| + max|c|.
double kkt_scale(const std::vector<LinearConstraint>& lower, const std::vector<LinearConstraint>& upper);

/// x' H x
double qp_objective(const MetricGeometry& metric, const Vector& x);

}  // namespace comoga
