#pragma once

// Constrained multi-objective gradient aggregation.
//
// Each objective i is turned into the improvement constraint
//   omega_i * e_i <= g_i' d,   e_i = epsilon * ||g_i||_{H^{-1}},
// and the safety constraints are linearized as b_k' d <= d_k - J_Ck. The
// minimum-H-norm step satisfying all of them is the aggregated gradient.
// When any safety constraint is already violated only the safety rows are
// kept (recovery). The plain variant clips the result to the local region;
// the modified variant rebuilds the step from the normalized dual multipliers
// and rescales it to the current region size.

#include "comoga/core.hpp"

#include <limits>
#include <string_view>

namespace comoga {

enum class AggregatorVariant { kPlain, kModified };

struct AggregatorConfig {
  double epsilon = 0.05;
  double g_min = 0.0;
  double g_max = std::numeric_limits<double>::infinity();
  double lambda_max = std::numeric_limits<double>::infinity();
  AggregatorVariant variant = AggregatorVariant::kPlain;
  /// Constraint values up to threshold + tolerance count as satisfied when
  /// choosing between the normal and recovery problems.
  double feasibility_tolerance = 0.0;

  void validate() const;
};

enum class AggregationMode { kNormal, kRecovery, kZero };

std::string_view to_string(AggregationMode mode);

struct AggregationResult {
  Vector gradient;      // applied step
  Vector raw_gradient;  // before clipping / rescaling
  Vector duals_nu;
  Vector duals_lambda;
  AggregationMode mode = AggregationMode::kNormal;
};

/// omega_i * epsilon * ||g_i||_{H^{-1}} per objective.
Vector transform_offsets(const GradientBundle& bundle, const Preference& preference, const MetricGeometry& metric,
                         double epsilon);

AggregationResult aggregate_plain(const GradientBundle& bundle, const Preference& preference,
                                  const MetricGeometry& metric, const AggregatorConfig& config);

/// Dual-normalized update with step size `epsilon_t`; the transformation
/// offsets are also computed with `epsilon_t`.
AggregationResult aggregate_modified(const GradientBundle& bundle, const Preference& preference,
                                     const MetricGeometry& metric, const AggregatorConfig& config,
                                     double epsilon_t);

/// True iff some objective gradient has inner product below -tolerance with `gradient`.
bool conflict_check(const GradientBundle& bundle, const Vector& gradient, double tolerance = 1e-9);

/// Robbins-Monro region size epsilon_0 / (1 + t)^power.
double robbins_monro_epsilon(double epsilon_0, std::size_t t, double power = 0.6);

}  // namespace comoga
