#include "comoga/aggregator.hpp"

#include "comoga/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace comoga {

namespace {

void check_inputs(const GradientBundle& bundle, const Preference& preference, const MetricGeometry& metric) {
  bundle.validate();
  if (static_cast<std::size_t>(preference.size()) != bundle.n_objectives()) {
    throw std::invalid_argument("preference has " + std::to_string(preference.size()) + " weights but the bundle has " +
                                std::to_string(bundle.n_objectives()) + " objectives");
  }
  if (bundle.dimension() != metric.dimension()) {
    throw std::invalid_argument("bundle dimension does not match the metric");
  }
}

struct SubproblemResult {
  QPSolution qp;
  bool feasible_case = true;
};

// Normal problem when all safety constraints hold, recovery problem otherwise.
SubproblemResult solve_subproblem(const GradientBundle& bundle, const Preference& preference,
                                  const MetricGeometry& metric, double epsilon, double feasibility_tolerance) {
  SubproblemResult out;
  out.feasible_case = bundle.feasible(feasibility_tolerance);

  std::vector<LinearConstraint> lower;
  if (out.feasible_case) {
    const Vector offsets = transform_offsets(bundle, preference, metric, epsilon);
    lower.reserve(bundle.n_objectives());
    for (std::size_t i = 0; i < bundle.n_objectives(); ++i) {
      lower.push_back({bundle.objective_grads[i], offsets[static_cast<Eigen::Index>(i)]});
    }
  }
  std::vector<LinearConstraint> upper;
  upper.reserve(bundle.n_constraints());
  for (std::size_t k = 0; k < bundle.n_constraints(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    upper.push_back({bundle.constraint_grads[k], bundle.thresholds[kk] - bundle.constraint_values[kk]});
  }
  out.qp = solve(metric, lower, upper);
  return out;
}

AggregationResult zero_result(const GradientBundle& bundle) {
  AggregationResult r;
  r.gradient = Vector::Zero(bundle.dimension());
  r.raw_gradient = Vector::Zero(bundle.dimension());
  r.duals_nu = Vector::Zero(static_cast<Eigen::Index>(bundle.n_objectives()));
  r.duals_lambda = Vector::Zero(static_cast<Eigen::Index>(bundle.n_constraints()));
  r.mode = AggregationMode::kZero;
  return r;
}

}  // namespace

void AggregatorConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive and finite");
  if (!(g_min >= 0.0)) throw std::invalid_argument("g_min must be nonnegative");
  if (!(g_max >= g_min)) throw std::invalid_argument("g_max must be at least g_min");
  if (!(lambda_max >= 0.0)) throw std::invalid_argument("lambda_max must be nonnegative");
  if (!(feasibility_tolerance >= 0.0)) throw std::invalid_argument("feasibility_tolerance must be nonnegative");
}

std::string_view to_string(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::kNormal:
      return "normal";
    case AggregationMode::kRecovery:
      return "recovery";
    case AggregationMode::kZero:
      return "zero";
  }
  return "unknown";
}

Vector transform_offsets(const GradientBundle& bundle, const Preference& preference, const MetricGeometry& metric,
                         double epsilon) {
  check_inputs(bundle, preference, metric);
  Vector offsets(static_cast<Eigen::Index>(bundle.n_objectives()));
  for (std::size_t i = 0; i < bundle.n_objectives(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    offsets[ii] = preference[ii] * epsilon * h_inv_norm(metric, bundle.objective_grads[i]);
  }
  return offsets;
}

AggregationResult aggregate_plain(const GradientBundle& bundle, const Preference& preference,
                                  const MetricGeometry& metric, const AggregatorConfig& config) {
  config.validate();
  check_inputs(bundle, preference, metric);

  const SubproblemResult sub =
      solve_subproblem(bundle, preference, metric, config.epsilon, config.feasibility_tolerance);
  if (sub.qp.status == QPStatus::kInfeasible) return zero_result(bundle);

  AggregationResult r;
  r.mode = sub.feasible_case ? AggregationMode::kNormal : AggregationMode::kRecovery;
  r.raw_gradient = sub.qp.primal;
  r.duals_nu = sub.feasible_case ? sub.qp.duals_lower
                                 : Vector::Zero(static_cast<Eigen::Index>(bundle.n_objectives()));
  r.duals_lambda = sub.qp.duals_upper;

  const double norm = metric.norm(r.raw_gradient);
  const double factor = norm > config.epsilon ? config.epsilon / norm : 1.0;
  r.gradient = factor * r.raw_gradient;
  return r;
}

AggregationResult aggregate_modified(const GradientBundle& bundle, const Preference& preference,
                                     const MetricGeometry& metric, const AggregatorConfig& config,
                                     double epsilon_t) {
  config.validate();
  check_inputs(bundle, preference, metric);
  if (!(epsilon_t > 0.0)) throw std::invalid_argument("epsilon_t must be positive");

  const SubproblemResult sub = solve_subproblem(bundle, preference, metric, epsilon_t, config.feasibility_tolerance);
  if (sub.qp.status == QPStatus::kInfeasible) return zero_result(bundle);

  AggregationResult r;
  r.duals_nu = sub.feasible_case ? sub.qp.duals_lower
                                 : Vector::Zero(static_cast<Eigen::Index>(bundle.n_objectives()));
  r.duals_lambda = sub.qp.duals_upper;

  Vector direction = Vector::Zero(bundle.dimension());
  if (sub.feasible_case) {
    const double nu_sum = r.duals_nu.sum();
    if (!(nu_sum > 0.0)) return zero_result(bundle);
    for (std::size_t i = 0; i < bundle.n_objectives(); ++i) {
      direction += (r.duals_nu[static_cast<Eigen::Index>(i)] / nu_sum) * bundle.objective_grads[i];
    }
    for (std::size_t k = 0; k < bundle.n_constraints(); ++k) {
      const double lambda = r.duals_lambda[static_cast<Eigen::Index>(k)];
      const double weight = epsilon_t * std::min(lambda / (epsilon_t * nu_sum), config.lambda_max);
      direction -= weight * bundle.constraint_grads[k];
    }
    r.mode = AggregationMode::kNormal;
  } else {
    const double lambda_sum = r.duals_lambda.sum();
    if (!(lambda_sum > 0.0)) return zero_result(bundle);
    for (std::size_t k = 0; k < bundle.n_constraints(); ++k) {
      direction -= (r.duals_lambda[static_cast<Eigen::Index>(k)] / lambda_sum) * bundle.constraint_grads[k];
    }
    r.mode = AggregationMode::kRecovery;
  }

  r.raw_gradient = metric.inverse_apply(direction);
  const double denom = std::min(std::max(metric.norm(r.raw_gradient), config.g_min), config.g_max);
  if (!(denom > 0.0)) {
    r.gradient = Vector::Zero(bundle.dimension());
    r.mode = AggregationMode::kZero;
    return r;
  }
  r.gradient = (epsilon_t / denom) * r.raw_gradient;
  return r;
}

bool conflict_check(const GradientBundle& bundle, const Vector& gradient, double tolerance) {
  for (const auto& g : bundle.objective_grads) {
    if (g.size() != gradient.size()) throw std::invalid_argument("conflict_check: dimension mismatch");
    if (g.dot(gradient) < -tolerance) return true;
  }
  return false;
}

double robbins_monro_epsilon(double epsilon_0, std::size_t t, double power) {
  return epsilon_0 / std::pow(1.0 + static_cast<double>(t), power);
}

}  // namespace comoga
