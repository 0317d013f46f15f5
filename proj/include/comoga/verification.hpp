#pragma once

// Independent oracles and randomized property suites shared by the unit
// tests, `comoga selftest` and the acceptance runner.

#include "comoga/qp_solver.hpp"
#include "comoga/random.hpp"
#include "comoga/tabular_cmomdp.hpp"

#include <cstdint>
#include <string>

namespace comoga::verification {

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  /// Largest observed error measure and the bound it is compared against.
  double worst = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;

  bool passed() const { return instances > 0 && failures == 0; }
};

/// Symmetric positive definite B'B + shift I with B uniform on [-1, 1).
Matrix random_spd(Eigen::Index n, double shift, Rng& rng);

/// Dimension 1-6, up to three lower and three upper rows, explicit SPD metric.
QPInstance random_qp_instance(Rng& rng);

/// Primal brute force: for every constraint subset solve
///   [2H  -S'] [x]   [0]
///   [S    0 ] [mu] = [r]
/// and keep the cheapest point that is feasible with nonnegative multipliers.
/// Subsets with singular systems are skipped. Requires an explicit metric.
QPSolution brute_force_qp(const Matrix& h, const std::vector<LinearConstraint>& lower,
                          const std::vector<LinearConstraint>& upper);

/// Solver primal within 1e-7 of the brute force and KKT residuals within
/// 1e-8 * kkt_scale on random instances.
SuiteResult qp_oracle_suite(std::size_t instances, std::uint64_t seed);

/// The single-objective improvement-constraint QP (and aggregate_plain with
/// one objective) against eps * H^{-1} g / ||g||_{H^{-1}}, in H-norm, to 1e-7.
SuiteResult transformation_suite(std::size_t instances, std::uint64_t seed);

/// Central differences (h = 1e-6) of the toy objectives and constraint at random points
/// in [-11, 11]^2, away from the x2 = 0 seam and the log-valley cores.
SuiteResult toy_gradient_suite(std::size_t points, std::uint64_t seed);

/// Central differences (h = 1e-5) of J_R and J_C through exact evaluation at
/// random logits on random 3-state models, relative error 1e-4.
SuiteResult tabular_gradient_suite(std::size_t points, std::uint64_t seed);

/// Exact hypervolume within 3 standard errors of the Monte-Carlo estimate on
/// random 2-D and 3-D archives.
SuiteResult hypervolume_mc_suite(std::size_t archives, std::size_t samples, std::uint64_t seed);

/// Relative error used by the gradient suites: ||a - b||_inf / max(||a||_inf, ||b||_inf),
/// or 0 when both vanish.
double relative_error(const Vector& analytic, const Vector& numeric);

struct ReturnEstimate {
  Vector objective_means;
  Vector objective_std_errors;
  Vector constraint_means;
  Vector constraint_std_errors;
  std::size_t horizon = 0;
};

/// Simulated discounted returns truncated at the first horizon whose tail
/// bound gamma^H * reward_bound / (1 - gamma) is below `truncation`.
ReturnEstimate monte_carlo_returns(const tabular::TabularCMOMDP& mdp, const Matrix& policy, std::size_t episodes,
                                   double truncation, std::uint64_t seed);

}  // namespace comoga::verification
