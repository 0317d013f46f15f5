#pragma once

// Exact machinery for finite constrained multi-objective MDPs with softmax
// policies: closed-form evaluation, policy gradients, the Fisher geometry in
// advantage form, the modified aggregation update, and brute-force
// constrained-Pareto oracles.
//
// Policy tables are S x A matrices. Where a flat parameter vector is needed
// the entry (s, a) sits at index s * A + a.

#include "comoga/aggregator.hpp"
#include "comoga/core.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace comoga::tabular {

struct TabularCMOMDP {
  Eigen::Index n_states = 0;
  Eigen::Index n_actions = 0;
  double gamma = 0.9;
  Vector rho;
  Vector thresholds;  // one per constraint
  /// Row s * A + a holds P(. | s, a).
  Matrix transition;
  /// Per objective, (S * A) x S tables R(s, a, s').
  std::vector<Matrix> rewards;
  /// Per constraint, (S * A) x S tables C(s, a, s').
  std::vector<Matrix> costs;
  /// Declared bound on |R| and |C| entries.
  double reward_bound = std::numeric_limits<double>::infinity();

  std::size_t n_objectives() const { return rewards.size(); }
  std::size_t n_constraints() const { return costs.size(); }
  Eigen::Index row(Eigen::Index s, Eigen::Index a) const { return s * n_actions + a; }

  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const;
};

/// Expected one-step signal sum_s' P(s'|s,a) X(s,a,s') as an S x A table.
Matrix expected_signal(const TabularCMOMDP& mdp, const Matrix& signal);

struct SoftmaxPolicyTable {
  Matrix logits;  // S x A

  static SoftmaxPolicyTable uniform(Eigen::Index n_states, Eigen::Index n_actions);
  /// Row-wise softmax, computed with the row maximum subtracted.
  Matrix probabilities() const;
};

Vector flatten(const Matrix& table);
Matrix unflatten(const Vector& flat, Eigen::Index n_states, Eigen::Index n_actions);

struct EvaluationReport {
  Matrix policy;                       // S x A probabilities
  std::vector<Vector> values;          // per objective
  std::vector<Vector> cost_values;     // per constraint
  Vector objective_returns;            // J_Ri = rho' V_i
  Vector constraint_returns;           // J_Ck
  std::vector<Matrix> advantages;      // per objective, S x A
  std::vector<Matrix> cost_advantages; // per constraint, S x A
  Vector occupancy;                    // normalized discounted state visitation
  /// Largest residual of the value and occupancy linear systems.
  double residual = 0.0;
};

EvaluationReport evaluate(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy);
/// Evaluation for an explicit (possibly deterministic) action distribution.
EvaluationReport evaluate_distribution(const TabularCMOMDP& mdp, const Matrix& policy);

struct PolicyGradients {
  std::vector<Matrix> objective_grads;   // S x A each
  std::vector<Matrix> constraint_grads;
};

/// d(s) pi(a|s) A(s, a) / (1 - gamma) for every objective and constraint.
PolicyGradients policy_gradient(const TabularCMOMDP& mdp, const EvaluationReport& report);

/// Fisher information of the softmax table under the occupancy measure,
/// F = sum_s d(s) (diag(pi_s) - pi_s pi_s'), applied blockwise in O(S A).
class SoftmaxFisherGeometry final : public MetricGeometry {
 public:
  SoftmaxFisherGeometry(Vector occupancy, Matrix policy);

  Eigen::Index dimension() const override { return policy_.size(); }
  double norm(const Vector& v) const override;
  /// Per state, divide by d(s) pi(a|s) and re-center. This equals the
  /// pseudo-inverse on per-state zero-sum inputs (the range of F, which holds
  /// every policy gradient) without amplifying their rounding residue by
  /// 1 / pi. Entries with zero probability mass map to zero.
  Vector inverse_apply(const Vector& v) const override;
  Vector apply(const Vector& v) const override;

 private:
  Vector occupancy_;
  Matrix policy_;
};

/// The same Fisher matrix as an explicit (S A) x (S A) array.
Matrix fisher_matrix(const EvaluationReport& report);

/// alpha / (1 - gamma) * (sum_i nu_i A_Ri - sum_k lambda_k A_Ck).
Matrix fisher_update_increment(const TabularCMOMDP& mdp, const EvaluationReport& report, const Vector& nu,
                               const Vector& lambda, double alpha);

/// alpha * F^+ (sum_i nu_i grad J_Ri - sum_k lambda_k grad J_Ck) through an
/// explicit eigendecomposition pseudo-inverse. Agrees with the closed form on
/// the Fisher row space (per-state zero-sum tables).
Matrix fisher_update_explicit(const TabularCMOMDP& mdp, const EvaluationReport& report, const Vector& nu,
                              const Vector& lambda, double alpha);

/// Per-state removal of the action mean (projection onto the Fisher row space).
Matrix center_rows(const Matrix& table);

struct UpdateSequences {
  Vector nu_a;      // objective weights, feasible case (sum 1)
  Vector nu_b;      // objective weights, violated case
  Vector lambda_a;  // constraint weights, feasible case
  Vector lambda_b;  // constraint weights, violated case (sum 1)
  double lambda_max = std::numeric_limits<double>::infinity();
};

/// One step of the two-case natural-gradient rule: feasible policies move with
/// (nu_a, alpha_t lambda_a), violated ones with (alpha_t nu_b, lambda_b), using
/// step alpha_t / (1 - gamma) on the advantage tables.
SoftmaxPolicyTable generalized_update(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy,
                                      const UpdateSequences& sequences, double alpha_t);

GradientBundle make_bundle(const TabularCMOMDP& mdp, const EvaluationReport& report, const PolicyGradients& grads);

struct TabularStep {
  SoftmaxPolicyTable policy;  // after the step
  EvaluationReport report;    // at the policy before the step
  GradientBundle bundle;
  AggregationResult aggregation;
  double step_inf_norm = 0.0;
};

/// One modified-aggregation step under the softmax Fisher metric.
TabularStep comoga_tabular_step(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy,
                                const Preference& preference, const AggregatorConfig& config, double epsilon_t);

struct TrainingOptions {
  double epsilon_0 = 0.5;
  double power = 0.6;
  std::size_t max_steps = 200000;
  double stop_tolerance = 1e-8;
  std::size_t stop_patience = 100;
  /// History is recorded every `record_every` steps plus the last step.
  std::size_t record_every = 1000;
};

struct HistoryEntry {
  std::size_t step = 0;
  Vector objective_returns;
  Vector constraint_returns;
  double step_norm = 0.0;
};

struct TrainingResult {
  SoftmaxPolicyTable policy;
  Vector objective_returns;
  Vector constraint_returns;
  std::size_t steps = 0;
  bool converged = false;
  std::size_t normal_steps = 0;
  std::size_t recovery_steps = 0;
  std::size_t zero_steps = 0;
  std::size_t conflict_violations = 0;
  /// Largest (max - min) of any normalized objective dual weight over the
  /// normal-mode steps in the last 10% of training; nullopt without such steps.
  std::optional<double> nu_weight_oscillation;
  std::vector<HistoryEntry> history;
};

/// Repeats comoga_tabular_step from the uniform policy with the
/// Robbins-Monro region size epsilon_0 / (1 + t)^power.
TrainingResult train_comoga_tabular(const TabularCMOMDP& mdp, const Preference& preference,
                                    const AggregatorConfig& config, const TrainingOptions& options);

struct OracleFront {
  /// Non-dominated feasible objective vectors, lexicographically sorted.
  std::vector<Vector> points;
  /// Front vertices; with `exact` the front is the polyline through them.
  std::vector<Vector> vertices;
  bool exact = false;
};

constexpr std::uint64_t kOracleEnumerationCap = 1u << 20;

/// Enumerates deterministic policies and the value segments between
/// policies that differ in a single state. For two objectives and at most one
/// constraint the returned front is exact (vertices plus `mixture_levels`
/// interior points per edge); otherwise it is the Pareto set of the feasible
/// candidates, including `mixture_levels` interior points per segment.
/// Throws ResourceCapError when A^S exceeds `cap`.
OracleFront cp_front_oracle(const TabularCMOMDP& mdp, std::size_t mixture_levels,
                            std::uint64_t cap = kOracleEnumerationCap);

/// Smallest per-component (L-infinity) distance from `point` to the front:
/// to the polyline for exact fronts, to the listed points otherwise.
double front_distance(const OracleFront& front, const Vector& point);

struct OccupancyLpResult {
  bool feasible = false;
  Vector objective_returns;
  Vector constraint_returns;
  Matrix occupancy;  // S x A discounted state-action visitation
};

/// maximize sum_i w_i J_Ri subject to J_Ck <= d_k over occupancy measures.
OccupancyLpResult occupancy_lp(const TabularCMOMDP& mdp, const Vector& weights);

struct UniversalPolicyTable {
  std::vector<Preference> grid;
  std::vector<SoftmaxPolicyTable> policies;

  /// Nearest grid preference in Euclidean distance; ties go to the lower index.
  std::size_t bin(const Preference& preference) const;
  const SoftmaxPolicyTable& lookup(const Preference& preference) const;
};

/// Tabular stand-in for distillation: every grid bin stores the supplied
/// policy verbatim, so the per-bin KL objective is zero.
UniversalPolicyTable distill_universal(const std::vector<std::pair<Preference, SoftmaxPolicyTable>>& per_preference,
                                       const std::vector<Preference>& grid);

/// KL(p(.|s) || q(.|s)) for every state.
Vector kl_per_state(const SoftmaxPolicyTable& p, const SoftmaxPolicyTable& q);

struct RandomModelSpec {
  Eigen::Index n_states = 3;
  Eigen::Index n_actions = 2;
  std::size_t n_objectives = 2;
  std::size_t n_constraints = 1;
  double gamma = 0.8;
  /// Thresholds are set to J_C of a random reference policy plus this margin.
  double slater_margin = 0.05;
};

struct RandomModel {
  TabularCMOMDP mdp;
  SoftmaxPolicyTable slater_policy;
};

/// Random model with Dirichlet(1) transitions and initial distribution,
/// U[0, 1) rewards and costs, and Slater thresholds. Deterministic per seed.
RandomModel random_cmomdp(const RandomModelSpec& spec, std::uint64_t seed);

}  // namespace comoga::tabular
