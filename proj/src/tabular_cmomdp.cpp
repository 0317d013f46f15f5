#include "comoga/tabular_cmomdp.hpp"

#include "comoga/linear_program.hpp"
#include "comoga/metrics.hpp"
#include "comoga/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace comoga::tabular {

namespace {

void check_table(const Matrix& table, Eigen::Index rows, Eigen::Index cols, const std::string& name, double bound) {
  if (table.rows() != rows || table.cols() != cols) {
    throw std::invalid_argument(name + " must be " + std::to_string(rows) + " x " + std::to_string(cols));
  }
  if (!table.allFinite()) throw std::invalid_argument(name + " has non-finite entries");
  if (table.cwiseAbs().maxCoeff() > bound) throw std::invalid_argument(name + " exceeds the declared reward bound");
}

void check_policy_shape(const TabularCMOMDP& mdp, const Matrix& policy) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw std::invalid_argument("policy table shape does not match the model");
  }
}

void check_weights(const Vector& w, std::size_t n, const char* name) {
  if (static_cast<std::size_t>(w.size()) != n) {
    throw std::invalid_argument(std::string(name) + " has the wrong length");
  }
  if (n > 0 && (!w.allFinite() || w.minCoeff() < 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be nonnegative and finite");
  }
}

}  // namespace

void TabularCMOMDP::validate() const {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("n_states and n_actions must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(reward_bound > 0.0)) throw std::invalid_argument("reward_bound must be positive");
  const Eigen::Index sa = n_states * n_actions;
  check_table(transition, sa, n_states, "P", std::numeric_limits<double>::infinity());
  if (transition.minCoeff() < 0.0) throw std::invalid_argument("P has negative entries");
  for (Eigen::Index r = 0; r < sa; ++r) {
    if (std::abs(transition.row(r).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("P[" + std::to_string(r / n_actions) + "][" + std::to_string(r % n_actions) +
                                  "] does not sum to 1");
    }
  }
  if (rho.size() != n_states || !rho.allFinite() || rho.minCoeff() < 0.0) {
    throw std::invalid_argument("rho must be a nonnegative vector of length n_states");
  }
  if (std::abs(rho.sum() - 1.0) > 1e-12) throw std::invalid_argument("rho does not sum to 1");
  if (rewards.empty()) throw std::invalid_argument("R needs at least one objective");
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    check_table(rewards[i], sa, n_states, "R[" + std::to_string(i) + "]", reward_bound);
  }
  for (std::size_t k = 0; k < costs.size(); ++k) {
    check_table(costs[k], sa, n_states, "C[" + std::to_string(k) + "]", reward_bound);
  }
  if (static_cast<std::size_t>(thresholds.size()) != costs.size() || !thresholds.allFinite()) {
    throw std::invalid_argument("thresholds must hold one finite value per constraint");
  }
}

Matrix expected_signal(const TabularCMOMDP& mdp, const Matrix& signal) {
  const Vector flat = mdp.transition.cwiseProduct(signal).rowwise().sum();
  return unflatten(flat, mdp.n_states, mdp.n_actions);
}

SoftmaxPolicyTable SoftmaxPolicyTable::uniform(Eigen::Index n_states, Eigen::Index n_actions) {
  return {Matrix::Zero(n_states, n_actions)};
}

Matrix SoftmaxPolicyTable::probabilities() const {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const double top = logits.row(s).maxCoeff();
    p.row(s) = (logits.row(s).array() - top).exp().matrix();
    p.row(s) /= p.row(s).sum();
  }
  return p;
}

Vector flatten(const Matrix& table) {
  Vector flat(table.size());
  for (Eigen::Index s = 0; s < table.rows(); ++s) flat.segment(s * table.cols(), table.cols()) = table.row(s);
  return flat;
}

Matrix unflatten(const Vector& flat, Eigen::Index n_states, Eigen::Index n_actions) {
  if (flat.size() != n_states * n_actions) throw std::invalid_argument("unflatten: size mismatch");
  Matrix table(n_states, n_actions);
  for (Eigen::Index s = 0; s < n_states; ++s) table.row(s) = flat.segment(s * n_actions, n_actions).transpose();
  return table;
}

EvaluationReport evaluate(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy) {
  check_policy_shape(mdp, policy.logits);
  if (!policy.logits.allFinite()) throw std::invalid_argument("policy logits must be finite");
  return evaluate_distribution(mdp, policy.probabilities());
}

EvaluationReport evaluate_distribution(const TabularCMOMDP& mdp, const Matrix& policy) {
  check_policy_shape(mdp, policy);
  const Eigen::Index S = mdp.n_states;
  const Eigen::Index A = mdp.n_actions;
  const auto n_obj = static_cast<Eigen::Index>(mdp.n_objectives());
  const auto n_con = static_cast<Eigen::Index>(mdp.n_constraints());
  const double gamma = mdp.gamma;

  Matrix p_pi = Matrix::Zero(S, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index a = 0; a < A; ++a) p_pi.row(s) += policy(s, a) * mdp.transition.row(mdp.row(s, a));
  }

  // Columns: objectives first, then constraints.
  std::vector<Matrix> signals;
  signals.reserve(static_cast<std::size_t>(n_obj + n_con));
  for (const auto& r : mdp.rewards) signals.push_back(expected_signal(mdp, r));
  for (const auto& c : mdp.costs) signals.push_back(expected_signal(mdp, c));
  Matrix r_pi(S, n_obj + n_con);
  for (std::size_t j = 0; j < signals.size(); ++j) {
    r_pi.col(static_cast<Eigen::Index>(j)) = signals[j].cwiseProduct(policy).rowwise().sum();
  }

  const Matrix system = Matrix::Identity(S, S) - gamma * p_pi;
  const Eigen::PartialPivLU<Matrix> lu(system);
  const Matrix values = lu.solve(r_pi);
  const Matrix system_t = system.transpose();
  const Eigen::PartialPivLU<Matrix> lu_t(system_t);
  const Vector occupancy = (1.0 - gamma) * lu_t.solve(mdp.rho);

  EvaluationReport rep;
  rep.policy = policy;
  const double value_res = (system * values - r_pi).cwiseAbs().maxCoeff();
  const double occ_res = (system_t * occupancy - (1.0 - gamma) * mdp.rho).cwiseAbs().maxCoeff();
  rep.residual = std::max(value_res, occ_res);
  if (!values.allFinite() || !occupancy.allFinite() || rep.residual > 1e-8 * (1.0 + r_pi.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("policy evaluation system is singular; gamma must be below 1 and P stochastic");
  }
  rep.occupancy = occupancy;

  const Matrix next_values = mdp.transition * values;  // (S A) x (N + M)
  rep.objective_returns.resize(n_obj);
  rep.constraint_returns.resize(n_con);
  for (std::size_t j = 0; j < signals.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Vector v = values.col(jj);
    Matrix adv(S, A);
    for (Eigen::Index s = 0; s < S; ++s) {
      for (Eigen::Index a = 0; a < A; ++a) {
        adv(s, a) = signals[j](s, a) + gamma * next_values(mdp.row(s, a), jj) - v[s];
      }
    }
    const double ret = mdp.rho.dot(v);
    if (jj < n_obj) {
      rep.values.push_back(v);
      rep.advantages.push_back(std::move(adv));
      rep.objective_returns[jj] = ret;
    } else {
      rep.cost_values.push_back(v);
      rep.cost_advantages.push_back(std::move(adv));
      rep.constraint_returns[jj - n_obj] = ret;
    }
  }
  return rep;
}

PolicyGradients policy_gradient(const TabularCMOMDP& mdp, const EvaluationReport& report) {
  const double scale = 1.0 / (1.0 - mdp.gamma);
  const Matrix weight = scale * (report.policy.array().colwise() * report.occupancy.array()).matrix();
  PolicyGradients g;
  for (const auto& a : report.advantages) g.objective_grads.push_back(weight.cwiseProduct(a));
  for (const auto& a : report.cost_advantages) g.constraint_grads.push_back(weight.cwiseProduct(a));
  return g;
}

SoftmaxFisherGeometry::SoftmaxFisherGeometry(Vector occupancy, Matrix policy)
    : occupancy_(std::move(occupancy)), policy_(std::move(policy)) {
  if (occupancy_.size() != policy_.rows()) throw std::invalid_argument("occupancy and policy disagree on n_states");
}

double SoftmaxFisherGeometry::norm(const Vector& v) const {
  if (v.size() != dimension()) throw std::invalid_argument("Fisher norm: dimension mismatch");
  const Eigen::Index A = policy_.cols();
  double total = 0.0;
  for (Eigen::Index s = 0; s < policy_.rows(); ++s) {
    const auto x = v.segment(s * A, A);
    const auto pi = policy_.row(s).transpose();
    const double mean = pi.dot(x);
    const double second = pi.dot(x.cwiseProduct(x));
    total += occupancy_[s] * std::max(0.0, second - mean * mean);
  }
  return std::sqrt(total);
}

Vector SoftmaxFisherGeometry::apply(const Vector& v) const {
  if (v.size() != dimension()) throw std::invalid_argument("Fisher apply: dimension mismatch");
  const Eigen::Index A = policy_.cols();
  Vector out(v.size());
  for (Eigen::Index s = 0; s < policy_.rows(); ++s) {
    const auto x = v.segment(s * A, A);
    const Vector pi = policy_.row(s).transpose();
    out.segment(s * A, A) = occupancy_[s] * (pi.cwiseProduct(x) - pi * pi.dot(x));
  }
  return out;
}

Vector SoftmaxFisherGeometry::inverse_apply(const Vector& v) const {
  if (v.size() != dimension()) throw std::invalid_argument("Fisher inverse: dimension mismatch");
  const Eigen::Index A = policy_.cols();
  Vector out = Vector::Zero(v.size());
  for (Eigen::Index s = 0; s < policy_.rows(); ++s) {
    Vector y(A);
    for (Eigen::Index a = 0; a < A; ++a) {
      const double mass = occupancy_[s] * policy_(s, a);
      y[a] = mass > 0.0 ? v[s * A + a] / mass : 0.0;
    }
    out.segment(s * A, A) = y.array() - y.mean();
  }
  return out;
}

Matrix fisher_matrix(const EvaluationReport& report) {
  const Eigen::Index S = report.policy.rows();
  const Eigen::Index A = report.policy.cols();
  Matrix f = Matrix::Zero(S * A, S * A);
  for (Eigen::Index s = 0; s < S; ++s) {
    const Vector pi = report.policy.row(s).transpose();
    Matrix block = Matrix(pi.asDiagonal()) - pi * pi.transpose();
    f.block(s * A, s * A, A, A) = report.occupancy[s] * block;
  }
  return f;
}

Matrix center_rows(const Matrix& table) { return table.colwise() - table.rowwise().mean(); }

Matrix fisher_update_increment(const TabularCMOMDP& mdp, const EvaluationReport& report, const Vector& nu,
                               const Vector& lambda, double alpha) {
  check_weights(nu, report.advantages.size(), "nu");
  if (static_cast<std::size_t>(lambda.size()) != report.cost_advantages.size()) {
    throw std::invalid_argument("lambda has the wrong length");
  }
  Matrix inc = Matrix::Zero(report.policy.rows(), report.policy.cols());
  for (std::size_t i = 0; i < report.advantages.size(); ++i) inc += nu[static_cast<Eigen::Index>(i)] * report.advantages[i];
  for (std::size_t k = 0; k < report.cost_advantages.size(); ++k) {
    inc -= lambda[static_cast<Eigen::Index>(k)] * report.cost_advantages[k];
  }
  return (alpha / (1.0 - mdp.gamma)) * inc;
}

Matrix fisher_update_explicit(const TabularCMOMDP& mdp, const EvaluationReport& report, const Vector& nu,
                              const Vector& lambda, double alpha) {
  check_weights(nu, report.advantages.size(), "nu");
  if (static_cast<std::size_t>(lambda.size()) != report.cost_advantages.size()) {
    throw std::invalid_argument("lambda has the wrong length");
  }
  const PolicyGradients grads = policy_gradient(mdp, report);
  Matrix g = Matrix::Zero(report.policy.rows(), report.policy.cols());
  for (std::size_t i = 0; i < grads.objective_grads.size(); ++i) {
    g += nu[static_cast<Eigen::Index>(i)] * grads.objective_grads[i];
  }
  for (std::size_t k = 0; k < grads.constraint_grads.size(); ++k) {
    g -= lambda[static_cast<Eigen::Index>(k)] * grads.constraint_grads[k];
  }
  const LocalMetric fisher = LocalMetric::fisher_pseudo(fisher_matrix(report));
  return alpha * unflatten(fisher.inverse_apply(flatten(g)), report.policy.rows(), report.policy.cols());
}

SoftmaxPolicyTable generalized_update(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy,
                                      const UpdateSequences& seq, double alpha_t) {
  const std::size_t n = mdp.n_objectives();
  const std::size_t m = mdp.n_constraints();
  check_weights(seq.nu_a, n, "nu_a");
  check_weights(seq.nu_b, n, "nu_b");
  check_weights(seq.lambda_a, m, "lambda_a");
  check_weights(seq.lambda_b, m, "lambda_b");
  if (!(alpha_t > 0.0) || !std::isfinite(alpha_t)) throw std::invalid_argument("alpha_t must be positive");
  if (std::abs(seq.nu_a.sum() - 1.0) > 1e-9) throw std::invalid_argument("nu_a must sum to 1");
  if (m > 0 && std::abs(seq.lambda_b.sum() - 1.0) > 1e-9) throw std::invalid_argument("lambda_b must sum to 1");
  for (const Vector* w : {&seq.nu_a, &seq.nu_b, &seq.lambda_a, &seq.lambda_b}) {
    if (w->size() > 0 && w->maxCoeff() > seq.lambda_max) throw std::invalid_argument("sequence exceeds lambda_max");
  }

  const EvaluationReport rep = evaluate(mdp, policy);
  const Vector slack = rep.constraint_returns - mdp.thresholds;
  const bool feasible = m == 0 || slack.maxCoeff() <= 0.0;

  Vector nu = seq.nu_a;
  Vector lambda = alpha_t * seq.lambda_a;
  if (!feasible) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      if (seq.lambda_b[kk] > 0.0 && slack[kk] < 0.0) {
        throw std::invalid_argument("lambda_b puts weight on a satisfied constraint");
      }
    }
    nu = alpha_t * seq.nu_b;
    lambda = seq.lambda_b;
  }
  SoftmaxPolicyTable next = policy;
  next.logits += fisher_update_increment(mdp, rep, nu, lambda, alpha_t);
  return next;
}

GradientBundle make_bundle(const TabularCMOMDP& mdp, const EvaluationReport& report, const PolicyGradients& grads) {
  GradientBundle b;
  for (const auto& g : grads.objective_grads) b.objective_grads.push_back(flatten(g));
  for (const auto& g : grads.constraint_grads) b.constraint_grads.push_back(flatten(g));
  b.constraint_values = report.constraint_returns;
  b.thresholds = mdp.thresholds;
  return b;
}

TabularStep comoga_tabular_step(const TabularCMOMDP& mdp, const SoftmaxPolicyTable& policy,
                                const Preference& preference, const AggregatorConfig& config, double epsilon_t) {
  if (config.variant != AggregatorVariant::kModified) {
    throw std::invalid_argument("tabular training requires the modified aggregator variant");
  }
  TabularStep step;
  step.report = evaluate(mdp, policy);
  step.bundle = make_bundle(mdp, step.report, policy_gradient(mdp, step.report));
  const SoftmaxFisherGeometry geometry(step.report.occupancy, step.report.policy);
  step.aggregation = aggregate_modified(step.bundle, preference, geometry, config, epsilon_t);
  step.policy = policy;
  step.policy.logits += unflatten(step.aggregation.gradient, mdp.n_states, mdp.n_actions);
  step.step_inf_norm = step.aggregation.gradient.size() > 0 ? step.aggregation.gradient.cwiseAbs().maxCoeff() : 0.0;
  return step;
}

TrainingResult train_comoga_tabular(const TabularCMOMDP& mdp, const Preference& preference,
                                    const AggregatorConfig& config, const TrainingOptions& options) {
  mdp.validate();
  if (options.max_steps == 0) throw std::invalid_argument("max_steps must be positive");
  if (!(options.epsilon_0 > 0.0)) throw std::invalid_argument("epsilon_0 must be positive");
  if (!(options.power > 0.5 && options.power <= 1.0)) {
    throw std::invalid_argument("power must lie in (0.5, 1] for a Robbins-Monro schedule");
  }
  if (options.record_every == 0) throw std::invalid_argument("record_every must be positive");

  TrainingResult out;
  SoftmaxPolicyTable policy = SoftmaxPolicyTable::uniform(mdp.n_states, mdp.n_actions);
  std::vector<std::pair<std::size_t, Vector>> nu_weights;
  std::size_t quiet = 0;

  for (std::size_t t = 0; t < options.max_steps; ++t) {
    const double eps_t = robbins_monro_epsilon(options.epsilon_0, t, options.power);
    TabularStep step = comoga_tabular_step(mdp, policy, preference, config, eps_t);
    const AggregationResult& agg = step.aggregation;
    switch (agg.mode) {
      case AggregationMode::kNormal: {
        ++out.normal_steps;
        if (conflict_check(step.bundle, agg.gradient)) ++out.conflict_violations;
        nu_weights.emplace_back(t, agg.duals_nu / agg.duals_nu.sum());
        break;
      }
      case AggregationMode::kRecovery:
        ++out.recovery_steps;
        break;
      case AggregationMode::kZero:
        ++out.zero_steps;
        break;
    }
    if (t % options.record_every == 0) {
      out.history.push_back({t, step.report.objective_returns, step.report.constraint_returns, step.step_inf_norm});
    }
    policy = std::move(step.policy);
    out.steps = t + 1;

    quiet = step.step_inf_norm < options.stop_tolerance ? quiet + 1 : 0;
    if (quiet >= options.stop_patience) {
      out.converged = true;
      break;
    }
  }

  const EvaluationReport final_report = evaluate(mdp, policy);
  out.objective_returns = final_report.objective_returns;
  out.constraint_returns = final_report.constraint_returns;
  out.history.push_back({out.steps, out.objective_returns, out.constraint_returns, 0.0});
  out.policy = std::move(policy);

  const std::size_t window_start = out.steps - out.steps / 10;
  Vector lo, hi;
  for (const auto& [t, w] : nu_weights) {
    if (t < window_start) continue;
    if (lo.size() == 0) {
      lo = w;
      hi = w;
    } else {
      lo = lo.cwiseMin(w);
      hi = hi.cwiseMax(w);
    }
  }
  if (lo.size() > 0) out.nu_weight_oscillation = (hi - lo).maxCoeff();
  return out;
}

namespace {

struct Candidate {
  Vector objectives;
  Vector costs;
};

bool within_thresholds(const Vector& costs, const Vector& thresholds) {
  return costs.size() == 0 || (costs - thresholds).maxCoeff() <= 0.0;
}

double cross(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Counter-clockwise convex hull without collinear points.
std::vector<Vector> convex_hull(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vector> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Upper-right chain of a convex polygon, ordered by ascending first objective.
std::vector<Vector> pareto_chain(const std::vector<Vector>& hull) {
  if (hull.size() == 1) return hull;
  auto better = [](const Vector& a, const Vector& b, int major) {
    const int minor = 1 - major;
    return a[major] != b[major] ? a[major] > b[major] : a[minor] > b[minor];
  };
  std::size_t right = 0, top = 0;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    if (better(hull[i], hull[right], 0)) right = i;
    if (better(hull[i], hull[top], 1)) top = i;
  }
  std::vector<Vector> chain;
  for (std::size_t i = right;; i = (i + 1) % hull.size()) {
    chain.push_back(hull[i]);
    if (i == top) break;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

double segment_linf_distance(const Vector& p, const Vector& a, const Vector& b) {
  const Vector d = b - a;
  const Vector r = p - a;
  auto f = [&](double t) { return (r - t * d).cwiseAbs().maxCoeff(); };
  std::vector<double> ts = {0.0, 1.0};
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] != 0.0) ts.push_back(r[i] / d[i]);
    for (Eigen::Index j = i + 1; j < d.size(); ++j) {
      for (double sign : {1.0, -1.0}) {
        const double den = d[i] - sign * d[j];
        if (den != 0.0) ts.push_back((r[i] - sign * r[j]) / den);
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (double t : ts) best = std::min(best, f(std::clamp(t, 0.0, 1.0)));
  return best;
}

}  // namespace

OracleFront cp_front_oracle(const TabularCMOMDP& mdp, std::size_t mixture_levels, std::uint64_t cap) {
  mdp.validate();
  const auto S = static_cast<std::size_t>(mdp.n_states);
  const auto A = static_cast<std::size_t>(mdp.n_actions);
  std::uint64_t count = 1;
  for (std::size_t s = 0; s < S; ++s) {
    if (count > cap / A) throw ResourceCapError("deterministic policy count exceeds the enumeration cap");
    count *= A;
  }
  if (count > cap) throw ResourceCapError("deterministic policy count exceeds the enumeration cap");

  std::vector<Candidate> det(count);
  Matrix onehot(mdp.n_states, mdp.n_actions);
  for (std::uint64_t code = 0; code < count; ++code) {
    onehot.setZero();
    std::uint64_t c = code;
    for (std::size_t s = 0; s < S; ++s, c /= A) onehot(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c % A)) = 1.0;
    const EvaluationReport rep = evaluate_distribution(mdp, onehot);
    det[code] = {rep.objective_returns, rep.constraint_returns};
  }

  const bool exact = mdp.n_objectives() == 2 && mdp.n_constraints() <= 1;
  std::vector<Vector> candidates;
  for (const auto& d : det) {
    if (within_thresholds(d.costs, mdp.thresholds)) candidates.push_back(d.objectives);
  }

  // Policies differing in one state span an exact segment of value space.
  std::uint64_t stride = 1;
  for (std::size_t s = 0; s < S; ++s, stride *= A) {
    for (std::uint64_t code = 0; code < count; ++code) {
      const std::uint64_t action = (code / stride) % A;
      for (std::uint64_t other = action + 1; other < A; ++other) {
        const Candidate& p = det[code];
        const Candidate& q = det[code + (other - action) * stride];
        auto push_mix = [&](double t) {
          const Vector costs = p.costs + t * (q.costs - p.costs);
          if (within_thresholds(costs, mdp.thresholds)) candidates.push_back(p.objectives + t * (q.objectives - p.objectives));
        };
        for (Eigen::Index k = 0; k < mdp.thresholds.size(); ++k) {
          const double lo = p.costs[k] - mdp.thresholds[k];
          const double hi = q.costs[k] - mdp.thresholds[k];
          if ((lo < 0.0 && hi > 0.0) || (lo > 0.0 && hi < 0.0)) push_mix(lo / (lo - hi));
        }
        if (!exact) {
          for (std::size_t j = 1; j <= mixture_levels; ++j) {
            push_mix(static_cast<double>(j) / static_cast<double>(mixture_levels + 1));
          }
        }
      }
    }
  }

  OracleFront front;
  front.exact = exact;
  if (candidates.empty()) return front;

  if (exact) {
    front.vertices = pareto_chain(convex_hull(candidates));
    for (std::size_t v = 0; v < front.vertices.size(); ++v) {
      front.points.push_back(front.vertices[v]);
      if (v + 1 == front.vertices.size()) break;
      for (std::size_t j = 1; j <= mixture_levels; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(mixture_levels + 1);
        front.points.push_back(front.vertices[v] + t * (front.vertices[v + 1] - front.vertices[v]));
      }
    }
  } else {
    for (std::size_t idx : metrics::non_dominated_indices(candidates)) front.points.push_back(candidates[idx]);
    front.vertices = front.points;
  }
  return front;
}

double front_distance(const OracleFront& front, const Vector& point) {
  double best = std::numeric_limits<double>::infinity();
  if (front.exact && front.vertices.size() >= 2) {
    for (std::size_t v = 0; v + 1 < front.vertices.size(); ++v) {
      best = std::min(best, segment_linf_distance(point, front.vertices[v], front.vertices[v + 1]));
    }
    return best;
  }
  for (const auto& p : front.points) best = std::min(best, (p - point).cwiseAbs().maxCoeff());
  return best;
}

OccupancyLpResult occupancy_lp(const TabularCMOMDP& mdp, const Vector& weights) {
  mdp.validate();
  if (static_cast<std::size_t>(weights.size()) != mdp.n_objectives()) {
    throw std::invalid_argument("weights must have one entry per objective");
  }
  const Eigen::Index S = mdp.n_states;
  const Eigen::Index A = mdp.n_actions;
  const Eigen::Index sa = S * A;
  const auto M = static_cast<Eigen::Index>(mdp.n_constraints());

  std::vector<Vector> r, c;
  for (const auto& x : mdp.rewards) r.push_back(flatten(expected_signal(mdp, x)));
  for (const auto& x : mdp.costs) c.push_back(flatten(expected_signal(mdp, x)));

  Matrix lhs = Matrix::Zero(S + M, sa + M);
  Vector rhs(S + M);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index a = 0; a < A; ++a) {
      const Eigen::Index col = mdp.row(s, a);
      lhs(s, col) += 1.0;
      lhs.col(col).head(S) -= mdp.gamma * mdp.transition.row(col).transpose();
    }
    rhs[s] = mdp.rho[s];
  }
  for (Eigen::Index k = 0; k < M; ++k) {
    lhs.row(S + k).head(sa) = c[static_cast<std::size_t>(k)].transpose();
    lhs(S + k, sa + k) = 1.0;
    rhs[S + k] = mdp.thresholds[k];
  }
  Vector objective = Vector::Zero(sa + M);
  for (std::size_t i = 0; i < r.size(); ++i) objective.head(sa) += weights[static_cast<Eigen::Index>(i)] * r[i];

  const LpResult lp = maximize_standard_form(objective, lhs, rhs);
  OccupancyLpResult out;
  if (lp.status != LpStatus::kOptimal) return out;
  out.feasible = true;
  const Vector x = lp.x.head(sa);
  out.occupancy = unflatten(x, S, A);
  out.objective_returns.resize(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) out.objective_returns[static_cast<Eigen::Index>(i)] = r[i].dot(x);
  out.constraint_returns.resize(M);
  for (Eigen::Index k = 0; k < M; ++k) out.constraint_returns[k] = c[static_cast<std::size_t>(k)].dot(x);
  return out;
}

std::size_t UniversalPolicyTable::bin(const Preference& preference) const {
  if (grid.empty()) throw std::invalid_argument("universal policy table has an empty grid");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != preference.size()) throw std::invalid_argument("preference dimension mismatch");
    const double dist = (grid[i].weights() - preference.weights()).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

const SoftmaxPolicyTable& UniversalPolicyTable::lookup(const Preference& preference) const {
  return policies[bin(preference)];
}

UniversalPolicyTable distill_universal(const std::vector<std::pair<Preference, SoftmaxPolicyTable>>& per_preference,
                                       const std::vector<Preference>& grid) {
  if (grid.empty()) throw std::invalid_argument("distillation grid is empty");
  UniversalPolicyTable table;
  table.grid = grid;
  for (const auto& pref : grid) {
    const auto it = std::find_if(per_preference.begin(), per_preference.end(),
                                 [&](const auto& entry) { return entry.first == pref; });
    if (it == per_preference.end()) throw std::invalid_argument("a grid preference has no policy");
    table.policies.push_back(it->second);
  }
  return table;
}

Vector kl_per_state(const SoftmaxPolicyTable& p, const SoftmaxPolicyTable& q) {
  if (p.logits.rows() != q.logits.rows() || p.logits.cols() != q.logits.cols()) {
    throw std::invalid_argument("KL: policy shapes differ");
  }
  const Matrix pp = p.probabilities();
  const Matrix qq = q.probabilities();
  Vector kl = Vector::Zero(pp.rows());
  for (Eigen::Index s = 0; s < pp.rows(); ++s) {
    for (Eigen::Index a = 0; a < pp.cols(); ++a) {
      if (pp(s, a) > 0.0) kl[s] += pp(s, a) * (std::log(pp(s, a)) - std::log(qq(s, a)));
    }
  }
  return kl;
}

RandomModel random_cmomdp(const RandomModelSpec& spec, std::uint64_t seed) {
  if (spec.n_states < 1 || spec.n_actions < 1 || spec.n_objectives < 1) {
    throw std::invalid_argument("random model needs positive sizes");
  }
  Rng rng(seed);
  auto dirichlet = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.exponential();
    return Vector(v / v.sum());
  };

  RandomModel out;
  TabularCMOMDP& mdp = out.mdp;
  mdp.n_states = spec.n_states;
  mdp.n_actions = spec.n_actions;
  mdp.gamma = spec.gamma;
  mdp.reward_bound = 1.0;
  const Eigen::Index sa = spec.n_states * spec.n_actions;
  mdp.transition.resize(sa, spec.n_states);
  for (Eigen::Index r = 0; r < sa; ++r) mdp.transition.row(r) = dirichlet(spec.n_states).transpose();
  mdp.rho = dirichlet(spec.n_states);
  auto uniform_table = [&]() {
    Matrix t(sa, spec.n_states);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = rng.uniform();
    }
    return t;
  };
  for (std::size_t i = 0; i < spec.n_objectives; ++i) mdp.rewards.push_back(uniform_table());
  for (std::size_t k = 0; k < spec.n_constraints; ++k) mdp.costs.push_back(uniform_table());

  out.slater_policy.logits.resize(spec.n_states, spec.n_actions);
  for (Eigen::Index s = 0; s < spec.n_states; ++s) {
    for (Eigen::Index a = 0; a < spec.n_actions; ++a) out.slater_policy.logits(s, a) = rng.uniform(-2.0, 2.0);
  }
  mdp.thresholds = Vector::Zero(static_cast<Eigen::Index>(spec.n_constraints));
  if (spec.n_constraints > 0) {
    mdp.thresholds = evaluate(mdp, out.slater_policy).constraint_returns.array() + spec.slater_margin;
  }
  mdp.validate();
  return out;
}

}  // namespace comoga::tabular
