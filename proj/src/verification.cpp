#include "comoga/verification.hpp"

#include "comoga/aggregator.hpp"
#include "comoga/metrics.hpp"
#include "comoga/toy_bench.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>

namespace comoga::verification {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector random_vector(Eigen::Index n, double lo, double hi, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

std::size_t random_index(std::size_t n, Rng& rng) { return static_cast<std::size_t>(rng.next() % n); }

void record(SuiteResult& r, double error) {
  ++r.instances;
  if (!(error <= r.tolerance)) ++r.failures;
  if (std::isnan(error) || error > r.worst) r.worst = error;
}

std::size_t sample(const Vector& probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(probabilities.size() - 1);
}

// Same log-valley arguments as the toy objectives.
bool near_toy_singularity(const toy::ToyPoint& p) {
  const double u1 = 0.5 * (-p.x1 - 7.0) - std::tanh(-p.x2);
  const double u2 = 0.5 * (-p.x1 + 3.0) + std::tanh(-p.x2 + 2.0);
  return std::abs(p.x2) < 1e-3 || std::abs(u1) < 0.05 || std::abs(u2) < 0.05;
}

}  // namespace

Matrix random_spd(Eigen::Index n, double shift, Rng& rng) {
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
  }
  Matrix h = b.transpose() * b + shift * Matrix::Identity(n, n);
  return 0.5 * (h + h.transpose());
}

QPInstance random_qp_instance(Rng& rng) {
  const auto n = static_cast<Eigen::Index>(1 + random_index(6, rng));
  QPInstance inst{LocalMetric::explicit_spd(random_spd(n, 0.5, rng)), {}, {}};
  const std::size_t n_lower = random_index(4, rng);
  const std::size_t n_upper = random_index(4, rng);
  for (std::size_t i = 0; i < n_lower; ++i) inst.lower.push_back({random_vector(n, -1.0, 1.0, rng), rng.uniform(-1.0, 1.0)});
  for (std::size_t i = 0; i < n_upper; ++i) inst.upper.push_back({random_vector(n, -1.0, 1.0, rng), rng.uniform(-1.0, 1.0)});
  return inst;
}

QPSolution brute_force_qp(const Matrix& h, const std::vector<LinearConstraint>& lower,
                          const std::vector<LinearConstraint>& upper) {
  const Eigen::Index n = h.rows();
  const std::size_t m = lower.size() + upper.size();
  if (m > kMaxQpConstraints) throw std::invalid_argument("brute_force_qp: too many constraints");
  // Every row as s' x >= r.
  Matrix s(static_cast<Eigen::Index>(m), n);
  Vector r(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < lower.size(); ++i) {
    s.row(static_cast<Eigen::Index>(i)) = lower[i].a.transpose();
    r[static_cast<Eigen::Index>(i)] = lower[i].c;
  }
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(lower.size() + k);
    s.row(row) = -upper[k].a.transpose();
    r[row] = -upper[k].c;
  }
  const double scale = kkt_scale(lower, upper);
  const double tol = 1e-9 * scale;

  QPSolution best;
  best.status = QPStatus::kInfeasible;
  best.primal = Vector::Zero(n);
  best.duals_lower = Vector::Zero(static_cast<Eigen::Index>(lower.size()));
  best.duals_upper = Vector::Zero(static_cast<Eigen::Index>(upper.size()));
  double best_value = std::numeric_limits<double>::infinity();

  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    const auto k = static_cast<Eigen::Index>(std::popcount(mask));
    std::vector<Eigen::Index> active;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (1u << j)) active.push_back(static_cast<Eigen::Index>(j));
    }
    Matrix kkt = Matrix::Zero(n + k, n + k);
    Vector rhs = Vector::Zero(n + k);
    kkt.topLeftCorner(n, n) = 2.0 * h;
    for (Eigen::Index i = 0; i < k; ++i) {
      kkt.block(0, n + i, n, 1) = -s.row(active[static_cast<std::size_t>(i)]).transpose();
      kkt.block(n + i, 0, 1, n) = s.row(active[static_cast<std::size_t>(i)]);
      rhs[n + i] = r[active[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    const Vector mu = sol.tail(k);
    if (k > 0 && mu.minCoeff() < -tol) continue;
    if (m > 0 && (s * x - r).minCoeff() < -tol) continue;
    const double value = x.dot(h * x);
    if (value < best_value) {
      best_value = value;
      best.status = QPStatus::kOptimal;
      best.primal = x;
      Vector all = Vector::Zero(static_cast<Eigen::Index>(m));
      for (Eigen::Index i = 0; i < k; ++i) all[active[static_cast<std::size_t>(i)]] = std::max(mu[i], 0.0);
      best.duals_lower = all.head(static_cast<Eigen::Index>(lower.size()));
      best.duals_upper = all.tail(static_cast<Eigen::Index>(upper.size()));
    }
  }
  return best;
}

SuiteResult qp_oracle_suite(std::size_t instances, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r{"qp_oracle_equivalence", 0, 0, 0.0, 1.0, 0.0};
  Rng rng(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    const QPInstance inst = random_qp_instance(rng);
    const QPSolution got = solve(inst);
    const QPSolution want = brute_force_qp(inst.metric.matrix(), inst.lower, inst.upper);
    // Each check is normalized by its bound so the worst value reads as a
    // fraction of the allowed error.
    double error = 0.0;
    if (got.status != want.status) {
      error = std::numeric_limits<double>::infinity();
    } else if (got.status == QPStatus::kOptimal) {
      error = (got.primal - want.primal).cwiseAbs().maxCoeff() / 1e-7;
      const KktResiduals kkt = kkt_residual(inst, got);
      const double bound = 1e-8 * kkt_scale(inst.lower, inst.upper);
      error = std::max({error, kkt.stationarity / bound, kkt.feasibility / bound, kkt.complementarity / bound});
    }
    record(r, error);
  }
  r.seconds = elapsed(start);
  return r;
}

SuiteResult transformation_suite(std::size_t instances, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r{"transformation_equivalence", 0, 0, 0.0, 1e-7, 0.0};
  Rng rng(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + random_index(6, rng));
    const LocalMetric metric = LocalMetric::explicit_spd(random_spd(n, 0.5, rng));
    Vector g = random_vector(n, -1.0, 1.0, rng);
    if (g.norm() < 1e-3) g[0] += 1.0;
    const double epsilon = rng.uniform(0.01, 1.0);
    const Vector h_inv_g = metric.inverse_apply(g);
    const Vector closed = epsilon * h_inv_g / std::sqrt(g.dot(h_inv_g));

    const double offset = epsilon * h_inv_norm(metric, g);
    const QPSolution qp = solve(metric, {{g, offset}}, {});
    double error = qp.status == QPStatus::kOptimal ? metric.norm(qp.primal - closed)
                                                   : std::numeric_limits<double>::infinity();

    GradientBundle bundle;
    bundle.objective_grads = {g};
    bundle.constraint_values = Vector(0);
    bundle.thresholds = Vector(0);
    AggregatorConfig config;
    config.epsilon = epsilon;
    const AggregationResult agg = aggregate_plain(bundle, Preference(Vector::Ones(1)), metric, config);
    error = std::max(error, metric.norm(agg.gradient - closed));
    record(r, error);
  }
  r.seconds = elapsed(start);
  return r;
}

double relative_error(const Vector& analytic, const Vector& numeric) {
  const double denom = std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
  if (denom == 0.0) return 0.0;
  return (analytic - numeric).cwiseAbs().maxCoeff() / denom;
}

SuiteResult toy_gradient_suite(std::size_t points, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r{"toy_gradient_fd", 0, 0, 0.0, 1e-5, 0.0};
  Rng rng(seed);
  const double h = 1e-6;
  while (r.instances < points) {
    const toy::ToyPoint p{rng.uniform(-11.0, 11.0), rng.uniform(-11.0, 11.0)};
    if (near_toy_singularity(p)) continue;
    const toy::ToyGradients g = toy::grad_toy(p);
    Eigen::Vector2d fd1, fd2, fdc;
    for (int d = 0; d < 2; ++d) {
      toy::ToyPoint plus = p, minus = p;
      (d == 0 ? plus.x1 : plus.x2) += h;
      (d == 0 ? minus.x1 : minus.x2) -= h;
      const toy::ToyValues vp = toy::eval_toy(plus);
      const toy::ToyValues vm = toy::eval_toy(minus);
      fd1[d] = (vp.l1 - vm.l1) / (2.0 * h);
      fd2[d] = (vp.l2 - vm.l2) / (2.0 * h);
      fdc[d] = (vp.c - vm.c) / (2.0 * h);
    }
    record(r, std::max({relative_error(g.l1, fd1), relative_error(g.l2, fd2), relative_error(g.c, fdc)}));
  }
  r.seconds = elapsed(start);
  return r;
}

SuiteResult tabular_gradient_suite(std::size_t points, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r{"tabular_gradient_fd", 0, 0, 0.0, 1e-4, 0.0};
  Rng rng(seed);
  const double h = 1e-5;
  constexpr std::size_t kModels = 10;
  std::vector<tabular::TabularCMOMDP> models;
  for (std::size_t m = 0; m < kModels; ++m) {
    tabular::RandomModelSpec spec;
    spec.n_states = 3;
    spec.n_actions = static_cast<Eigen::Index>(2 + m % 2);
    models.push_back(tabular::random_cmomdp(spec, seed + 7919 * (m + 1)).mdp);
  }
  for (std::size_t t = 0; t < points; ++t) {
    const auto& mdp = models[t % kModels];
    tabular::SoftmaxPolicyTable policy{Matrix(mdp.n_states, mdp.n_actions)};
    for (Eigen::Index s = 0; s < mdp.n_states; ++s) {
      for (Eigen::Index a = 0; a < mdp.n_actions; ++a) policy.logits(s, a) = rng.uniform(-3.0, 3.0);
    }
    const auto report = tabular::evaluate(mdp, policy);
    const auto grads = tabular::policy_gradient(mdp, report);
    const std::size_t n_signals = mdp.n_objectives() + mdp.n_constraints();
    std::vector<Vector> fd(n_signals, Vector(policy.logits.size()));
    for (Eigen::Index s = 0; s < mdp.n_states; ++s) {
      for (Eigen::Index a = 0; a < mdp.n_actions; ++a) {
        auto plus = policy, minus = policy;
        plus.logits(s, a) += h;
        minus.logits(s, a) -= h;
        const auto rp = tabular::evaluate(mdp, plus);
        const auto rm = tabular::evaluate(mdp, minus);
        const Eigen::Index idx = mdp.row(s, a);
        for (std::size_t i = 0; i < mdp.n_objectives(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          fd[i][idx] = (rp.objective_returns[ii] - rm.objective_returns[ii]) / (2.0 * h);
        }
        for (std::size_t k = 0; k < mdp.n_constraints(); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          fd[mdp.n_objectives() + k][idx] = (rp.constraint_returns[kk] - rm.constraint_returns[kk]) / (2.0 * h);
        }
      }
    }
    double error = 0.0;
    for (std::size_t i = 0; i < mdp.n_objectives(); ++i) {
      error = std::max(error, relative_error(tabular::flatten(grads.objective_grads[i]), fd[i]));
    }
    for (std::size_t k = 0; k < mdp.n_constraints(); ++k) {
      error = std::max(error, relative_error(tabular::flatten(grads.constraint_grads[k]), fd[mdp.n_objectives() + k]));
    }
    record(r, error);
  }
  r.seconds = elapsed(start);
  return r;
}

SuiteResult hypervolume_mc_suite(std::size_t archives, std::size_t samples, std::uint64_t seed) {
  const auto start = Clock::now();
  // Errors are reported in units of the Monte-Carlo standard error.
  SuiteResult r{"hypervolume_mc_agreement", 0, 0, 0.0, 3.0, 0.0};
  Rng rng(seed);
  for (std::size_t t = 0; t < archives; ++t) {
    const Eigen::Index n = t % 2 == 0 ? 2 : 3;
    const std::size_t count = 1 + random_index(8, rng);
    std::vector<metrics::FrontPoint> pts;
    for (std::size_t i = 0; i < count; ++i) pts.push_back({random_vector(n, 0.0, 1.0, rng), true, std::nullopt});
    const metrics::ParetoArchive archive = metrics::pareto_filter(pts);
    const Vector reference = random_vector(n, 0.0, 0.3, rng);
    const double exact = metrics::hypervolume(archive, reference);
    const metrics::MonteCarloEstimate mc = metrics::hypervolume_mc(archive, reference, samples, rng.next());
    const double diff = std::abs(exact - mc.estimate);
    double error = 0.0;
    if (mc.std_error > 0.0) {
      error = diff / mc.std_error;
    } else if (diff > 1e-12) {
      error = std::numeric_limits<double>::infinity();
    }
    record(r, error);
  }
  r.seconds = elapsed(start);
  return r;
}

ReturnEstimate monte_carlo_returns(const tabular::TabularCMOMDP& mdp, const Matrix& policy, std::size_t episodes,
                                   double truncation, std::uint64_t seed) {
  if (episodes < 2) throw std::invalid_argument("monte_carlo_returns needs at least two episodes");
  double bound = mdp.reward_bound;
  if (!std::isfinite(bound)) {
    bound = 0.0;
    for (const auto& t : mdp.rewards) bound = std::max(bound, t.cwiseAbs().maxCoeff());
    for (const auto& t : mdp.costs) bound = std::max(bound, t.cwiseAbs().maxCoeff());
  }
  ReturnEstimate out;
  out.horizon = 1;
  while (std::pow(mdp.gamma, static_cast<double>(out.horizon)) * bound / (1.0 - mdp.gamma) >= truncation) {
    ++out.horizon;
  }

  const std::size_t n_signals = mdp.n_objectives() + mdp.n_constraints();
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(n_signals));
  Vector sum_sq = Vector::Zero(static_cast<Eigen::Index>(n_signals));
  Vector ret(static_cast<Eigen::Index>(n_signals));
  Rng rng(seed);
  for (std::size_t e = 0; e < episodes; ++e) {
    ret.setZero();
    auto s = static_cast<Eigen::Index>(sample(mdp.rho, rng));
    double discount = 1.0;
    for (std::size_t step = 0; step < out.horizon; ++step) {
      const auto a = static_cast<Eigen::Index>(sample(policy.row(s).transpose(), rng));
      const Eigen::Index row = mdp.row(s, a);
      const auto next = static_cast<Eigen::Index>(sample(mdp.transition.row(row).transpose(), rng));
      for (std::size_t i = 0; i < mdp.n_objectives(); ++i) {
        ret[static_cast<Eigen::Index>(i)] += discount * mdp.rewards[i](row, next);
      }
      for (std::size_t k = 0; k < mdp.n_constraints(); ++k) {
        ret[static_cast<Eigen::Index>(mdp.n_objectives() + k)] += discount * mdp.costs[k](row, next);
      }
      discount *= mdp.gamma;
      s = next;
    }
    sum += ret;
    sum_sq += ret.cwiseProduct(ret);
  }
  const double n = static_cast<double>(episodes);
  const Vector mean = sum / n;
  const Vector var = ((sum_sq / n) - mean.cwiseProduct(mean)).cwiseMax(0.0) * (n / (n - 1.0));
  const Vector se = (var / n).cwiseSqrt();
  const auto n_obj = static_cast<Eigen::Index>(mdp.n_objectives());
  const auto n_con = static_cast<Eigen::Index>(mdp.n_constraints());
  out.objective_means = mean.head(n_obj);
  out.objective_std_errors = se.head(n_obj);
  out.constraint_means = mean.tail(n_con);
  out.constraint_std_errors = se.tail(n_con);
  return out;
}

}  // namespace comoga::verification
