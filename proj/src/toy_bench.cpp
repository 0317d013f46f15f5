#include "comoga/toy_bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace comoga::toy {

namespace {

constexpr double kLogFloor = 0.000005;

double sech2(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

double valley(double u) { return std::log(std::max(std::abs(u), kLogFloor)) + 6.0; }

// d/du of log(max(|u|, floor)); zero on the clamped branch.
double valley_slope(double u) { return std::abs(u) > kLogFloor ? 1.0 / u : 0.0; }

struct Terms {
  double c1, c2, dc1, dc2;
  double u1, u2;
  double f1, f2, g1, g2;
};

Terms terms(const ToyPoint& p) {
  Terms t{};
  const double up = std::tanh(0.5 * p.x2);
  const double down = std::tanh(-0.5 * p.x2);
  t.c1 = std::max(up, 0.0);
  t.c2 = std::max(down, 0.0);
  t.dc1 = up > 0.0 ? 0.5 * sech2(0.5 * p.x2) : 0.0;
  t.dc2 = down > 0.0 ? -0.5 * sech2(0.5 * p.x2) : 0.0;
  t.u1 = 0.5 * (-p.x1 - 7.0) - std::tanh(-p.x2);
  t.u2 = 0.5 * (-p.x1 + 3.0) + std::tanh(-p.x2 + 2.0);
  t.f1 = valley(t.u1);
  t.f2 = valley(t.u2);
  const double tail = 0.1 * (-p.x2 - 8.0) * (-p.x2 - 8.0);
  t.g1 = ((-p.x1 + 7.0) * (-p.x1 + 7.0) + tail) / 10.0 - 20.0;
  t.g2 = ((-p.x1 - 7.0) * (-p.x1 - 7.0) + tail) / 10.0 - 20.0;
  return t;
}

}  // namespace

ToyValues eval_toy(const ToyPoint& p) {
  const Terms t = terms(p);
  ToyValues v;
  v.l1 = t.c1 * t.f1 + t.c2 * t.g1;
  v.l2 = t.c1 * t.f2 + t.c2 * t.g2;
  v.c = p.x1 * p.x1 + 0.3 * (p.x2 - 10.0) * (p.x2 - 10.0) - 10.5 * 10.5;
  return v;
}

ToyGradients grad_toy(const ToyPoint& p) {
  const Terms t = terms(p);
  const double s1 = valley_slope(t.u1);
  const double s2 = valley_slope(t.u2);
  const Eigen::Vector2d df1(-0.5 * s1, sech2(-p.x2) * s1);
  const Eigen::Vector2d df2(-0.5 * s2, -sech2(-p.x2 + 2.0) * s2);
  const double dg_x2 = 0.02 * (p.x2 + 8.0);
  const Eigen::Vector2d dg1((p.x1 - 7.0) / 5.0, dg_x2);
  const Eigen::Vector2d dg2((p.x1 + 7.0) / 5.0, dg_x2);

  ToyGradients g;
  g.l1 = t.c1 * df1 + t.c2 * dg1;
  g.l1.y() += t.dc1 * t.f1 + t.dc2 * t.g1;
  g.l2 = t.c1 * df2 + t.c2 * dg2;
  g.l2.y() += t.dc1 * t.f2 + t.dc2 * t.g2;
  g.c = Eigen::Vector2d(2.0 * p.x1, 0.6 * (p.x2 - 10.0));
  return g;
}

std::string_view to_string(ToyMethod method) {
  switch (method) {
    case ToyMethod::kComoga:
      return "comoga";
    case ToyMethod::kLinearScalarization:
      return "ls";
    case ToyMethod::kLagrangian:
      return "lagrangian";
  }
  return "unknown";
}

void LagrangianState::update(double constraint_value) {
  multiplier = std::max(0.0, multiplier + multiplier_lr * constraint_value);
}

double toy_epsilon(double epsilon_0, std::optional<double> epsilon_final, std::size_t step, std::size_t steps) {
  if (!epsilon_final || steps <= 1) return epsilon_0;
  const double frac = static_cast<double>(step) / static_cast<double>(steps - 1);
  return epsilon_0 * std::pow(*epsilon_final / epsilon_0, frac);
}

Trajectory run_comoga_toy(const ToyPoint& start, const Preference& preference, const AggregatorConfig& config,
                          std::size_t steps, std::optional<double> epsilon_final) {
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  if (preference.size() != 2) throw std::invalid_argument("toy benchmark has two objectives");
  if (epsilon_final && !(*epsilon_final > 0.0)) throw std::invalid_argument("epsilon_final must be positive");
  config.validate();

  Trajectory traj;
  traj.method = ToyMethod::kComoga;
  traj.preference = preference;
  traj.points.reserve(steps + 1);
  traj.values.reserve(steps + 1);
  traj.modes.reserve(steps + 1);

  const LocalMetric metric = LocalMetric::identity(2);
  ToyPoint x = start;
  ToyValues v = eval_toy(x);
  traj.points.push_back(x);
  traj.values.push_back(v);
  traj.modes.emplace_back("start");

  GradientBundle bundle;
  bundle.objective_grads.resize(2);
  bundle.constraint_grads.resize(1);
  bundle.constraint_values = Vector::Zero(1);
  bundle.thresholds = Vector::Zero(1);

  AggregatorConfig step_config = config;
  step_config.variant = AggregatorVariant::kPlain;
  for (std::size_t t = 0; t < steps; ++t) {
    const ToyGradients g = grad_toy(x);
    bundle.objective_grads[0] = -g.l1;
    bundle.objective_grads[1] = -g.l2;
    bundle.constraint_grads[0] = g.c;
    bundle.constraint_values[0] = v.c;
    step_config.epsilon = toy_epsilon(config.epsilon, epsilon_final, t, steps);

    const AggregationResult agg = aggregate_plain(bundle, preference, metric, step_config);
    if (agg.mode == AggregationMode::kNormal && conflict_check(bundle, agg.gradient)) ++traj.conflict_violations;

    x.x1 += agg.gradient[0];
    x.x2 += agg.gradient[1];
    v = eval_toy(x);
    traj.points.push_back(x);
    traj.values.push_back(v);
    traj.modes.emplace_back(to_string(agg.mode));
  }
  return traj;
}

Trajectory run_ls_toy(const ToyPoint& start, const Preference& preference, double lr,
                      std::optional<LagrangianState> lagrangian, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (preference.size() != 2) throw std::invalid_argument("toy benchmark has two objectives");
  if (lagrangian && !(lagrangian->multiplier_lr > 0.0)) throw std::invalid_argument("multiplier_lr must be positive");

  Trajectory traj;
  traj.method = lagrangian ? ToyMethod::kLagrangian : ToyMethod::kLinearScalarization;
  traj.preference = preference;
  ToyPoint x = start;
  ToyValues v = eval_toy(x);
  traj.points.push_back(x);
  traj.values.push_back(v);
  traj.modes.emplace_back("start");

  for (std::size_t t = 0; t < steps; ++t) {
    const ToyGradients g = grad_toy(x);
    Eigen::Vector2d descent = preference[0] * g.l1 + preference[1] * g.l2;
    if (lagrangian) {
      descent += lagrangian->multiplier * g.c;
      lagrangian->update(v.c);
    }
    x.x1 -= lr * descent.x();
    x.x2 -= lr * descent.y();
    v = eval_toy(x);
    traj.points.push_back(x);
    traj.values.push_back(v);
    traj.modes.emplace_back("gradient");
  }
  if (lagrangian) traj.final_multiplier = lagrangian->multiplier;
  return traj;
}

std::vector<ToyFrontPoint> cp_front_oracle_toy(std::size_t grid_resolution) {
  if (grid_resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  std::vector<ToyFrontPoint> feasible;
  const double step = 22.0 / static_cast<double>(grid_resolution - 1);
  for (std::size_t i = 0; i < grid_resolution; ++i) {
    for (std::size_t j = 0; j < grid_resolution; ++j) {
      const ToyPoint p{-11.0 + step * static_cast<double>(i), -11.0 + step * static_cast<double>(j)};
      const ToyValues v = eval_toy(p);
      if (v.c <= 0.0) feasible.push_back({p, v.l1, v.l2});
    }
  }
  std::stable_sort(feasible.begin(), feasible.end(), [](const ToyFrontPoint& a, const ToyFrontPoint& b) {
    return a.l1 != b.l1 ? a.l1 < b.l1 : a.l2 < b.l2;
  });

  std::vector<ToyFrontPoint> front;
  double best_l2 = std::numeric_limits<double>::infinity();
  for (const auto& q : feasible) {
    const bool tie = !front.empty() && q.l1 == front.back().l1 && q.l2 == front.back().l2;
    if (q.l2 < best_l2 || tie) {
      front.push_back(q);
      best_l2 = std::min(best_l2, q.l2);
    }
  }
  return front;
}

double distance_to_cp_set(const ToyPoint& p, const std::vector<ToyFrontPoint>& cp_set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : cp_set) best = std::min(best, std::hypot(p.x1 - q.point.x1, p.x2 - q.point.x2));
  return best;
}

double hausdorff_distance(const std::vector<ToyFrontPoint>& a, const std::vector<ToyFrontPoint>& b) {
  double worst = 0.0;
  for (const auto& p : a) worst = std::max(worst, distance_to_cp_set(p.point, b));
  for (const auto& p : b) worst = std::max(worst, distance_to_cp_set(p.point, a));
  return worst;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,x1,x2,L1,L2,C,mode\n";
  char buf[256];
  for (std::size_t t = 0; t < trajectory.points.size(); ++t) {
    const ToyPoint& p = trajectory.points[t];
    const ToyValues& v = trajectory.values[t];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,", t, p.x1, p.x2, v.l1, v.l2, v.c);
    out << buf << trajectory.modes[t] << '\n';
  }
}

std::vector<ToyPoint> standard_starts() { return {{-10.0, 0.0}, {-10.0, 7.5}, {0.0, 7.5}, {10.0, 10.0}}; }

}  // namespace comoga::toy
