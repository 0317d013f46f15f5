#include "comoga/qp_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace comoga {

namespace {

// All tolerances are relative so that uniformly rescaled problems (tiny
// gradients near a saturated policy, large Gram entries on the toy problem)
// are judged alike.
constexpr double kEqualityTol = 1e-10;
constexpr double kDualTol = 1e-10;
constexpr double kOffsetTol = 1e-9;
constexpr double kRoundingTol = 1e-12;

void check_constraints(const MetricGeometry& metric, const std::vector<LinearConstraint>& constraints) {
  for (const auto& con : constraints) {
    if (con.a.size() != metric.dimension()) {
      throw std::invalid_argument("constraint vector dimension " + std::to_string(con.a.size()) +
                                  " does not match metric dimension " + std::to_string(metric.dimension()));
    }
  }
}

}  // namespace

double kkt_scale(const std::vector<LinearConstraint>& lower, const std::vector<LinearConstraint>& upper) {
  double a_max = 0.0;
  double c_max = 0.0;
  for (const auto* set : {&lower, &upper}) {
    for (const auto& con : *set) {
      if (con.a.size() > 0) a_max = std::max(a_max, con.a.cwiseAbs().maxCoeff());
      c_max = std::max(c_max, std::abs(con.c));
    }
  }
  return 1.0 + a_max + c_max;
}

double qp_objective(const MetricGeometry& metric, const Vector& x) {
  const double n = metric.norm(x);
  return n * n;
}

GramSolution solve_gram(const Matrix& gram, const Vector& offsets) {
  const auto m = static_cast<std::size_t>(offsets.size());
  if (gram.rows() != offsets.size() || gram.cols() != offsets.size()) {
    throw std::invalid_argument("gram matrix must be square and match the offsets");
  }
  if (m > kMaxQpConstraints) {
    throw std::invalid_argument("QP has " + std::to_string(m) + " constraints; the enumeration bound is " +
                                std::to_string(kMaxQpConstraints));
  }

  GramSolution out;
  out.multipliers = Vector::Zero(offsets.size());
  const double gram_scale = m > 0 ? gram.cwiseAbs().maxCoeff() : 0.0;
  const double offset_scale = m > 0 ? offsets.cwiseAbs().maxCoeff() : 0.0;

  const std::uint32_t n_masks = 1u << m;
  std::vector<Eigen::Index> active;
  for (std::size_t size = 0; size <= m; ++size) {
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;

      active.clear();
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (1u << j)) active.push_back(static_cast<Eigen::Index>(j));
      }

      Vector mu = Vector::Zero(offsets.size());
      if (!active.empty()) {
        const auto k = static_cast<Eigen::Index>(active.size());
        Matrix sub(k, k);
        Vector rhs(k);
        for (Eigen::Index i = 0; i < k; ++i) {
          rhs[i] = 2.0 * offsets[active[i]];
          for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = gram(active[i], active[j]);
        }
        const Vector sol = sub.completeOrthogonalDecomposition().solve(rhs);
        const double sol_scale = sol.cwiseAbs().maxCoeff();
        const double eq_tol = kEqualityTol * (rhs.cwiseAbs().maxCoeff() + gram_scale * sol_scale);
        if (!sol.allFinite() || (sub * sol - rhs).cwiseAbs().maxCoeff() > eq_tol) continue;
        if (sol.minCoeff() < -kDualTol * sol_scale) continue;
        for (Eigen::Index i = 0; i < k; ++i) mu[active[i]] = std::max(0.0, sol[i]);
      }

      // s_j' x = 0.5 (G mu)_j must clear every offset.
      const Vector achieved = 0.5 * (gram * mu);
      const double mu_scale = mu.size() > 0 ? mu.maxCoeff() : 0.0;
      const double feas_tol = kOffsetTol * offset_scale + kRoundingTol * gram_scale * mu_scale;
      if (m > 0 && (achieved - offsets).minCoeff() < -feas_tol) continue;

      out.multipliers = std::move(mu);
      out.status = QPStatus::kOptimal;
      return out;
    }
  }
  out.status = QPStatus::kInfeasible;
  return out;
}

QPSolution solve(const MetricGeometry& metric, const std::vector<LinearConstraint>& lower,
                 const std::vector<LinearConstraint>& upper) {
  check_constraints(metric, lower);
  check_constraints(metric, upper);
  const std::size_t total = lower.size() + upper.size();
  if (total > kMaxQpConstraints) {
    throw std::invalid_argument("QP has " + std::to_string(total) + " constraints; the enumeration bound is " +
                                std::to_string(kMaxQpConstraints));
  }

  const auto m = static_cast<Eigen::Index>(total);
  const Eigen::Index dim = metric.dimension();
  Matrix rows(dim, m);
  Vector offsets(m);
  Eigen::Index j = 0;
  for (const auto& con : lower) {
    rows.col(j) = con.a;
    offsets[j++] = con.c;
  }
  for (const auto& con : upper) {
    rows.col(j) = -con.a;
    offsets[j++] = -con.c;
  }

  Matrix preconditioned(dim, m);
  for (Eigen::Index i = 0; i < m; ++i) preconditioned.col(i) = metric.inverse_apply(rows.col(i));
  Matrix gram = rows.transpose() * preconditioned;
  gram = 0.5 * (gram + gram.transpose()).eval();

  const GramSolution dual = solve_gram(gram, offsets);

  QPSolution out;
  out.status = dual.status;
  out.primal = Vector::Zero(dim);
  out.duals_lower = Vector::Zero(static_cast<Eigen::Index>(lower.size()));
  out.duals_upper = Vector::Zero(static_cast<Eigen::Index>(upper.size()));
  if (dual.status == QPStatus::kInfeasible) return out;

  if (m > 0) out.primal = 0.5 * (preconditioned * dual.multipliers);
  const auto n_lower = static_cast<Eigen::Index>(lower.size());
  out.duals_lower = dual.multipliers.head(n_lower);
  out.duals_upper = dual.multipliers.tail(m - n_lower);
  return out;
}

KktResiduals kkt_residual(const MetricGeometry& metric, const std::vector<LinearConstraint>& lower,
                          const std::vector<LinearConstraint>& upper, const QPSolution& solution) {
  KktResiduals r;
  Vector station = 2.0 * metric.apply(solution.primal);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double dual = solution.duals_lower[static_cast<Eigen::Index>(i)];
    const double slack = lower[i].a.dot(solution.primal) - lower[i].c;
    station -= dual * lower[i].a;
    r.feasibility = std::max({r.feasibility, -slack, -dual});
    r.complementarity = std::max(r.complementarity, std::abs(dual * slack));
  }
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const double dual = solution.duals_upper[static_cast<Eigen::Index>(k)];
    const double slack = upper[k].c - upper[k].a.dot(solution.primal);
    station += dual * upper[k].a;
    r.feasibility = std::max({r.feasibility, -slack, -dual});
    r.complementarity = std::max(r.complementarity, std::abs(dual * slack));
  }
  r.stationarity = station.size() > 0 ? station.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

}  // namespace comoga
