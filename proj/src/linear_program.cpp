#include "comoga/linear_program.hpp"

#include <limits>
#include <vector>

namespace comoga {

namespace {

struct Tableau {
  Matrix t;  // rows 0..m-1 constraints, row m objective; last column rhs
  std::vector<Eigen::Index> basis;

  Eigen::Index rows() const { return t.rows() - 1; }
  Eigen::Index rhs_col() const { return t.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index col) {
    t.row(r) /= t(r, col);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = col;
  }

  // Runs Bland's rule over columns [0, n_cols). Returns false when unbounded.
  bool optimize(Eigen::Index n_cols, double tol) {
    const Eigen::Index obj = rows();
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < n_cols; ++j) {
        if (t(obj, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < obj; ++i) {
        if (t(i, enter) <= tol) continue;
        const double ratio = t(i, rhs_col()) / t(i, enter);
        const bool better = ratio < best - tol;
        const bool tie = !better && ratio <= best + tol && leave >= 0 &&
                         basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)];
        if (better || tie) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult maximize_standard_form(const Vector& c, const Matrix& a, const Vector& b, double tolerance) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (c.size() != n || b.size() != m) throw std::invalid_argument("linear program dimensions do not agree");

  Tableau tab;
  tab.t = Matrix::Zero(m + 1, n + m + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign * b[i];
    tab.basis[static_cast<std::size_t>(i)] = n + i;
  }

  // Phase 1: maximize -sum(artificials); objective row holds reduced costs.
  for (Eigen::Index i = 0; i < m; ++i) tab.t.row(m) -= tab.t.row(i);
  for (Eigen::Index i = 0; i < m; ++i) tab.t(m, n + i) = 0.0;
  tab.optimize(n + m, tolerance);

  LpResult out;
  if (-tab.t(m, n + m) > 1e3 * tolerance * (1.0 + b.cwiseAbs().sum())) return out;

  // Drive remaining artificials out of the basis; redundant rows keep them at zero.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > tolerance) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 with artificial columns frozen out.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = -c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index col = tab.basis[static_cast<std::size_t>(i)];
    if (col < n && tab.t(m, col) != 0.0) tab.t.row(m) -= tab.t(m, col) * tab.t.row(i);
  }
  if (!tab.optimize(n, tolerance)) {
    out.status = LpStatus::kUnbounded;
    return out;
  }

  out.status = LpStatus::kOptimal;
  out.x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index col = tab.basis[static_cast<std::size_t>(i)];
    if (col < n) out.x[col] = tab.t(i, n + m);
  }
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace comoga
