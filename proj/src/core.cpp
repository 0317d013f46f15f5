#include "comoga/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace comoga {

namespace {

void require_dimension(const MetricGeometry& metric, const Vector& v) {
  if (v.size() != metric.dimension()) {
    throw std::invalid_argument("metric dimension " + std::to_string(metric.dimension()) +
                                " does not match vector dimension " + std::to_string(v.size()));
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Preference::Preference(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("preference must have at least one weight");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw std::invalid_argument("preference weights must be finite and nonnegative");
    }
  }
  if (weights_.maxCoeff() != 1.0) throw std::invalid_argument("preference max-norm must equal 1");
}

Preference Preference::normalized(const Vector& raw) {
  if (raw.size() == 0 || (raw.array() < 0.0).any()) {
    throw std::invalid_argument("preference weights must be nonnegative");
  }
  const double top = raw.maxCoeff();
  if (!(top > 0.0)) throw std::invalid_argument("preference weights must not all be zero");
  Vector w = raw / top;
  // Exact 1 on the arg-max entries; division may leave them at 1 - ulp otherwise.
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (raw[i] == top) w[i] = 1.0;
  }
  return Preference(std::move(w));
}

bool operator==(const Preference& a, const Preference& b) {
  return a.weights().size() == b.weights().size() && a.weights() == b.weights();
}

std::vector<Preference> preference_grid(std::size_t n_objectives, std::size_t count,
                                        GridConvention convention) {
  if (n_objectives == 0) throw std::invalid_argument("preference_grid: n_objectives must be positive");
  if (count == 0) throw std::invalid_argument("preference_grid: count must be positive");

  std::vector<Preference> grid;
  if (n_objectives == 1) {
    grid.assign(count, Preference(Vector::Ones(1)));
    return grid;
  }

  if (n_objectives == 2) {
    if (count < 2) throw std::invalid_argument("preference_grid: count must be >= 2 for two objectives");
    grid.reserve(count);
    const double last = static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / last;
      Vector raw(2);
      if (convention == GridConvention::kMaxNormFace) {
        // arc length s in [0, 2] along (1, s) then (2 - s, 1)
        const double s = 2.0 * t;
        raw << (s <= 1.0 ? 1.0 : 2.0 - s), (s <= 1.0 ? s : 1.0);
      } else {
        raw << 1.0 - t, t;
      }
      grid.push_back(Preference::normalized(raw));
    }
    return grid;
  }

  std::size_t resolution = 1;
  while (binomial(resolution + n_objectives - 1, n_objectives - 1) < count) ++resolution;

  std::vector<std::size_t> parts(n_objectives, 0);
  std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t index, std::size_t remaining) {
    if (index + 1 == n_objectives) {
      parts[index] = remaining;
      Vector raw(static_cast<Eigen::Index>(n_objectives));
      for (std::size_t j = 0; j < n_objectives; ++j) raw[static_cast<Eigen::Index>(j)] = static_cast<double>(parts[j]);
      grid.push_back(Preference::normalized(raw));
      return;
    }
    for (std::size_t k = remaining + 1; k-- > 0;) {
      parts[index] = k;
      emit(index + 1, remaining - k);
    }
  };
  emit(0, resolution);
  return grid;
}

LocalMetric LocalMetric::identity(Eigen::Index dimension) {
  if (dimension <= 0) throw std::invalid_argument("identity metric needs a positive dimension");
  LocalMetric m;
  m.kind_ = Kind::kIdentity;
  m.dimension_ = dimension;
  return m;
}

LocalMetric LocalMetric::explicit_spd(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("metric matrix must be square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("explicit-SPD metric must be symmetric");
  }
  LocalMetric m;
  m.kind_ = Kind::kExplicitSpd;
  m.dimension_ = h.rows();
  m.matrix_ = 0.5 * (h + h.transpose());
  m.llt_.compute(m.matrix_);
  if (m.llt_.info() != Eigen::Success) {
    throw std::invalid_argument("explicit-SPD metric is not positive definite");
  }
  return m;
}

LocalMetric LocalMetric::fisher_pseudo(const Matrix& f, std::optional<double> pinv_threshold) {
  if (f.rows() != f.cols() || f.rows() == 0) throw std::invalid_argument("metric matrix must be square");
  LocalMetric m;
  m.kind_ = Kind::kFisherPseudo;
  m.dimension_ = f.rows();
  m.matrix_ = 0.5 * (f + f.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix_);
  if (eig.info() != Eigen::Success) throw std::invalid_argument("fisher eigendecomposition failed");
  const Vector& values = eig.eigenvalues();
  const double largest = std::max(0.0, values.maxCoeff());
  m.pinv_threshold_ = pinv_threshold.value_or(1e-8 * largest);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > m.pinv_threshold_ && values[i] > 0.0) kept.push_back(i);
  }
  m.eigenvectors_.resize(m.dimension_, static_cast<Eigen::Index>(kept.size()));
  m.eigenvalues_.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    m.eigenvectors_.col(col) = eig.eigenvectors().col(kept[j]);
    m.eigenvalues_[col] = values[kept[j]];
  }
  return m;
}

Eigen::Index LocalMetric::rank() const {
  return kind_ == Kind::kFisherPseudo ? eigenvalues_.size() : dimension_;
}

double LocalMetric::norm(const Vector& v) const {
  require_dimension(*this, v);
  switch (kind_) {
    case Kind::kIdentity:
      return v.norm();
    case Kind::kExplicitSpd:
      return std::sqrt(std::max(0.0, v.dot(matrix_ * v)));
    case Kind::kFisherPseudo: {
      const Vector coords = eigenvectors_.transpose() * v;
      return std::sqrt(std::max(0.0, coords.dot(eigenvalues_.cwiseProduct(coords))));
    }
  }
  return 0.0;
}

Vector LocalMetric::inverse_apply(const Vector& v) const {
  require_dimension(*this, v);
  switch (kind_) {
    case Kind::kIdentity:
      return v;
    case Kind::kExplicitSpd:
      return llt_.solve(v);
    case Kind::kFisherPseudo: {
      const Vector coords = eigenvectors_.transpose() * v;
      return eigenvectors_ * coords.cwiseQuotient(eigenvalues_);
    }
  }
  return v;
}

Vector LocalMetric::apply(const Vector& v) const {
  require_dimension(*this, v);
  switch (kind_) {
    case Kind::kIdentity:
      return v;
    case Kind::kExplicitSpd:
      return matrix_ * v;
    case Kind::kFisherPseudo: {
      const Vector coords = eigenvectors_.transpose() * v;
      return eigenvectors_ * eigenvalues_.cwiseProduct(coords);
    }
  }
  return v;
}

double h_norm(const MetricGeometry& metric, const Vector& v) {
  require_dimension(metric, v);
  return metric.norm(v);
}

Vector h_inv_apply(const MetricGeometry& metric, const Vector& v) {
  require_dimension(metric, v);
  return metric.inverse_apply(v);
}

double h_inv_norm(const MetricGeometry& metric, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(h_inv_apply(metric, v))));
}

bool GradientBundle::feasible(double tolerance) const {
  for (Eigen::Index k = 0; k < constraint_values.size(); ++k) {
    if (constraint_values[k] > thresholds[k] + tolerance) return false;
  }
  return true;
}

void GradientBundle::validate() const {
  if (objective_grads.empty()) throw std::invalid_argument("gradient bundle needs at least one objective");
  const Eigen::Index dim = objective_grads.front().size();
  auto check = [dim](const std::vector<Vector>& grads) {
    for (const auto& g : grads) {
      if (g.size() != dim) throw std::invalid_argument("gradient vectors must share one dimension");
    }
  };
  check(objective_grads);
  check(constraint_grads);
  const auto m = static_cast<Eigen::Index>(constraint_grads.size());
  if (constraint_values.size() != m || thresholds.size() != m) {
    throw std::invalid_argument("constraint values and thresholds must match the constraint count");
  }
}

}  // namespace comoga
