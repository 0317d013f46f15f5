#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace comoga {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an enumeration or problem size exceeds a hard cap.
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonnegative objective weights whose largest entry is exactly 1.
class Preference {
 public:
  explicit Preference(Vector weights);

  /// Rescales an arbitrary nonnegative, nonzero vector so its max entry is 1.
  static Preference normalized(const Vector& raw);

  const Vector& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

 private:
  Vector weights_;
};

bool operator==(const Preference& a, const Preference& b);

enum class GridConvention {
  /// Equally spaced on the 1-norm simplex, then rescaled to max-norm 1.
  kOneNormSimplex,
  /// Equally spaced by arc length along the max-norm-1 face (N = 2 only;
  /// falls back to the simplex lattice for N >= 3).
  kMaxNormFace,
};

/// Deterministic grid of preferences. For N = 2 exactly `count` points from
/// (1, 0) to (0, 1); for N >= 3 the smallest simplex lattice holding at least
/// `count` points, in lexicographically descending order.
std::vector<Preference> preference_grid(std::size_t n_objectives, std::size_t count,
                                        GridConvention convention = GridConvention::kOneNormSimplex);

/// Abstract positive (semi)definite metric H on parameter space.
class MetricGeometry {
 public:
  virtual ~MetricGeometry() = default;
  virtual Eigen::Index dimension() const = 0;
  /// sqrt(v' H v)
  virtual double norm(const Vector& v) const = 0;
  /// H^{-1} v, or the pseudo-inverse for singular metrics.
  virtual Vector inverse_apply(const Vector& v) const = 0;
  /// H v
  virtual Vector apply(const Vector& v) const = 0;
};

/// The local-region metric: identity, an explicit SPD matrix, or a PSD
/// (Fisher) matrix used through its truncated eigendecomposition.
class LocalMetric final : public MetricGeometry {
 public:
  enum class Kind { kIdentity, kExplicitSpd, kFisherPseudo };

  static LocalMetric identity(Eigen::Index dimension);
  /// Throws std::invalid_argument unless `h` is symmetric positive definite.
  static LocalMetric explicit_spd(const Matrix& h);
  /// `pinv_threshold` is an absolute eigenvalue cutoff; by default
  /// 1e-8 times the largest eigenvalue.
  static LocalMetric fisher_pseudo(const Matrix& f, std::optional<double> pinv_threshold = {});

  Kind kind() const { return kind_; }
  Eigen::Index dimension() const override { return dimension_; }
  const Matrix& matrix() const { return matrix_; }
  double pinv_threshold() const { return pinv_threshold_; }
  /// Number of eigenvalues kept by the pseudo-inverse (full rank otherwise).
  Eigen::Index rank() const;

  double norm(const Vector& v) const override;
  Vector inverse_apply(const Vector& v) const override;
  Vector apply(const Vector& v) const override;

 private:
  LocalMetric() = default;

  Kind kind_ = Kind::kIdentity;
  Eigen::Index dimension_ = 0;
  Matrix matrix_;
  double pinv_threshold_ = 0.0;
  // explicit-SPD
  Eigen::LLT<Matrix> llt_;
  // fisher-pseudo: retained eigenpairs only
  Matrix eigenvectors_;
  Vector eigenvalues_;
};

/// sqrt(v' H v); throws on dimension mismatch.
double h_norm(const MetricGeometry& metric, const Vector& v);
/// H^{-1} v; throws on dimension mismatch.
Vector h_inv_apply(const MetricGeometry& metric, const Vector& v);
/// sqrt(v' H^{-1} v), the dual norm used for transformation offsets.
double h_inv_norm(const MetricGeometry& metric, const Vector& v);

/// Objective and safety-constraint gradients at a single parameter point.
struct GradientBundle {
  std::vector<Vector> objective_grads;
  std::vector<Vector> constraint_grads;
  Vector constraint_values;
  Vector thresholds;

  Eigen::Index dimension() const { return objective_grads.front().size(); }
  std::size_t n_objectives() const { return objective_grads.size(); }
  std::size_t n_constraints() const { return constraint_grads.size(); }
  /// True when every constraint value is at or below its threshold plus `tolerance`.
  bool feasible(double tolerance = 0.0) const;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

}  // namespace comoga
