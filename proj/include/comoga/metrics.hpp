#pragma once

// Front construction and front-quality indicators. All objectives are
// maximized: q dominates p when q >= p componentwise and q != p.

#include "comoga/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace comoga::metrics {

struct FrontPoint {
  Vector objectives;
  bool feasible = true;
  std::optional<Preference> preference;
};

struct ParetoArchive {
  std::vector<FrontPoint> points;
  std::optional<Vector> reference;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  Eigen::Index n_objectives() const { return points.empty() ? 0 : points.front().objectives.size(); }
};

/// q >= p componentwise and q != p.
bool dominates(const Vector& q, const Vector& p);

/// Indices of the mutually non-dominated points (first occurrence of exact
/// duplicates), in lexicographic order of the objective vectors.
std::vector<std::size_t> non_dominated_indices(const std::vector<Vector>& points);

/// Drops infeasible points, collapses duplicates and removes dominated points.
ParetoArchive pareto_filter(const std::vector<FrontPoint>& points);

/// Componentwise minimum over the Pareto front of the union of all archives.
Vector reference_point(const std::vector<ParetoArchive>& archives);

/// Exact dominated volume above `reference` for N <= 3. Points are clipped at
/// the reference, so those below it in any coordinate contribute nothing.
double hypervolume(const ParetoArchive& archive, const Vector& reference);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Uniform sampling of the bounding box [reference, max point]. The uniform
/// variates come from std::mt19937_64 mapped to [0, 1) with 53 random bits,
/// so results are identical across platforms for a given seed.
MonteCarloEstimate hypervolume_mc(const ParetoArchive& archive, const Vector& reference, std::size_t samples,
                                  std::uint64_t seed);

/// Mean squared min-max-normalized gap between sorted per-dimension values;
/// nullopt for fewer than two points. Zero-range dimensions contribute 0.
std::optional<double> normalized_sparsity(const ParetoArchive& archive);

/// Unnormalized counterpart of normalized_sparsity.
std::optional<double> sparsity(const ParetoArchive& archive);

struct Evaluation {
  std::optional<Preference> preference;
  Vector objectives;
  Vector constraints;
};

/// Marks evaluations with every constraint at or below its threshold as
/// feasible, then Pareto-filters.
ParetoArchive build_front(const std::vector<Evaluation>& evaluations, const Vector& thresholds);

}  // namespace comoga::metrics
