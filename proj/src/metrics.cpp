#include "comoga/metrics.hpp"

#include "comoga/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace comoga::metrics {

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

bool weakly_dominates(const Vector& q, const Vector& p) { return (q.array() >= p.array()).all(); }

void require_finite(const Vector& v) {
  if (!v.allFinite()) throw std::invalid_argument("objective values must be finite");
}

// Exact 2-D dominated area of clipped points above `ref`.
double area_2d(std::vector<Eigen::Vector2d> pts, const Eigen::Vector2d& ref) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() != b.x() ? a.x() > b.x() : a.y() > b.y();
  });
  double area = 0.0;
  double floor_y = ref.y();
  for (const auto& p : pts) {
    if (p.y() > floor_y) {
      area += (p.x() - ref.x()) * (p.y() - floor_y);
      floor_y = p.y();
    }
  }
  return area;
}

}  // namespace

bool dominates(const Vector& q, const Vector& p) {
  if (q.size() != p.size()) throw std::invalid_argument("dominates: dimension mismatch");
  return weakly_dominates(q, p) && q != p;
}

std::vector<std::size_t> non_dominated_indices(const std::vector<Vector>& points) {
  if (points.empty()) return {};
  const Eigen::Index n_obj = points.front().size();
  for (const auto& p : points) {
    if (p.size() != n_obj) throw std::invalid_argument("points must share one dimension");
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Descending lexicographic: a dominator always precedes what it dominates.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(points[b], points[a]); });

  std::vector<std::size_t> kept;
  if (n_obj == 2) {
    double best_y = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
      if (points[idx][1] > best_y) {
        kept.push_back(idx);
        best_y = points[idx][1];
      }
    }
  } else {
    for (std::size_t idx : order) {
      const bool covered = std::any_of(kept.begin(), kept.end(),
                                       [&](std::size_t k) { return weakly_dominates(points[k], points[idx]); });
      if (!covered) kept.push_back(idx);
    }
  }
  std::reverse(kept.begin(), kept.end());
  return kept;
}

ParetoArchive pareto_filter(const std::vector<FrontPoint>& points) {
  std::vector<Vector> feasible;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].feasible) continue;
    require_finite(points[i].objectives);
    feasible.push_back(points[i].objectives);
    source.push_back(i);
  }
  ParetoArchive archive;
  for (std::size_t k : non_dominated_indices(feasible)) archive.points.push_back(points[source[k]]);
  return archive;
}

Vector reference_point(const std::vector<ParetoArchive>& archives) {
  std::vector<FrontPoint> all;
  for (const auto& a : archives) all.insert(all.end(), a.points.begin(), a.points.end());
  const ParetoArchive joint = pareto_filter(all);
  if (joint.empty()) throw std::invalid_argument("reference_point needs at least one non-empty archive");
  Vector ref = joint.points.front().objectives;
  for (const auto& p : joint.points) ref = ref.cwiseMin(p.objectives);
  return ref;
}

double hypervolume(const ParetoArchive& archive, const Vector& reference) {
  const Eigen::Index n = reference.size();
  if (n < 1 || n > 3) {
    throw std::invalid_argument("exact hypervolume supports 1 to 3 objectives, got " + std::to_string(n));
  }
  std::vector<Vector> clipped;
  for (const auto& p : archive.points) {
    if (p.objectives.size() != n) throw std::invalid_argument("hypervolume: dimension mismatch");
    const Vector c = p.objectives.cwiseMax(reference);
    if ((c.array() > reference.array()).all()) clipped.push_back(c);
  }
  if (clipped.empty()) return 0.0;

  if (n == 1) {
    double best = reference[0];
    for (const auto& c : clipped) best = std::max(best, c[0]);
    return best - reference[0];
  }
  if (n == 2) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& c : clipped) pts.emplace_back(c[0], c[1]);
    return area_2d(std::move(pts), Eigen::Vector2d(reference[0], reference[1]));
  }

  // N = 3: slab decomposition along the third objective.
  std::sort(clipped.begin(), clipped.end(), [](const Vector& a, const Vector& b) { return a[2] > b[2]; });
  const Eigen::Vector2d ref2(reference[0], reference[1]);
  double volume = 0.0;
  std::vector<Eigen::Vector2d> slice;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    slice.emplace_back(clipped[i][0], clipped[i][1]);
    const double top = clipped[i][2];
    const double bottom = i + 1 < clipped.size() ? clipped[i + 1][2] : reference[2];
    if (top > bottom) volume += area_2d(slice, ref2) * (top - bottom);
  }
  return volume;
}

MonteCarloEstimate hypervolume_mc(const ParetoArchive& archive, const Vector& reference, std::size_t samples,
                                  std::uint64_t seed) {
  if (samples < 10000) throw std::invalid_argument("hypervolume_mc needs at least 1e4 samples");
  const Eigen::Index n = reference.size();
  std::vector<Vector> boxes;
  Vector upper = reference;
  for (const auto& p : archive.points) {
    if (p.objectives.size() != n) throw std::invalid_argument("hypervolume_mc: dimension mismatch");
    const Vector c = p.objectives.cwiseMax(reference);
    boxes.push_back(c);
    upper = upper.cwiseMax(c);
  }
  const double volume = (upper - reference).prod();
  if (boxes.empty() || !(volume > 0.0)) return {};

  Rng rng(seed);
  const Vector span = upper - reference;
  Vector z(n);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index d = 0; d < n; ++d) z[d] = reference[d] + span[d] * rng.uniform();
    for (const auto& b : boxes) {
      if ((z.array() <= b.array()).all()) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  MonteCarloEstimate est;
  est.estimate = volume * frac;
  est.std_error = volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
  return est;
}

namespace {

std::optional<double> gap_sum(const ParetoArchive& archive, bool normalize) {
  const std::size_t size = archive.size();
  if (size < 2) return std::nullopt;
  const Eigen::Index n = archive.n_objectives();
  double total = 0.0;
  std::vector<double> column(size);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < size; ++i) column[i] = archive.points[i].objectives[j];
    std::sort(column.begin(), column.end());
    const double range = column.back() - column.front();
    if (normalize && !(range > 0.0)) continue;
    const double denom = normalize ? range : 1.0;
    for (std::size_t i = 0; i + 1 < size; ++i) {
      const double gap = (column[i + 1] - column[i]) / denom;
      total += gap * gap;
    }
  }
  return total / static_cast<double>(size - 1);
}

}  // namespace

std::optional<double> normalized_sparsity(const ParetoArchive& archive) { return gap_sum(archive, true); }

std::optional<double> sparsity(const ParetoArchive& archive) { return gap_sum(archive, false); }

ParetoArchive build_front(const std::vector<Evaluation>& evaluations, const Vector& thresholds) {
  std::vector<FrontPoint> points;
  points.reserve(evaluations.size());
  for (const auto& e : evaluations) {
    if (e.constraints.size() != thresholds.size()) {
      throw std::invalid_argument("build_front: constraint count does not match thresholds");
    }
    const bool ok = (e.constraints.array() <= thresholds.array()).all();
    points.push_back({e.objectives, ok, e.preference});
  }
  return pareto_filter(points);
}

}  // namespace comoga::metrics
