#include "comoga/metrics.hpp"
#include "comoga/toy_bench.hpp"
#include "comoga/verification.hpp"

#include <doctest.h>

#include <cmath>

using namespace comoga;
using namespace comoga::metrics;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ParetoArchive archive_of(std::initializer_list<Vector> points) {
  std::vector<FrontPoint> fp;
  for (const Vector& p : points) fp.push_back({p, true, std::nullopt});
  return pareto_filter(fp);
}

// Inclusion-exclusion over all subsets of boxes [r, p].
double hv_inclusion_exclusion(const std::vector<Vector>& points, const Vector& r) {
  const std::size_t n = points.size();
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    Vector corner = Vector::Constant(r.size(), std::numeric_limits<double>::infinity());
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        corner = corner.cwiseMin(points[i]);
        ++count;
      }
    }
    const double volume = (corner - r).cwiseMax(0.0).prod();
    total += (count % 2 == 1 ? 1.0 : -1.0) * volume;
  }
  return total;
}

}  // namespace

TEST_CASE("dominance") {
  CHECK(dominates(vec({2.0, 1.0}), vec({1.0, 1.0})));
  CHECK_FALSE(dominates(vec({1.0, 1.0}), vec({1.0, 1.0})));
  CHECK_FALSE(dominates(vec({2.0, 0.0}), vec({1.0, 1.0})));
}

TEST_CASE("pareto filter examples") {
  const auto a = archive_of({vec({1.0, 2.0}), vec({2.0, 1.0}), vec({1.0, 1.0})});
  REQUIRE(a.size() == 2);
  CHECK(a.points[0].objectives == vec({1.0, 2.0}));
  CHECK(a.points[1].objectives == vec({2.0, 1.0}));

  const auto b = pareto_filter({{vec({1.0, 2.0}), true, std::nullopt}, {vec({5.0, 5.0}), false, std::nullopt}});
  REQUIRE(b.size() == 1);
  CHECK(b.points[0].objectives == vec({1.0, 2.0}));
  CHECK(pareto_filter({}).empty());
}

TEST_CASE("pareto filter is idempotent and collapses duplicates") {
  Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    std::vector<FrontPoint> pts;
    for (int i = 0; i < 30; ++i) {
      Vector p(2);
      p << std::round(rng.uniform(0.0, 5.0)), std::round(rng.uniform(0.0, 5.0));
      pts.push_back({p, rng.uniform() < 0.8, std::nullopt});
    }
    const auto once = pareto_filter(pts);
    const auto twice = pareto_filter(once.points);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once.points[i].objectives == twice.points[i].objectives);
    for (const auto& p : once.points) {
      for (const auto& q : once.points) CHECK_FALSE(dominates(q.objectives, p.objectives));
    }
  }
}

TEST_CASE("reference point examples") {
  const auto a = archive_of({vec({1.0, 2.0}), vec({2.0, 1.0})});
  CHECK(reference_point({a}) == vec({1.0, 1.0}));
  const auto dominated = archive_of({vec({0.5, 0.5})});
  CHECK(reference_point({a, dominated}) == vec({1.0, 1.0}));
  CHECK(hypervolume(dominated, reference_point({a, dominated})) == 0.0);
  CHECK(reference_point({archive_of({vec({0.0, 3.0})}), archive_of({vec({3.0, 0.0})})}) == vec({0.0, 0.0}));
  CHECK_THROWS(reference_point({ParetoArchive{}}));
}

TEST_CASE("hypervolume worked examples") {
  CHECK(hypervolume(archive_of({vec({1.0, 2.0}), vec({2.0, 1.0})}), vec({0.0, 0.0})) == 3.0);
  CHECK(hypervolume(archive_of({vec({2.0, 2.0})}), vec({2.0, 2.0})) == 0.0);
  // Boxes of volume 1 and 0.5 overlapping in [0,1]x[0,0.5]x[0,0.5] (volume 0.25).
  const auto three = archive_of({vec({1.0, 1.0, 1.0}), vec({2.0, 0.5, 0.5})});
  CHECK(hypervolume(three, vec({0.0, 0.0, 0.0})) == 1.25);
  CHECK(hv_inclusion_exclusion({vec({1.0, 1.0, 1.0}), vec({2.0, 0.5, 0.5})}, Vector::Zero(3)) == 1.25);
  const auto mc = hypervolume_mc(three, Vector::Zero(3), 1000000, 1);
  CHECK(std::abs(mc.estimate - 1.25) <= 3.0 * mc.std_error);
}

TEST_CASE("hypervolume matches inclusion-exclusion on random archives") {
  Rng rng(52);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index dim = 2 + t % 2;
    std::vector<Vector> raw;
    std::vector<FrontPoint> pts;
    const int n = 1 + static_cast<int>(rng.next() % 8);
    for (int i = 0; i < n; ++i) {
      Vector p(dim);
      for (Eigen::Index k = 0; k < dim; ++k) p[k] = rng.uniform();
      raw.push_back(p);
      pts.push_back({p, true, std::nullopt});
    }
    Vector r(dim);
    for (Eigen::Index k = 0; k < dim; ++k) r[k] = rng.uniform(-0.2, 0.3);
    const double want = hv_inclusion_exclusion(raw, r);
    CHECK(std::abs(hypervolume(pareto_filter(pts), r) - want) <= 1e-12);
  }
}

TEST_CASE("monte-carlo hypervolume examples") {
  const auto a = archive_of({vec({1.0, 2.0}), vec({2.0, 1.0})});
  const auto est = hypervolume_mc(a, Vector::Zero(2), 1000000, 3);
  CHECK(std::abs(est.estimate - 3.0) <= 3.0 * est.std_error);
  const auto empty = hypervolume_mc(ParetoArchive{}, Vector::Zero(2), 10000, 3);
  CHECK(empty.estimate == 0.0);
  CHECK(empty.std_error == 0.0);
  const auto unit = hypervolume_mc(archive_of({vec({1.0, 1.0})}), Vector::Zero(2), 10000, 3);
  CHECK(std::abs(unit.estimate - 1.0) <= 3.0 * unit.std_error + 1e-15);
  const auto again = hypervolume_mc(a, Vector::Zero(2), 1000000, 3);
  CHECK(again.estimate == est.estimate);
}

TEST_CASE("exact and monte-carlo hypervolume agree on 50 random archives") {
  const auto r = verification::hypervolume_mc_suite(50, 1000000, 1);
  CHECK(r.instances == 50);
  CHECK(r.failures == 0);
}

TEST_CASE("hypervolume is monotone under adding points") {
  Rng rng(53);
  for (int t = 0; t < 50; ++t) {
    std::vector<FrontPoint> pts;
    double previous = 0.0;
    for (int i = 0; i < 8; ++i) {
      pts.push_back({vec({rng.uniform(), rng.uniform(), rng.uniform()}), true, std::nullopt});
      const double hv = hypervolume(pareto_filter(pts), Vector::Zero(3));
      CHECK(hv >= previous - 1e-15);
      previous = hv;
    }
  }
}

TEST_CASE("normalized sparsity worked examples") {
  CHECK(*normalized_sparsity(archive_of({vec({0.0, 1.0}), vec({0.5, 0.5}), vec({1.0, 0.0})})) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(*normalized_sparsity(archive_of({vec({0.0, 1.0}), vec({1.0, 0.0})})) == 2.0);
  CHECK_FALSE(normalized_sparsity(archive_of({vec({1.0, 1.0})})).has_value());
  CHECK_FALSE(normalized_sparsity(ParetoArchive{}).has_value());
}

TEST_CASE("equally spaced line front") {
  double previous = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 30; ++n) {
    std::vector<FrontPoint> pts;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / (n - 1);
      pts.push_back({vec({x, 1.0 - x}), true, std::nullopt});
    }
    // Two dimensions, n-1 gaps of 1/(n-1) each, averaged over n-1.
    const double want = 2.0 / ((n - 1.0) * (n - 1.0));
    const double got = *normalized_sparsity(pareto_filter(pts));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got < previous);
    previous = got;
  }
}

TEST_CASE("normalized sparsity is invariant to positive affine maps") {
  Rng rng(54);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index dim = 2 + t % 2;
    std::vector<FrontPoint> pts, mapped;
    Vector scale(dim), shift(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      scale[k] = std::exp(rng.uniform(-3.0, 3.0));
      shift[k] = rng.uniform(-10.0, 10.0);
    }
    for (int i = 0; i < 10; ++i) {
      Vector p(dim);
      for (Eigen::Index k = 0; k < dim; ++k) p[k] = rng.uniform();
      pts.push_back({p, true, std::nullopt});
      mapped.push_back({p.cwiseProduct(scale) + shift, true, std::nullopt});
    }
    const auto a = normalized_sparsity(pareto_filter(pts));
    const auto b = normalized_sparsity(pareto_filter(mapped));
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(std::abs(*a - *b) <= 1e-12);
  }
}

TEST_CASE("raw sparsity scales with the objectives") {
  const auto a = archive_of({vec({0.0, 2.0}), vec({2.0, 0.0})});
  CHECK(*sparsity(a) == 8.0);
  CHECK(*normalized_sparsity(a) == 2.0);
}

TEST_CASE("build front examples") {
  const Vector d = vec({0.0});
  CHECK(build_front({{std::nullopt, vec({1.0, 1.0}), vec({0.5})}}, d).empty());
  const auto single = build_front({{std::nullopt, vec({1.0, 1.0}), vec({0.0})}}, d);
  REQUIRE(single.size() == 1);
  CHECK(single.points[0].objectives == vec({1.0, 1.0}));
}

TEST_CASE("toy preference sweep spans the trade-off") {
  comoga::AggregatorConfig cfg;
  cfg.epsilon = 0.05;
  cfg.feasibility_tolerance = 1e-9;
  std::vector<Evaluation> evals;
  for (const auto& w : preference_grid(2, 20)) {
    const auto tr = toy::run_comoga_toy({-10.0, 0.0}, w, cfg, 20000, 0.001);
    const auto& v = tr.values.back();
    evals.push_back({w, vec({-v.l1, -v.l2}), vec({v.c})});
  }
  const auto front = build_front(evals, vec({1e-3}));
  CHECK(front.size() >= 2);
  const auto first = front.points.front().objectives;
  const auto last = front.points.back().objectives;
  CHECK(first[0] < last[0]);
  CHECK(first[1] > last[1]);
}
