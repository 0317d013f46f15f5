#include "comoga/qp_solver.hpp"
#include "comoga/verification.hpp"

#include <doctest.h>

#include <cmath>

using namespace comoga;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("no constraints gives the zero step") {
  const auto metric = LocalMetric::identity(3);
  const QPSolution s = solve(metric, {}, {});
  CHECK(s.status == QPStatus::kOptimal);
  CHECK(s.primal.isZero());
  CHECK(s.duals_lower.size() == 0);
  const KktResiduals r = kkt_residual(metric, {}, {}, s);
  CHECK(r.stationarity == 0.0);
  CHECK(r.feasibility == 0.0);
  CHECK(r.complementarity == 0.0);
}

TEST_CASE("single improvement constraint matches the closed form") {
  const auto metric = LocalMetric::identity(2);
  const QPSolution s = solve(metric, {{vec({1.0, 0.0}), 1.0}}, {});
  REQUIRE(s.status == QPStatus::kOptimal);
  CHECK(s.primal[0] == doctest::Approx(1.0));
  CHECK(std::abs(s.primal[1]) < 1e-15);
  CHECK(s.duals_lower[0] == doctest::Approx(2.0));
}

TEST_CASE("contradictory half-spaces are infeasible") {
  const auto metric = LocalMetric::identity(2);
  const QPSolution s = solve(metric, {{vec({1.0, 0.0}), 1.0}, {vec({-1.0, 0.0}), 1.0}}, {});
  CHECK(s.status == QPStatus::kInfeasible);
  CHECK(s.primal.isZero());
  CHECK(s.duals_lower.isZero());
}

TEST_CASE("two orthogonal improvement constraints") {
  const std::vector<LinearConstraint> lower{{vec({1.0, 0.0}), 1.0}, {vec({0.0, 1.0}), 1.0}};
  const QPSolution want = verification::brute_force_qp(Matrix::Identity(2, 2), lower, {});
  REQUIRE(want.status == QPStatus::kOptimal);
  CHECK((want.primal - vec({1.0, 1.0})).norm() < 1e-12);
  const QPSolution got = solve(LocalMetric::identity(2), lower, {});
  CHECK((got.primal - want.primal).norm() < 1e-12);
}

TEST_CASE("perturbed primal shows the complementarity gap") {
  const auto metric = LocalMetric::identity(2);
  const std::vector<LinearConstraint> lower{{vec({1.0, 0.0}), 1.0}};
  QPSolution s = solve(metric, lower, {});
  s.primal[0] += 0.1;
  const KktResiduals r = kkt_residual(metric, lower, {}, s);
  CHECK(r.complementarity == doctest::Approx(0.2));
}

TEST_CASE("upper constraints are honoured with nonnegative duals") {
  const auto metric = LocalMetric::identity(2);
  const QPSolution s = solve(metric, {{vec({1.0, 0.0}), 1.0}}, {{vec({1.0, 1.0}), -1.0}});
  REQUIRE(s.status == QPStatus::kOptimal);
  CHECK(s.primal[0] >= 1.0 - 1e-12);
  CHECK(s.primal[0] + s.primal[1] <= -1.0 + 1e-12);
  CHECK(s.duals_upper[0] >= 0.0);
  // Brute-force optimum: x = (1, -2).
  CHECK((s.primal - vec({1.0, -2.0})).norm() < 1e-12);
}

TEST_CASE("dimension and size checks") {
  const auto metric = LocalMetric::identity(2);
  CHECK_THROWS_AS(solve(metric, {{vec({1.0}), 1.0}}, {}), std::invalid_argument);
  std::vector<LinearConstraint> many(kMaxQpConstraints + 1, LinearConstraint{vec({1.0, 0.0}), 0.0});
  CHECK_THROWS_AS(solve(metric, many, {}), std::invalid_argument);
}

TEST_CASE("random instances agree with the primal brute force") {
  Rng rng(101);
  for (int t = 0; t < 300; ++t) {
    const QPInstance inst = verification::random_qp_instance(rng);
    const QPSolution got = solve(inst);
    const QPSolution want = verification::brute_force_qp(inst.metric.matrix(), inst.lower, inst.upper);
    REQUIRE(got.status == want.status);
    if (got.status != QPStatus::kOptimal) continue;
    CHECK(inst.metric.norm(got.primal - want.primal) <= 1e-7);
    const double want_obj = qp_objective(inst.metric, want.primal);
    CAPTURE(want_obj);
    CHECK(std::abs(qp_objective(inst.metric, got.primal) - want_obj) <= 1e-9 * (1.0 + want_obj));

    const double scale = kkt_scale(inst.lower, inst.upper);
    const KktResiduals r = kkt_residual(inst, got);
    CHECK(r.stationarity <= 1e-8 * scale);
    CHECK(r.feasibility <= 1e-8 * scale);
    CHECK(r.complementarity <= 1e-8 * scale);

    // Dual recovery: x = H^{-1}(sum nu a - sum lambda a) / 2.
    Vector combo = Vector::Zero(got.primal.size());
    for (std::size_t i = 0; i < inst.lower.size(); ++i) combo += got.duals_lower[static_cast<Eigen::Index>(i)] * inst.lower[i].a;
    for (std::size_t k = 0; k < inst.upper.size(); ++k) combo -= got.duals_upper[static_cast<Eigen::Index>(k)] * inst.upper[k].a;
    CHECK((got.primal - 0.5 * inst.metric.inverse_apply(combo)).norm() <= 1e-8);
  }
}

TEST_CASE("scaling lower offsets scales the primal") {
  Rng rng(102);
  for (int t = 0; t < 100; ++t) {
    QPInstance inst = verification::random_qp_instance(rng);
    inst.upper.clear();
    if (inst.lower.empty()) continue;
    for (auto& c : inst.lower) c.c = std::abs(c.c) + 0.1;
    const QPSolution base = solve(inst);
    if (base.status != QPStatus::kOptimal) continue;
    const double s = 0.5 + 3.0 * rng.uniform();
    QPInstance scaled = inst;
    for (auto& c : scaled.lower) c.c *= s;
    const QPSolution out = solve(scaled);
    REQUIRE(out.status == QPStatus::kOptimal);
    CHECK((out.primal - s * base.primal).norm() <= 1e-9 * (1.0 + s * base.primal.norm()));
  }
}

TEST_CASE("gram solve orders ties deterministically") {
  // Two identical rows: either multiplier split is optimal; the solver must
  // return the same answer every time.
  Matrix gram(2, 2);
  gram << 1.0, 1.0, 1.0, 1.0;
  const Vector offsets = vec({1.0, 1.0});
  const GramSolution a = solve_gram(gram, offsets);
  const GramSolution b = solve_gram(gram, offsets);
  REQUIRE(a.status == QPStatus::kOptimal);
  CHECK(a.multipliers == b.multipliers);
  CHECK((0.5 * (gram * a.multipliers) - offsets).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oracle suite passes at the default size") {
  const auto r = verification::qp_oracle_suite(1000, 1);
  CHECK(r.instances == 1000);
  CHECK(r.failures == 0);
}
