#include "hybreach/lp.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hybreach;
using hytest::vec;

TEST_CASE("lp examples") {
  LpProblem p(1);
  p.set_objective(vec({1}), Sense::Maximize);
  p.add_constraint(vec({1}), Relation::LessEqual, 3);
  p.add_constraint(vec({1}), Relation::GreaterEqual, 0);
  p.set_bounds(0, -kInfinity, kInfinity);
  auto s = solve(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.value == doctest::Approx(3));

  LpProblem q(1);
  q.set_bounds(0, -kInfinity, kInfinity);
  q.add_constraint(vec({1}), Relation::LessEqual, 0);
  q.add_constraint(vec({1}), Relation::GreaterEqual, 1);
  CHECK(solve(q).status == LpStatus::Infeasible);

  LpProblem r(1);
  r.set_bounds(0, -kInfinity, kInfinity);
  r.set_objective(vec({1}), Sense::Maximize);
  r.add_constraint(vec({1}), Relation::GreaterEqual, 0);
  CHECK(solve(r).status == LpStatus::Unbounded);
}

TEST_CASE("equality constraints and free variables") {
  // min x + y s.t. x - y = 1, x + 2y >= 4, y <= 5
  LpProblem p(2);
  p.set_bounds(0, -kInfinity, kInfinity);
  p.set_bounds(1, -kInfinity, 5);
  p.set_objective(vec({1, 1}), Sense::Minimize);
  p.add_constraint(vec({1, -1}), Relation::Equal, 1);
  p.add_constraint(vec({1, 2}), Relation::GreaterEqual, 4);
  const auto s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.value == doctest::Approx(3.0));
  CHECK(s.point[0] == doctest::Approx(2.0));
  CHECK(s.point[1] == doctest::Approx(1.0));
}

namespace {

// Optimum of a linear objective over a box with no other constraints: best corner.
double corner_optimum(const Vector& c, const Vector& lo, const Vector& hi, Sense sense) {
  double best = sense == Sense::Maximize ? -1e300 : 1e300;
  const long n = static_cast<long>(c.size());
  for (long mask = 0; mask < (1L << n); ++mask) {
    double v = 0;
    for (long k = 0; k < n; ++k) v += c[k] * ((mask >> k) & 1 ? hi[k] : lo[k]);
    best = sense == Sense::Maximize ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("corner enumeration oracle on boxes") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 3)(rng);
    Vector c(n), lo(n), hi(n);
    LpProblem p(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      c[k] = hytest::uniform(rng, -3, 3);
      lo[k] = hytest::uniform(rng, -5, 1);
      hi[k] = lo[k] + hytest::uniform(rng, 0, 4);
      // Half the trials state the box as constraints instead of bounds.
      if (trial % 2) {
        p.set_bounds(k, -kInfinity, kInfinity);
        Vector e = Vector::Zero(n);
        e[k] = 1;
        p.add_constraint(e, Relation::GreaterEqual, lo[k]);
        p.add_constraint(e, Relation::LessEqual, hi[k]);
      } else {
        p.set_bounds(k, lo[k], hi[k]);
      }
    }
    const Sense sense = trial % 3 ? Sense::Maximize : Sense::Minimize;
    p.set_objective(c, sense);
    const auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(std::abs(s.value - corner_optimum(c, lo, hi, sense)) <= 1e-6);
    CHECK(p.max_violation(s.point) <= kLpFeasibilityTol);
    CHECK(std::abs(s.value - c.dot(s.point)) <= 1e-8 * std::max(1.0, std::abs(s.value)));
  }
}

TEST_CASE("random polytopes: feasible points and determinism") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 4;
    LpProblem p(n);
    const Vector anchor = hytest::sample_in(rng, hytest::box({-1, -1, -1, -1}, {1, 1, 1, 1}));
    for (Eigen::Index k = 0; k < n; ++k) p.set_bounds(k, -3, 3);
    for (int m = 0; m < 8; ++m) {
      Vector a(n);
      for (Eigen::Index k = 0; k < n; ++k) a[k] = hytest::uniform(rng, -1, 1);
      const double slack = hytest::uniform(rng, 0, 0.5);
      if (m == 0) {
        p.add_constraint(a, Relation::Equal, a.dot(anchor));
      } else {
        p.add_constraint(a, Relation::LessEqual, a.dot(anchor) + slack);
      }
    }
    Vector c(n);
    for (Eigen::Index k = 0; k < n; ++k) c[k] = hytest::uniform(rng, -1, 1);
    p.set_objective(c, Sense::Maximize);
    const auto s1 = solve(p);
    const auto s2 = solve(p);
    REQUIRE(s1.optimal());
    CHECK(p.max_violation(s1.point) <= kLpFeasibilityTol);
    CHECK(s1.value >= c.dot(anchor) - 1e-9);
    CHECK(s1.status == s2.status);
    CHECK(s1.value == s2.value);
  }
}

TEST_CASE("degenerate vertex terminates") {
  // Many constraints through the origin.
  LpProblem p(3);
  for (int i = 0; i < 12; ++i) {
    const double a = std::cos(i), b = std::sin(i);
    p.add_constraint(vec({a, b, 1}), Relation::LessEqual, 0);
  }
  p.set_objective(vec({0, 0, 1}), Sense::Maximize);
  const auto s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.value == doctest::Approx(0.0));
}
