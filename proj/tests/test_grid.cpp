#include <doctest.h>

#include <cmath>
#include <random>

#include "evolv/grid.hpp"
#include "evolv/operators.hpp"

using namespace evolv;

namespace {

Trajectory random_trajectory(std::mt19937_64& rng, const TimeGrid& g, Index d) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix v(d, g.n());
  for (Index k = 0; k < g.n(); ++k) {
    for (Index i = 0; i < d; ++i) v(i, k) = Complex(dist(rng), dist(rng));
  }
  return Trajectory(g, std::move(v));
}

}  // namespace

TEST_CASE("make_grid produces the stated time points") {
  const TimeGrid g = make_grid(0.0, 1.0, 3);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(1) == 1.0);
  CHECK(g.time(2) == 2.0);

  const TimeGrid g2 = make_grid(-1.0, 0.5, 4);
  CHECK(g2.time(0) == -1.0);
  CHECK(g2.time(1) == -0.5);
  CHECK(g2.time(2) == 0.0);
  CHECK(g2.time(3) == 0.5);
}

TEST_CASE("make_grid rejects degenerate parameters") {
  CHECK_THROWS_AS(make_grid(0.0, 0.0, 5), InvalidGridError);
  CHECK_THROWS_AS(make_grid(0.0, -0.5, 5), InvalidGridError);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 1), InvalidGridError);
}

TEST_CASE("weighted inner product matches hand values") {
  const TimeGrid g = make_grid(0.0, 1.0, 2);
  Matrix ones(1, 2);
  ones << 1.0, 1.0;
  const Trajectory u(g, ones);

  CHECK(weighted_inner(u, u, Weight(g, 0.0)).real() == doctest::Approx(2.0).epsilon(1e-14));

  // nu = ln(2)/2 makes e^{-2 nu} = 1/2.
  const Weight w(g, std::log(2.0) / 2.0);
  CHECK(weighted_inner(u, u, w).real() == doctest::Approx(1.5).epsilon(1e-14));

  const Trajectory z = Trajectory::zero(g, 1);
  CHECK(std::abs(weighted_inner(z, u, w)) == 0.0);
}

TEST_CASE("weighted inner product is conjugate symmetric and positive") {
  std::mt19937_64 rng(42);
  const TimeGrid g = make_grid(-0.5, 0.25, 17);
  const Weight w(g, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory u = random_trajectory(rng, g, 3);
    const Trajectory v = random_trajectory(rng, g, 3);
    const Complex uv = weighted_inner(u, v, w);
    const Complex vu = weighted_inner(v, u, w);
    CHECK(std::abs(uv - std::conj(vu)) < 1e-12);
    CHECK(weighted_inner(u, u, w).real() > 0.0);
    CHECK(std::abs(weighted_inner(u, u, w).imag()) < 1e-12);
  }
  CHECK(weighted_norm(Trajectory::zero(g, 3), w) == 0.0);
}

TEST_CASE("shape mismatches are rejected") {
  const TimeGrid g = make_grid(0.0, 1.0, 4);
  const TimeGrid g2 = make_grid(0.0, 0.5, 4);
  const Weight w(g, 1.0);
  const Trajectory a = Trajectory::zero(g, 2);
  const Trajectory b = Trajectory::zero(g, 3);
  const Trajectory c = Trajectory::zero(g2, 2);
  CHECK_THROWS_AS(weighted_inner(a, b, w), ShapeError);
  CHECK_THROWS_AS(weighted_inner(a, c, w), ShapeError);
}

TEST_CASE("cutoff projection: definition, idempotence, lattice rule") {
  const TimeGrid g = make_grid(0.0, 1.0, 3);
  const CausalOperator p1 = cutoff_projection(g, 1, 1.0);
  const Matrix m = p1.materialize();
  CHECK(m(0, 0) == Complex(1.0));
  CHECK(m(1, 1) == Complex(1.0));
  CHECK(m(2, 2) == Complex(0.0));

  // a before the window: zero operator; a at/after the last time: identity.
  CHECK(cutoff_projection(g, 1, -0.5).materialize().isZero(0.0));
  CHECK(cutoff_projection(g, 1, 2.0).materialize().isIdentity(0.0));

  // P_a^2 = P_a and P_a P_b = P_min(a,b), exact and entrywise.
  const CausalOperator p0 = cutoff_projection(g, 1, 0.0);
  CHECK((p1 * p1).materialize() == p1.materialize());
  CHECK((p1 * p0).materialize() == p0.materialize());
  CHECK((p0 * p1).materialize() == p0.materialize());
}

TEST_CASE("cutoff projection is self-adjoint for every weight") {
  std::mt19937_64 rng(7);
  const TimeGrid g = make_grid(-1.0, 0.5, 9);
  for (double nu : {0.0, 0.5, 1.0, 4.0}) {
    const Weight w(g, nu);
    const CausalOperator p = cutoff_projection(g, 2, 0.75);
    const Trajectory u = random_trajectory(rng, g, 2);
    const Trajectory v = random_trajectory(rng, g, 2);
    const Complex lhs = weighted_inner(p.apply(u), v, w);
    const Complex rhs = weighted_inner(u, p.apply(v), w);
    CHECK(std::abs(lhs - rhs) == 0.0);
  }
}

TEST_CASE("time shift: identity, window semantics, degenerate error") {
  const TimeGrid g = make_grid(0.0, 1.0, 3);
  CHECK(time_shift(g, 1, 0).materialize().isIdentity(0.0));

  Matrix vals(1, 3);
  vals << 1.0, 2.0, 3.0;
  const Trajectory u(g, vals);
  const Trajectory shifted = time_shift(g, 1, 1).apply(u);
  CHECK(shifted.values()(0, 0) == Complex(2.0));
  CHECK(shifted.values()(0, 1) == Complex(3.0));
  CHECK(shifted.values()(0, 2) == Complex(0.0));

  CHECK_THROWS_AS(time_shift(g, 1, 3), ParameterError);
  CHECK_THROWS_AS(time_shift(g, 1, -5), ParameterError);
}

TEST_CASE("shift-weight identity on in-window support") {
  // Derived by direct summation: ||tau_{mh} u||^2 = e^{2 nu m h} ||u||^2
  // whenever the shifted support stays inside the window.
  const TimeGrid g = make_grid(0.0, 1.0, 8);
  const Weight w(g, 0.3);
  Matrix vals = Matrix::Zero(1, 8);
  vals(0, 2) = Complex(1.3, -0.2);
  vals(0, 3) = Complex(-0.4, 0.9);
  const Trajectory u(g, vals);
  const Trajectory tu = time_shift(g, 1, 1).apply(u);
  const double ratio = std::pow(weighted_norm(tu, w) / weighted_norm(u, w), 2);
  CHECK(ratio == doctest::Approx(std::exp(0.6)).epsilon(1e-12));

  // Backward shift picks up the reciprocal factor.
  const Trajectory bu = time_shift(g, 1, -2).apply(u);
  const double back = std::pow(weighted_norm(bu, w) / weighted_norm(u, w), 2);
  CHECK(back == doctest::Approx(std::exp(-2.0 * 0.3 * 2.0)).epsilon(1e-12));
}

TEST_CASE("trajectories reject non-finite entries") {
  const TimeGrid g = make_grid(0.0, 1.0, 2);
  Matrix bad(1, 2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Trajectory(g, bad), NumericError);
}
