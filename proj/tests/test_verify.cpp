#include <doctest.h>

#include <cmath>

#include "evolv/profile.hpp"
#include "evolv/verify.hpp"

using namespace evolv;

namespace {

MaterialLaw ramp_law(const TimeGrid& g, Index d) {
  return nonautonomous_law(
      g, [d](double t) { return (Matrix::Identity(d, d) * Complex(1.0 + 0.5 * t, 0.0)).eval(); },
      MatrixFunction([d](double) { return (0.5 * Matrix::Identity(d, d)).eval(); }),
      [d](double) { return Matrix::Zero(d, d); }, d);
}

}  // namespace

TEST_CASE("observed order: exact slopes and the all-zero convention") {
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  std::vector<double> first, second, zero;
  for (double h : hs) {
    first.push_back(3.0 * h);
    second.push_back(0.7 * h * h);
    zero.push_back(0.0);
  }
  CHECK(observed_order(hs, first) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(observed_order(hs, second) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isinf(observed_order(hs, zero)));

  CHECK_THROWS_AS(make_convergence_report({0.1, 0.2}, {1.0, 2.0}, 0.9), ParameterError);
}

TEST_CASE("commutator identity is exact algebra for autonomous and nonautonomous laws") {
  const TimeGrid g = make_grid(0.0, 0.5, 16);
  const Weight w(g, 1.0);

  std::vector<Matrix> kernel;
  for (Index m = 0; m < g.n(); ++m) {
    kernel.push_back(std::exp(-0.5 * static_cast<double>(m) * g.h()) * g.h() *
                     Matrix::Identity(1, 1));
  }
  kernel[0] += Matrix::Identity(1, 1);
  const MaterialLaw autonomous = autonomous_law(g, kernel, {Matrix::Zero(1, 1)}, 0.2);
  CHECK(verify_commutator_identity(autonomous, 0.3, w) < 1e-12);

  const MaterialLaw ramp = ramp_law(g, 1);
  for (double eps : {0.01, 0.1, 0.3, 1.0}) {
    CHECK(verify_commutator_identity(ramp, eps, w) < 1e-12);
  }

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const EvolutionaryProblem p = random_problem(seed, 16, 2, ProblemKind::maria);
    CHECK(verify_commutator_identity(p.law, 0.3, p.weight) < 1e-12);
  }
}

TEST_CASE("adjoint formula converges at first order in h") {
  const ConvergenceReport report =
      verify_adjoint_formula(0.5, 0.0, 8.0, {0.1, 0.05, 0.025, 0.0125});
  CHECK(report.pass);
  CHECK(report.observed_order >= 0.9);
  CHECK(report.observed_order <= 1.2);
}

TEST_CASE("causality harness: positive and negative controls") {
  const EvolutionaryProblem p = random_problem(33, 32, 2, ProblemKind::maria);
  const double a = p.grid.time(p.grid.n() / 2);

  const CausalityResult good = verify_causality(p, a, 7);
  CHECK(good.pass);

  // Cutoff before all support: both solutions vanish there.
  const CausalityResult early = verify_causality(p, p.grid.t0() - 1.0, 7);
  CHECK(early.pass);
  CHECK(early.measured == 0.0);

  const CausalityResult bad = verify_causality(p, a, 7, /*anticausal_inject=*/true);
  CHECK_FALSE(bad.pass);
  CHECK(bad.measured > bad.threshold);
}

TEST_CASE("nu independence of the solution operator") {
  const EvolutionaryProblem p = random_problem(44, 24, 2, ProblemKind::tdide);
  CHECK(verify_nu_independence(p, {1.0, 2.0, 4.0}) <= 1e-12);
}

TEST_CASE("yosida convergence: smooth profiles pass, rough profiles degrade") {
  const TimeGrid g = make_grid(0.0, 1.0 / 64.0, 512);
  const Weight w(g, 1.0);
  const std::vector<double> epss{0.2, 0.1, 0.05, 0.025, 0.0125};

  CHECK(verify_yosida_convergence(Trajectory::zero(g, 1), w, epss).errors ==
        std::vector<double>(5, 0.0));

  const ConvergenceReport smooth = verify_yosida_convergence(standard_bump(g, 1), w, epss);
  CHECK(smooth.pass);

  // Step-function data: observed order drops below the smooth threshold.
  Matrix step = Matrix::Zero(1, g.n());
  for (Index k = g.n() / 2; k < g.n(); ++k) step(0, k) = 1.0;
  const ConvergenceReport rough = verify_yosida_convergence(Trajectory(g, step), w, epss);
  CHECK(rough.observed_order < 0.9);
}

TEST_CASE("spectral symbol check converges at first order") {
  const ConvergenceReport report =
      verify_spectral_representation(1.0, 0.0, 8.0, {0.1, 0.05, 0.025, 0.0125});
  CHECK(report.pass);
  CHECK(report.observed_order >= 0.9);
}

TEST_CASE("random problems are deterministic and certified by construction") {
  const EvolutionaryProblem a = random_problem(123, 20, 3, ProblemKind::maria);
  const EvolutionaryProblem b = random_problem(123, 20, 3, ProblemKind::maria);
  CHECK((a.source.values() - b.source.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.spatial - b.spatial).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.weight.nu() == b.weight.nu());

  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const EvolutionaryProblem p = random_problem(seed, 16, 2, ProblemKind::maria);
    CHECK(monotonicity_check(p.spatial).is_monotone);
    REQUIRE(p.law.has_pointwise_data());
    CHECK(pointwise_condition_maria(p.law.M0_samples, p.law.M0dot_samples, p.law.M1_samples,
                                    p.weight.nu()) > 0.0);
    CHECK(certify_problem(p).certified());
  }

  for (std::uint64_t seed = 200; seed < 215; ++seed) {
    const EvolutionaryProblem p = random_problem(seed, 12, 3, ProblemKind::tdide);
    const SolveReport report = solve(p);
    CHECK(report.certificate.certified());
    CHECK(report.residual_rel < 1e-10);
  }
}
