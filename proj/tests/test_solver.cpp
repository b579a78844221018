#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>

#include "evolv/profile.hpp"
#include "evolv/scenario.hpp"
#include "evolv/solver.hpp"
#include "evolv/verify.hpp"

using namespace evolv;

namespace {

MaterialLaw identity_law(const TimeGrid& g, Index d, double n_shift = 0.0) {
  std::vector<Matrix> m{Matrix::Identity(d, d)};
  std::vector<Matrix> n{n_shift * Matrix::Identity(d, d)};
  return autonomous_law(g, std::move(m), std::move(n), 0.0, "identity");
}

double rel_diff(const Trajectory& a, const Trajectory& b) {
  const double denom = std::max(b.max_abs(), 1e-300);
  return (a - b).max_abs() / denom;
}

}  // namespace

TEST_CASE("assemble: law identity gives D, shifted law gives D + a Id") {
  const TimeGrid g = make_grid(0.0, 0.5, 6);
  const EvolutionaryProblem pure(g, 1.0, identity_law(g, 1), Matrix::Zero(1, 1),
                                 Trajectory::zero(g, 1), "pure");
  CHECK((assemble(pure).materialize() - time_derivative(g, 1).materialize()).isZero(0.0));

  const EvolutionaryProblem shifted(g, 1.0, identity_law(g, 1),
                                    0.7 * Matrix::Identity(1, 1), Trajectory::zero(g, 1));
  const Matrix expected =
      time_derivative(g, 1).materialize() + 0.7 * Matrix::Identity(6, 6);
  CHECK((assemble(shifted).materialize() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("assembled operator matches the dense sum for a block law with skew A") {
  const EvolutionaryProblem p = random_problem(77, 12, 3, ProblemKind::tdide);
  const Matrix lhs = assemble(p).materialize();
  const Matrix rhs = (time_derivative(p.grid, 3) * p.law.M_op).materialize() +
                     p.law.N_op.materialize() +
                     CausalOperator::spatial_constant(p.grid, p.spatial).materialize();
  const double rel = (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
  CHECK(rel < 1e-13);
  CHECK(is_causal_structure(assemble(p), 0.0).causal);
}

TEST_CASE("solve: impulse response of the pure derivative is the constant h") {
  const TimeGrid g = make_grid(0.0, 0.25, 8);
  Matrix f = Matrix::Zero(1, 8);
  f(0, 0) = 1.0;
  const EvolutionaryProblem p(g, 1.0, identity_law(g, 1), Matrix::Zero(1, 1),
                              Trajectory(g, f), "impulse");
  const SolveReport report = solve(p);
  for (Index k = 0; k < 8; ++k) {
    CHECK(std::abs(report.u.values()(0, k) - Complex(0.25)) < 1e-14);
  }
  CHECK(report.residual_rel < 1e-12);
  CHECK(report.causality_ok);
  CHECK(report.certificate.certified());
}

TEST_CASE("solve: implicit-Euler recursion for u' + nu0 u = 1") {
  const double nu0 = 2.0;
  const TimeGrid g = make_grid(0.0, 0.125, 48);
  const EvolutionaryProblem p(g, 1.0, identity_law(g, 1, nu0), Matrix::Zero(1, 1),
                              Trajectory(g, Matrix::Ones(1, 48)), "relaxation");
  const SolveReport report = solve(p);

  // Hand recursion u_k = (u_{k-1} + h) / (1 + h nu0).
  Complex u_prev(0.0);
  for (Index k = 0; k < g.n(); ++k) {
    const Complex expected = (u_prev + g.h()) / (1.0 + g.h() * nu0);
    CHECK(std::abs(report.u.values()(0, k) - expected) < 1e-13);
    u_prev = expected;
  }
  // Steady state approaches 1/nu0.
  CHECK(report.u.values()(0, g.n() - 1).real() == doctest::Approx(1.0 / nu0).epsilon(1e-2));
}

TEST_CASE("certified corpus honors the residual and norm bound contracts") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const ProblemKind kind = seed % 3 == 0   ? ProblemKind::autonomous
                             : seed % 3 == 1 ? ProblemKind::maria
                                             : ProblemKind::tdide;
    const EvolutionaryProblem p = random_problem(seed, 24, 3, kind);
    const SolveReport report = solve(p);
    CHECK(report.certificate.certified());
    CHECK(report.residual_rel <= 1e-10);
    CHECK(report.norm_bound_ok());
    CHECK(report.causality_ok);
  }
}

TEST_CASE("forward substitution matches the dense oracle") {
  for (std::uint64_t seed = 31; seed < 51; ++seed) {
    const ProblemKind kind = seed % 2 == 0 ? ProblemKind::maria : ProblemKind::autonomous;
    const Index n = 16 + static_cast<Index>(seed % 5) * 8;
    const EvolutionaryProblem p = random_problem(seed, n, 3, kind);
    REQUIRE(p.grid.n() * p.dim() <= 400);
    SolveOptions opts;
    opts.compute_certificate = false;
    const SolveReport structured = solve(p, opts);
    const Trajectory dense = solve_dense_oracle(p);
    CHECK(rel_diff(structured.u, dense) < 1e-10);
  }
}

TEST_CASE("dense oracle refuses problems beyond its cap") {
  const EvolutionaryProblem p = random_problem(5, 128, 4, ProblemKind::maria);
  CHECK_THROWS_AS(solve_dense_oracle(p, 400), CapExceededError);
}

TEST_CASE("degenerate diagonal blocks raise a named step error") {
  // M0 = diag(1, 0) with A = 0: the second component is algebraic with no
  // constraint, so every step block is singular.
  const TimeGrid g = make_grid(0.0, 0.25, 6);
  const MaterialLaw law = nonautonomous_law(
      g, [](double) { return (Matrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished(); },
      MatrixFunction([](double) { return Matrix::Zero(2, 2); }),
      [](double) { return Matrix::Zero(2, 2); }, 2);
  const EvolutionaryProblem p(g, 1.0, law, Matrix::Zero(2, 2), Trajectory::zero(g, 2));
  CHECK_THROWS_AS(solve(p), DegenerateStepError);
  try {
    solve(p);
  } catch (const DegenerateStepError& e) {
    CHECK(e.step() == 0);
  }
}

TEST_CASE("solve_regularized: eps = 0 is the plain solve, drift is O(eps) on smooth data") {
  const EvolutionaryProblem rough = random_problem(9, 32, 2, ProblemKind::maria);
  SolveOptions opts;
  opts.compute_certificate = false;
  const Trajectory base = solve(rough, opts).u;
  CHECK(rel_diff(solve_regularized(rough, 0.0), base) == 0.0);

  // First-order drift needs smooth data; feed the standard profile.
  const EvolutionaryProblem smooth(rough.grid, rough.weight.nu(), rough.law, rough.spatial,
                                   standard_bump(rough.grid, rough.dim()), "smooth");
  const ConvergenceReport drift =
      verify_regularized_solve_convergence(smooth, {0.05, 0.025, 0.0125, 0.00625, 0.003125});
  CHECK(drift.pass);
}

TEST_CASE("nu sweep: coincident solutions, per-weight certificates, refusal below min_nu") {
  const EvolutionaryProblem p = random_problem(13, 24, 2, ProblemKind::maria);
  const std::vector<SolveReport> reports = nu_sweep(p, {1.0, 2.0, 4.0});
  REQUIRE(reports.size() == 3);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    CHECK(rel_diff(reports[i].u, reports[0].u) <= 1e-12);
  }
  CHECK(reports[0].certificate.nu == 1.0);
  CHECK(reports[2].certificate.nu == 4.0);
  // Certificates grow with nu for this construction.
  CHECK(reports[2].certificate.c > reports[0].certificate.c);

  CHECK_THROWS_AS(nu_sweep(p, {0.1}), ParameterError);

  const std::vector<SolveReport> single = nu_sweep(p, {p.weight.nu()});
  CHECK(rel_diff(single[0].u, solve(p).u) == 0.0);
}

TEST_CASE("zero source gives the zero solution") {
  const Scenario s = named_example("heat1d");
  EvolutionaryProblem p = s.build_problem(1.0, ".");
  EvolutionaryProblem zero(p.grid, 1.0, p.law, p.spatial, Trajectory::zero(p.grid, p.dim()));
  SolveOptions opts;
  opts.compute_certificate = false;
  const SolveReport r = solve(zero, opts);
  CHECK(r.u.max_abs() == 0.0);
  CHECK(r.residual_rel == 0.0);
}

TEST_CASE("the dense inverse of a causal operator is block lower triangular") {
  const EvolutionaryProblem p = random_problem(55, 16, 2, ProblemKind::tdide);
  const CausalOperator b = assemble(p);
  const Matrix dense = b.materialize();
  const Matrix inverse = dense.partialPivLu().inverse();
  const Index d = p.dim();
  double worst = 0.0;
  for (Index k = 0; k < p.grid.n(); ++k) {
    for (Index j = k + 1; j < p.grid.n(); ++j) {
      worst = std::max(worst, inverse.block(k * d, j * d, d, d).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst <= 1e-12 * inverse.cwiseAbs().maxCoeff());
}

TEST_CASE("solution map is causal: coincident sources give coincident prefixes") {
  const EvolutionaryProblem p = random_problem(21, 40, 2, ProblemKind::tdide);
  const double a = p.grid.time(p.grid.n() / 2);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const CausalityResult r = verify_causality(p, a, seed);
    CHECK(r.pass);
    CHECK(r.measured == 0.0);  // forward substitution never looks ahead
  }
}

TEST_CASE("wallclock scaling: quadratic for Toeplitz memory, linear for memory-free") {
  auto time_solve = [](const EvolutionaryProblem& p) {
    SolveOptions opts;
    opts.compute_certificate = false;
    opts.causality_check_cap = 0;  // time the substitution only
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)solve(p, opts);
      best = std::min(best,
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };

  // Full-kernel Toeplitz law: O(n^2 d^2).
  const double toeplitz_small = time_solve(random_problem(3, 1024, 2, ProblemKind::autonomous));
  const double toeplitz_big = time_solve(random_problem(3, 2048, 2, ProblemKind::autonomous));
  CHECK(toeplitz_big / toeplitz_small <= 4.5);

  // Memory-free multiplication law: O(n d^3).
  const double mult_small = time_solve(random_problem(4, 8192, 2, ProblemKind::maria));
  const double mult_big = time_solve(random_problem(4, 16384, 2, ProblemKind::maria));
  CHECK(mult_big / mult_small <= 2.5);
}
