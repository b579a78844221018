#include "evolv/verify.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include "evolv/profile.hpp"

namespace evolv {

namespace {

constexpr double kTiny = 1e-300;

/// Deterministic uniform in [0, 1) from the raw generator stream.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double usym(std::mt19937_64& rng) { return 2.0 * u01(rng) - 1.0; }

Complex crand(std::mt19937_64& rng) { return Complex(usym(rng), usym(rng)); }

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = crand(rng);
  }
  return m;
}

Matrix random_psd(std::mt19937_64& rng, Index d) {
  const Matrix r = random_matrix(rng, d, d);
  Matrix p = r * r.adjoint();
  const double scale = p.norm();
  if (scale > 0.0) p /= scale;
  return p;
}

Matrix random_skew(std::mt19937_64& rng, Index d) {
  const Matrix r = random_matrix(rng, d, d);
  Matrix s = 0.5 * (r - r.adjoint().eval());
  const double scale = s.norm();
  if (scale > 0.0) s /= scale;
  return s;
}

Trajectory random_source(std::mt19937_64& rng, const TimeGrid& grid, Index d) {
  Matrix f(d, grid.n());
  for (Index k = 0; k < grid.n(); ++k) {
    for (Index i = 0; i < d; ++i) f(i, k) = crand(rng);
  }
  return Trajectory(grid, std::move(f));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

MaterialLaw random_maria_law(std::mt19937_64& rng, const TimeGrid& grid, Index d,
                             const std::string& label) {
  const double c0 = 0.75 + 0.75 * u01(rng);
  const double amp = 0.05 + 0.25 * u01(rng);
  const double omega = 0.3 + 0.7 * u01(rng);
  const double phase = 2.0 * std::numbers::pi * u01(rng);
  const Matrix s = random_psd(rng, d);
  Matrix m1 = random_matrix(rng, d, d);
  if (m1.norm() > 0.0) m1 *= 0.2 / m1.norm();

  const Matrix id = Matrix::Identity(d, d);
  MatrixFunction m0_fn = [=](double t) -> Matrix {
    return c0 * id + amp * (2.0 + std::sin(omega * t + phase)) * s;
  };
  MatrixFunction m0dot_fn = [=](double t) -> Matrix {
    return amp * omega * std::cos(omega * t + phase) * s;
  };
  MatrixFunction m1_fn = [=](double) -> Matrix { return m1; };
  return nonautonomous_law(grid, m0_fn, m0dot_fn, m1_fn, d, 0.5, label);
}

MaterialLaw random_autonomous_law(std::mt19937_64& rng, const TimeGrid& grid, Index d,
                                  const std::string& label) {
  const double c0 = 0.75 + 0.75 * u01(rng);
  const double amp = 0.5 * u01(rng);
  const double beta = 0.5 + 1.5 * u01(rng);
  const double n0 = 0.1 + 0.4 * u01(rng);
  const Matrix p = random_psd(rng, d);
  std::vector<Matrix> m_kernel(static_cast<std::size_t>(grid.n()));
  // Kernel of c0 + amp * conv(e^{-beta t}) P: positive real part of the
  // symbol for every nu > 0, hence certified by construction.
  m_kernel[0] = c0 * Matrix::Identity(d, d) + amp * grid.h() * p;
  for (Index m = 1; m < grid.n(); ++m) {
    m_kernel[static_cast<std::size_t>(m)] =
        amp * grid.h() * std::exp(-beta * static_cast<double>(m) * grid.h()) * p;
  }
  std::vector<Matrix> n_kernel{n0 * Matrix::Identity(d, d)};
  return autonomous_law(grid, std::move(m_kernel), std::move(n_kernel), 0.5, label);
}

}  // namespace

double observed_order(const std::vector<double>& params, const std::vector<double>& errors) {
  if (params.size() != errors.size() || params.size() < 2) {
    throw ParameterError("order estimate needs matched sequences of length >= 2");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (errors[i] > kTiny) {
      x.push_back(std::log(params[i]));
      y.push_back(std::log(errors[i]));
    }
  }
  if (x.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

ConvergenceReport make_convergence_report(std::vector<double> params,
                                          std::vector<double> errors, double threshold) {
  if (params.size() < 3 || params.size() != errors.size()) {
    throw ParameterError("convergence report needs matched sequences of length >= 3");
  }
  ConvergenceReport r;
  r.params = std::move(params);
  r.errors = std::move(errors);
  r.threshold = threshold;
  r.observed_order = observed_order(r.params, r.errors);
  r.pass = r.observed_order >= threshold;
  return r;
}

double verify_commutator_identity(const MaterialLaw& law, double eps, const Weight& w) {
  if (eps <= 0.0) throw ParameterError("commutator identity probe needs eps > 0");
  const TimeGrid& g = law.grid();
  const Index d = law.dim();
  const CausalOperator dop = time_derivative(g, d);
  const CausalOperator y = yosida(g, d, eps);
  const CausalOperator dm = dop * law.M_op;

  const CausalOperator lhs = commutator(y, dm);
  const CausalOperator m_disc = law.M_op * dop - dop * law.M_op;
  const CausalOperator rhs = (Complex(eps) * (dop * y)) * m_disc * y;
  return operator_norm_weighted(lhs - rhs, w);
}

ConvergenceReport verify_adjoint_formula(double nu, double t0, double t1,
                                         const std::vector<double>& hs) {
  std::vector<double> errors;
  for (double h : hs) {
    const Index n = static_cast<Index>(std::llround((t1 - t0) / h)) + 1;
    const TimeGrid g(t0, h, n);
    const Weight w(g, nu);
    const Trajectory phi = standard_bump(g, 1);
    const CausalOperator d = time_derivative(g, 1);
    const CausalOperator lhs = weighted_adjoint(d, w);
    const CausalOperator rhs =
        d.scaled(Complex(-1.0)) + CausalOperator::spatial_constant(g, 2.0 * nu * Matrix::Identity(1, 1));
    const double denom = weighted_norm(phi, w);
    errors.push_back(weighted_norm((lhs - rhs).apply(phi), w) / denom);
  }
  return make_convergence_report(hs, std::move(errors), 0.9);
}

CausalityResult verify_causality(const EvolutionaryProblem& p, double a, std::uint64_t seed,
                                 bool anticausal_inject) {
  std::mt19937_64 rng(seed);
  const double scale = std::max(1.0, p.source.max_abs());
  Trajectory perturbed = p.source;
  for (Index k = 0; k < p.grid.n(); ++k) {
    if (p.grid.time(k) > a) {
      for (Index i = 0; i < p.dim(); ++i) {
        perturbed.values()(i, k) += scale * crand(rng);
      }
    }
  }

  SolveOptions opts;
  opts.compute_certificate = false;

  Trajectory u_base = Trajectory::zero(p.grid, p.dim());
  Trajectory u_pert = Trajectory::zero(p.grid, p.dim());
  if (!anticausal_inject) {
    u_base = solve(p, opts).u;
    EvolutionaryProblem q(p.grid, p.weight.nu(), p.law, p.spatial, perturbed, p.label);
    u_pert = solve(q, opts).u;
  } else {
    // Negative control: replace B by its weighted adjoint (anticausal) and
    // solve densely; the prefix then depends on the tail.
    const CausalOperator b = weighted_adjoint(assemble(p), p.weight);
    const Matrix m = b.materialize();
    Eigen::PartialPivLU<Matrix> lu(m);
    auto dense_solve = [&](const Trajectory& f) {
      Eigen::VectorXcd rhs(p.grid.n() * p.dim());
      for (Index k = 0; k < p.grid.n(); ++k) {
        rhs.segment(k * p.dim(), p.dim()) = f.values().col(k);
      }
      const Eigen::VectorXcd x = lu.solve(rhs);
      Matrix u(p.dim(), p.grid.n());
      for (Index k = 0; k < p.grid.n(); ++k) u.col(k) = x.segment(k * p.dim(), p.dim());
      return Trajectory(p.grid, std::move(u));
    };
    u_base = dense_solve(p.source);
    u_pert = dense_solve(perturbed);
  }

  CausalityResult result;
  result.threshold = 1e-12 * weighted_norm(u_base, p.weight);
  double worst = 0.0;
  for (Index k = 0; k < p.grid.n(); ++k) {
    if (p.grid.time(k) <= a) {
      worst = std::max(worst,
                       (u_base.values().col(k) - u_pert.values().col(k)).cwiseAbs().maxCoeff());
    }
  }
  result.measured = worst;
  result.pass = worst <= result.threshold;
  return result;
}

double verify_nu_independence(const EvolutionaryProblem& p, const std::vector<double>& nus) {
  SolveOptions opts;
  opts.compute_certificate = false;
  const std::vector<SolveReport> reports = nu_sweep(p, nus, opts);
  double ref = std::max(reports.front().u.max_abs(), kTiny);
  double worst = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      worst = std::max(worst, max_abs_diff(reports[i].u.values(), reports[j].u.values()));
    }
  }
  return worst / ref;
}

ConvergenceReport verify_yosida_convergence(const Trajectory& u, const Weight& w,
                                            const std::vector<double>& epss) {
  const double denom = std::max(weighted_norm(u, w), kTiny);
  std::vector<double> errors;
  for (double eps : epss) {
    const Trajectory v = yosida(u.grid(), u.dim(), eps).apply(u);
    errors.push_back(weighted_norm(v - u, w) / denom);
  }
  return make_convergence_report(epss, std::move(errors), 0.9);
}

ConvergenceReport verify_regularized_solve_convergence(const EvolutionaryProblem& p,
                                                       const std::vector<double>& epss) {
  SolveOptions opts;
  opts.compute_certificate = false;
  const Trajectory base = solve(p, opts).u;
  const double denom = std::max(weighted_norm(base, p.weight), kTiny);
  std::vector<double> errors;
  for (double eps : epss) {
    const Trajectory v = yosida(p.grid, p.dim(), eps).apply(base);
    errors.push_back(weighted_norm(v - base, p.weight) / denom);
  }
  return make_convergence_report(epss, std::move(errors), 0.9);
}

ConvergenceReport verify_spectral_representation(double nu, double t0, double t1,
                                                 const std::vector<double>& hs) {
  // The comparison band is the lowest tenth of the coarsest grid's frequency
  // range and is held fixed across the sweep, so the same physical modes are
  // compared as h decreases.
  const double h_max = *std::max_element(hs.begin(), hs.end());
  const double xi_cut = 0.1 * std::numbers::pi / h_max;

  std::vector<double> errors;
  for (double h : hs) {
    const Index n = static_cast<Index>(std::llround((t1 - t0) / h)) + 1;
    const TimeGrid g(t0, h, n);
    const Weight w(g, nu);
    const Trajectory u = standard_bump(g, 1);
    const Trajectory du = time_derivative(g, 1).apply(u);
    const SpectralDiagnostic su = fourier_laplace(u, w);
    const SpectralDiagnostic sdu = fourier_laplace(du, w);

    double num = 0.0, den = 0.0;
    Index kept = 0;
    for (Index j = 0; j < n; ++j) {
      const double xi = su.frequencies[static_cast<std::size_t>(j)];
      if (std::abs(xi) > xi_cut) continue;
      const Complex symbol(nu, xi);
      const Vector expected = symbol * su.values.col(j);
      num += (sdu.values.col(j) - expected).squaredNorm();
      den += expected.squaredNorm();
      ++kept;
    }
    if (kept < 3) throw ParameterError("spectral band too narrow for this window");
    errors.push_back(std::sqrt(num / std::max(den, kTiny)));
  }
  return make_convergence_report(hs, std::move(errors), 0.9);
}

EvolutionaryProblem random_problem(std::uint64_t seed, Index n, Index d, ProblemKind kind) {
  if (n < 2 || d < 1) throw ParameterError("random problem needs n >= 2 and d >= 1");
  std::mt19937_64 rng(seed);
  // Fixed step at desk scale; beyond n = 256 the window is pinned instead so
  // that the weights stay representable.
  const double h = n <= 256 ? 1.0 / 16.0 : 16.0 / static_cast<double>(n);
  const TimeGrid grid(0.0, h, n);
  const double nu = 1.0 + u01(rng);

  std::string label;
  MaterialLaw law = [&]() -> MaterialLaw {
    switch (kind) {
      case ProblemKind::maria:
        label = "corpus/maria/" + std::to_string(seed);
        return random_maria_law(rng, grid, d, label);
      case ProblemKind::autonomous:
        label = "corpus/autonomous/" + std::to_string(seed);
        return random_autonomous_law(rng, grid, d, label);
      case ProblemKind::tdide: {
        if (d < 2) throw ParameterError("tdide problems need d >= 2");
        label = "corpus/tdide/" + std::to_string(seed);
        MaterialLaw memory = random_autonomous_law(rng, grid, 1, label + "/mem");
        MaterialLaw varying = random_maria_law(rng, grid, d - 1, label + "/time");
        return block_direct_sum(memory, varying);
      }
    }
    throw ParameterError("unknown problem kind");
  }();

  const Matrix a =
      (0.3 + 0.7 * u01(rng)) * random_skew(rng, d) + (0.3 * u01(rng)) * random_psd(rng, d);
  Trajectory f = random_source(rng, grid, d);
  return EvolutionaryProblem(grid, nu, std::move(law), a, std::move(f), label);
}

}  // namespace evolv
