#include "evolv/material.hpp"

#include <cmath>
#include <utility>

#include "evolv/profile.hpp"

namespace evolv {

namespace {

Matrix embed_left(Index total, Index offset, Index dim) {
  Matrix e = Matrix::Zero(total, dim);
  e.block(offset, 0, dim, dim) = Matrix::Identity(dim, dim);
  return e;
}

double matrix_norm(const Matrix& m) { return m.norm(); }

/// Sampled derivative of M0 on the grid: central differences inside,
/// one-sided order-2 stencils at the window edges.
std::vector<Matrix> finite_difference_samples(const std::vector<Matrix>& m0, double h) {
  const std::size_t n = m0.size();
  std::vector<Matrix> d(n);
  d[0] = (-3.0 * m0[0] + 4.0 * m0[1] - m0[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    d[k] = (m0[k + 1] - m0[k - 1]) / (2.0 * h);
  }
  d[n - 1] = (3.0 * m0[n - 1] - 4.0 * m0[n - 2] + m0[n - 3]) / (2.0 * h);
  return d;
}

void finish_validation(MaterialLaw& law, double lipschitz_estimate) {
  const TimeGrid& g = law.grid();
  law.construction_residual = commutator_residual(law, g);
  double profile_ratio = 1.0;
  if (law.dim() > 0) {
    const Trajectory phi = standard_bump(g, law.dim());
    const Weight w0(g, 0.0);
    const double denom = weighted_norm(phi, w0);
    if (denom > 0.0) {
      profile_ratio = weighted_norm(time_derivative(g, law.dim()).apply(phi), w0) / denom;
    }
  }
  law.residual_tolerance =
      std::max(1e-12, 10.0 * g.h() * lipschitz_estimate * std::max(1.0, profile_ratio));
  law.commutator_ok = law.construction_residual <= law.residual_tolerance;
}

}  // namespace

MaterialLaw MaterialLaw::with_commutator(CausalOperator c) const {
  if (c.grid() != grid() || c.dim_in() != dim() || c.dim_out() != dim()) {
    throw ShapeError("replacement commutator has wrong shape");
  }
  MaterialLaw out = *this;
  out.commutator_op = std::move(c);
  out.construction_residual = commutator_residual(out, out.grid());
  out.commutator_ok = out.construction_residual <= out.residual_tolerance;
  return out;
}

MaterialLaw autonomous_law(const TimeGrid& grid, std::vector<Matrix> m_kernel,
                           std::vector<Matrix> n_kernel, double min_nu, std::string label) {
  CausalOperator m = causal_kernel_operator(grid, std::move(m_kernel));
  CausalOperator n = causal_kernel_operator(grid, std::move(n_kernel));
  if (m.dim_in() != m.dim_out() || n.dim_in() != n.dim_out() || m.dim_in() != n.dim_in()) {
    throw ShapeError("autonomous law kernels must be square and of equal dimension");
  }
  MaterialLaw law{m, n, CausalOperator::zero(grid, m.dim_out(), m.dim_in()),
                  MaterialLaw::Kind::autonomous, min_nu, std::move(label)};
  finish_validation(law, 0.0);
  return law;
}

MaterialLaw nonautonomous_law(const TimeGrid& grid, const MatrixFunction& m0,
                              const std::optional<MatrixFunction>& m0dot,
                              const MatrixFunction& m1, Index dim, double min_nu,
                              std::string label) {
  std::vector<Matrix> m0_s(static_cast<std::size_t>(grid.n()));
  std::vector<Matrix> m1_s(static_cast<std::size_t>(grid.n()));
  for (Index k = 0; k < grid.n(); ++k) {
    m0_s[static_cast<std::size_t>(k)] = m0(grid.time(k));
    m1_s[static_cast<std::size_t>(k)] = m1(grid.time(k));
    if (m0_s[static_cast<std::size_t>(k)].rows() != dim || m1_s[static_cast<std::size_t>(k)].rows() != dim) {
      throw ShapeError("material coefficient has wrong dimension");
    }
  }
  std::vector<Matrix> m0dot_s;
  if (m0dot) {
    m0dot_s.resize(static_cast<std::size_t>(grid.n()));
    for (Index k = 0; k < grid.n(); ++k) m0dot_s[static_cast<std::size_t>(k)] = (*m0dot)(grid.time(k));
  } else {
    m0dot_s = finite_difference_samples(m0_s, grid.h());
  }

  std::vector<Matrix> comm(static_cast<std::size_t>(grid.n()));
  double lip = 0.0;
  for (Index k = 0; k < grid.n(); ++k) {
    comm[static_cast<std::size_t>(k)] = -m0dot_s[static_cast<std::size_t>(k)];
    lip = std::max(lip, matrix_norm(m0dot_s[static_cast<std::size_t>(k)]));
  }

  MaterialLaw law{CausalOperator::multiplication(grid, m0_s),
                  CausalOperator::multiplication(grid, m1_s),
                  CausalOperator::multiplication(grid, std::move(comm)),
                  MaterialLaw::Kind::nonautonomous, min_nu, std::move(label)};
  law.m0dot_supplied = m0dot.has_value();
  law.M0_samples = std::move(m0_s);
  law.M0dot_samples = std::move(m0dot_s);
  law.M1_samples = std::move(m1_s);
  finish_validation(law, lip);
  return law;
}

MaterialLaw block_direct_sum(const MaterialLaw& a, const MaterialLaw& b) {
  if (a.grid() != b.grid()) throw ShapeError("block sum requires a common grid");
  if (a.dim() == 0) return b;
  if (b.dim() == 0) return a;

  const TimeGrid& g = a.grid();
  const Index d0 = a.dim(), d1 = b.dim(), d = d0 + d1;
  const CausalOperator e0 = CausalOperator::spatial_constant(g, embed_left(d, 0, d0));
  const CausalOperator e1 = CausalOperator::spatial_constant(g, embed_left(d, d0, d1));
  const CausalOperator r0 = CausalOperator::spatial_constant(g, embed_left(d, 0, d0).transpose());
  const CausalOperator r1 = CausalOperator::spatial_constant(g, embed_left(d, d0, d1).transpose());

  auto lift = [&](const CausalOperator& top, const CausalOperator& bottom) {
    return e0 * top * r0 + e1 * bottom * r1;
  };

  MaterialLaw law{lift(a.M_op, b.M_op), lift(a.N_op, b.N_op),
                  lift(a.commutator_op, b.commutator_op), MaterialLaw::Kind::block,
                  std::max(a.min_nu, b.min_nu), a.label + "+" + b.label};
  law.m0dot_supplied = a.m0dot_supplied && b.m0dot_supplied;
  if (a.has_pointwise_data() && b.has_pointwise_data()) {
    const std::size_t n = static_cast<std::size_t>(g.n());
    law.M0_samples.resize(n);
    law.M0dot_samples.resize(n);
    law.M1_samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto block_diag = [&](const Matrix& top, const Matrix& bottom) {
        Matrix m = Matrix::Zero(d, d);
        m.topLeftCorner(d0, d0) = top;
        m.bottomRightCorner(d1, d1) = bottom;
        return m;
      };
      law.M0_samples[k] = block_diag(a.M0_samples[k], b.M0_samples[k]);
      law.M0dot_samples[k] = block_diag(a.M0dot_samples[k], b.M0dot_samples[k]);
      law.M1_samples[k] = block_diag(a.M1_samples[k], b.M1_samples[k]);
    }
  }
  law.residual_tolerance = std::max(a.residual_tolerance, b.residual_tolerance);
  law.construction_residual = commutator_residual(law, g);
  law.commutator_ok = law.construction_residual <= law.residual_tolerance;
  return law;
}

double commutator_residual(const MaterialLaw& law, const TimeGrid& grid) {
  if (grid != law.grid()) throw ShapeError("commutator residual asked on a foreign grid");
  if (law.dim() == 0) return 0.0;
  const CausalOperator d = time_derivative(grid, law.dim());
  const CausalOperator defect = law.M_op * d - d * law.M_op - law.commutator_op;
  const Trajectory phi = standard_bump(grid, law.dim());
  const Weight w0(grid, 0.0);
  const double denom = weighted_norm(phi, w0);
  if (denom == 0.0) return 0.0;
  return weighted_norm(defect.apply(phi), w0) / denom;
}

CommutatorProbeReport commutator_boundedness_probe(
    const std::function<MaterialLaw(const TimeGrid&)>& law_factory,
    const std::vector<TimeGrid>& grids, double nu) {
  if (grids.size() < 2) throw ParameterError("probe needs at least two grids");
  CommutatorProbeReport report;
  for (const TimeGrid& g : grids) {
    const MaterialLaw law = law_factory(g);
    const CausalOperator d = time_derivative(g, law.dim());
    const CausalOperator comm = commutator(law.M_op, d);
    const Weight w(g, nu);
    report.hs.push_back(g.h());
    report.norms.push_back(operator_norm_weighted(comm, w));
  }
  // Heuristic verdict: suspicious when the norm keeps growing by more than
  // 25% per refinement over the last half of the sweep.
  bool growing = report.norms.size() >= 3;
  for (std::size_t i = report.norms.size() / 2; growing && i + 1 < report.norms.size(); ++i) {
    growing = report.norms[i + 1] > 1.25 * report.norms[i];
  }
  report.bounded_suspected = !growing;
  report.verdict = report.bounded_suspected ? "commutator norms bounded over the sweep"
                                            : "unbounded commutator suspected";
  return report;
}

}  // namespace evolv
