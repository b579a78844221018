#include "evolv/wellposed.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace evolv {

namespace {

/// Herm(G^{1/2} B G^{-1/2}) for the pencil (Herm(G B), G).
Matrix hermitian_pencil(const CausalOperator& b, const Weight& w) {
  if (b.dim_in() != b.dim_out()) throw ShapeError("certificate requires a square operator");
  if (b.grid() != w.grid()) throw ShapeError("certificate weight grid mismatch");
  Matrix m = b.materialize();
  if (!m.allFinite()) throw NumericError("operator materialization is not finite");
  const Index n = w.grid().n();
  const Index d = b.dim_out();
  for (Index k = 0; k < n; ++k) m.middleRows(k * d, d) *= std::sqrt(w.w(k));
  for (Index j = 0; j < n; ++j) m.middleCols(j * d, d) /= std::sqrt(w.w(j));
  return 0.5 * (m + m.adjoint().eval());
}

double min_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("eigensolver failed");
  return eig.eigenvalues().minCoeff();
}

}  // namespace

double positivity_certificate(const CausalOperator& b, const Weight& w) {
  return min_eigenvalue(hermitian_pencil(b, w));
}

double adjoint_positivity_certificate(const CausalOperator& b, const Weight& w) {
  return min_eigenvalue(hermitian_pencil(weighted_adjoint(b, w), w));
}

std::vector<std::pair<double, double>> cutoff_positivity_check(
    const CausalOperator& b, const Weight& w, const std::vector<double>& cutoffs) {
  const CausalityCheck check = is_causal_structure(b, 1e-12);
  if (!check.causal) {
    throw StructuralError("cutoff positivity reduction needs a causal operator");
  }
  const Matrix h = hermitian_pencil(b, w);
  const TimeGrid& g = b.grid();
  const Index d = b.dim_out();
  std::vector<std::pair<double, double>> out;
  for (double a : cutoffs) {
    Index m = 0;
    while (m < g.n() && g.time(m) <= a) ++m;
    if (m == 0) continue;  // vacuous cutoff before the window
    out.emplace_back(a, min_eigenvalue(h.topLeftCorner(m * d, m * d)));
  }
  return out;
}

double pointwise_condition_maria(const std::vector<Matrix>& m0,
                                 const std::vector<Matrix>& m0dot,
                                 const std::vector<Matrix>& m1, double nu) {
  if (m0.size() != m0dot.size() || m0.size() != m1.size() || m0.empty()) {
    throw ShapeError("pointwise condition needs equally long sample sequences");
  }
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m0.size(); ++k) {
    const Matrix t = nu * m0[k] + 0.5 * m0dot[k] + 0.5 * (m1[k] + m1[k].adjoint().eval());
    c = std::min(c, min_eigenvalue(0.5 * (t + t.adjoint().eval())));
  }
  return c;
}

double pointwise_condition_maria(const MatrixFunction& m0, const MatrixFunction& m0dot,
                                 const MatrixFunction& m1, double nu, const TimeGrid& grid) {
  std::vector<Matrix> s0, s0dot, s1;
  s0.reserve(static_cast<std::size_t>(grid.n()));
  for (Index k = 0; k < grid.n(); ++k) {
    const double t = grid.time(k);
    s0.push_back(m0(t));
    s0dot.push_back(m0dot(t));
    s1.push_back(m1(t));
  }
  return pointwise_condition_maria(s0, s0dot, s1, nu);
}

MonotonicityReport monotonicity_check(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("monotonicity check needs a square matrix");
  MonotonicityReport report;
  report.margin = min_eigenvalue(0.5 * (a + a.adjoint().eval()));
  report.is_monotone = report.margin >= -1e-12 * std::max(1.0, a.norm());
  if (report.is_monotone) {
    const Matrix shifted = Matrix::Identity(a.rows(), a.cols()) + a;
    Eigen::FullPivLU<Matrix> lu(shifted);
    if (!lu.isInvertible()) {
      throw NumericError("monotone block with singular (1 + A): numeric breakdown");
    }
  }
  return report;
}

bool skew_check(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) throw ShapeError("skew check needs a square matrix");
  const Matrix s = a + a.adjoint().eval();
  if (s.isZero(0.0)) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff() <= tol;
}

Certificate certify_operator(const CausalOperator& b, const Weight& w, Index cutoff_count,
                             const MaterialLaw* law) {
  Certificate cert;
  cert.nu = w.nu();
  cert.c = positivity_certificate(b, w);
  cert.c_adjoint = adjoint_positivity_certificate(b, w);
  cert.norm_bound = cert.c != 0.0 ? 1.0 / cert.c : std::numeric_limits<double>::infinity();

  if (cutoff_count > 0) {
    const TimeGrid& g = b.grid();
    std::vector<double> cutoffs;
    for (Index i = 1; i <= cutoff_count; ++i) {
      const Index k = std::min<Index>(g.n() - 1, (g.n() * i) / cutoff_count);
      cutoffs.push_back(g.time(k));
    }
    cert.cutoff_samples = cutoff_positivity_check(b, w, cutoffs);
  }

  if (law != nullptr && law->has_pointwise_data()) {
    cert.maria_pointwise_c = pointwise_condition_maria(law->M0_samples, law->M0dot_samples,
                                                       law->M1_samples, w.nu());
  }
  return cert;
}

}  // namespace evolv
