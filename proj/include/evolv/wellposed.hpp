#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evolv/material.hpp"
#include "evolv/operators.hpp"

namespace evolv {

/// Positivity certificate for an operator B on the weighted grid: the sharp
/// constant c in Re<B phi, phi>_nu >= c <phi, phi>_nu, obtained as the
/// smallest eigenvalue of the Hermitian pencil (Herm(G B), G). A positive c
/// bounds the solution operator by 1/c. A negative c means "uncertified",
/// not "singular": the positivity conditions are sufficient, not necessary.
struct Certificate {
  double c = 0.0;
  double c_adjoint = 0.0;
  double norm_bound = 0.0;  // 1/c; negative when uncertified
  double nu = 0.0;
  std::vector<std::pair<double, double>> cutoff_samples;  // (a, c_a)
  std::optional<double> maria_pointwise_c;

  bool certified() const { return c > 0.0; }
};

/// Eigensolver tolerance quoted by the certificate contracts.
inline constexpr double kCertificateTolerance = 1e-8;

/// Sharp positivity constant via the Gram square-root transform: the
/// smallest eigenvalue of Herm(G^{1/2} B G^{-1/2}).
double positivity_certificate(const CausalOperator& b, const Weight& w);

/// Same pencil evaluated through the weighted adjoint B#; agrees with
/// positivity_certificate to eigensolver tolerance (the two routes share
/// the Hermitian part in exact arithmetic).
double adjoint_positivity_certificate(const CausalOperator& b, const Weight& w);

/// Positivity constants of the leading principal time blocks t_k <= a.
/// Valid only for structurally causal B (the truncated inequality reduces to
/// the leading block exactly in that case); cutoffs before the window are
/// skipped as vacuous. Each c_a >= global c by eigenvalue interlacing.
std::vector<std::pair<double, double>> cutoff_positivity_check(
    const CausalOperator& b, const Weight& w, const std::vector<double>& cutoffs);

/// Pointwise positivity constant min_k lambda_min(Herm(nu M0 + M0dot/2 +
/// (M1 + M1^H)/2)) sampled at the grid times. No claim beyond the sampled
/// points.
double pointwise_condition_maria(const MatrixFunction& m0, const MatrixFunction& m0dot,
                                 const MatrixFunction& m1, double nu, const TimeGrid& grid);
double pointwise_condition_maria(const std::vector<Matrix>& m0,
                                 const std::vector<Matrix>& m0dot,
                                 const std::vector<Matrix>& m1, double nu);

struct MonotonicityReport {
  bool is_monotone = false;
  double margin = 0.0;  // lambda_min of the Hermitian part
};

/// Monotonicity of a spatial block: margin = lambda_min(Herm A). In finite
/// dimensions monotone implies maximal monotone; invertibility of (1 + A) is
/// asserted and its failure for a monotone A raises NumericError.
MonotonicityReport monotonicity_check(const Matrix& a);

/// ||A + A^H||_2 <= tol.
bool skew_check(const Matrix& a, double tol);

/// Full certificate: both pencil routes, sampled cutoff audit; maria
/// pointwise value filled in when the law carries pointwise samples.
Certificate certify_operator(const CausalOperator& b, const Weight& w,
                             Index cutoff_count = 8,
                             const MaterialLaw* law = nullptr);

}  // namespace evolv
