#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evolv/operators.hpp"

namespace evolv {

/// Material law: the operator pair (M_op, N_op) together with the bounded
/// commutator operator C satisfying  M_op * D = D * M_op + C  on the window
/// (discretely, C is the literal matrix commutator up to O(h)).
///
/// Laws are nu-free by construction; min_nu is metadata recording the weight
/// threshold above which the law is meant to be used (for autonomous kernels
/// realized from a symbol on the ball B(r, r) this is 1/(2r)).
struct MaterialLaw {
  enum class Kind { autonomous, nonautonomous, block };

  MaterialLaw(CausalOperator m, CausalOperator n, CausalOperator c, Kind k, double min_nu_,
              std::string label_)
      : M_op(std::move(m)), N_op(std::move(n)), commutator_op(std::move(c)), kind(k),
        min_nu(min_nu_), label(std::move(label_)) {}

  CausalOperator M_op;
  CausalOperator N_op;
  CausalOperator commutator_op;
  Kind kind;
  double min_nu = 0.0;
  std::string label;

  /// Residual of the commutator identity measured at construction, plus the
  /// tolerance it was checked against. The law is flagged, not rejected,
  /// when the residual exceeds the tolerance.
  double construction_residual = 0.0;
  double residual_tolerance = 0.0;
  bool commutator_ok = true;

  /// Whether the time derivative of M0 was user-supplied (nonautonomous
  /// laws only); false means the order-2 finite-difference approximation.
  bool m0dot_supplied = false;

  /// Pointwise samples M0(t_k), M0dot(t_k), M1(t_k) for the pointwise
  /// positivity condition. Populated for nonautonomous laws and for block
  /// sums whose components are all nonautonomous.
  std::vector<Matrix> M0_samples;
  std::vector<Matrix> M0dot_samples;
  std::vector<Matrix> M1_samples;

  const TimeGrid& grid() const { return M_op.grid(); }
  Index dim() const { return M_op.dim_in(); }
  bool has_pointwise_data() const { return !M0_samples.empty(); }

  /// Same law with a replacement commutator operator; the residual is
  /// recomputed and the flag updated (used by the diagnostics to probe
  /// deliberately wrong commutators).
  MaterialLaw with_commutator(CausalOperator c) const;
};

using MatrixFunction = std::function<Matrix(double)>;

/// Autonomous law M_op = causal convolution with M_kernel, N_op likewise.
/// The commutator operator is zero: lower triangular Toeplitz kernels
/// commute with the time derivative exactly.
MaterialLaw autonomous_law(const TimeGrid& grid, std::vector<Matrix> m_kernel,
                           std::vector<Matrix> n_kernel, double min_nu,
                           std::string label = "autonomous");

/// Non-autonomous law M_op = multiplication by M0(t), N_op = multiplication
/// by M1(t); the commutator operator is multiplication by -M0dot(t). When
/// m0dot is not supplied it is approximated from the grid samples by central
/// differences (order 2, one-sided at the window edges).
MaterialLaw nonautonomous_law(const TimeGrid& grid, const MatrixFunction& m0,
                              const std::optional<MatrixFunction>& m0dot,
                              const MatrixFunction& m1, Index dim, double min_nu = 0.0,
                              std::string label = "nonautonomous");

/// Block-diagonal direct sum of two laws on the same grid; dimension
/// d0 + d1, min_nu the maximum of the components. Summing with a
/// zero-dimensional law is the identity operation.
MaterialLaw block_direct_sum(const MaterialLaw& a, const MaterialLaw& b);

/// Residual || (M_op D - D M_op - C) phi ||_0 / || phi ||_0 measured on the
/// standard smooth profile with the unweighted norm. Exactly zero for
/// autonomous laws, O(h) for Lipschitz nonautonomous ones.
double commutator_residual(const MaterialLaw& law, const TimeGrid& grid);

/// Empirical check that the weighted operator norm of [M_op, D] stays
/// bounded as h decreases; heuristic by design.
struct CommutatorProbeReport {
  std::vector<double> hs;
  std::vector<double> norms;
  bool bounded_suspected = true;
  std::string verdict;
};

CommutatorProbeReport commutator_boundedness_probe(
    const std::function<MaterialLaw(const TimeGrid&)>& law_factory,
    const std::vector<TimeGrid>& grids, double nu);

}  // namespace evolv
