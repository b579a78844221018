#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "evolv/grid.hpp"

namespace evolv {

class CausalOperator;

namespace detail {

/// Block Toeplitz kernel. Causal direction:
///   (Op u)_k = sum_{m=0..k} blocks[m] * u_{k-m}
/// Anticausal direction (adjoints, forward shifts):
///   (Op u)_k = sum_{m=0..n-1-k} blocks[m] * u_{k+m}
struct ToeplitzRep {
  std::vector<Matrix> blocks;  // lag 0..n-1, each d_out x d_in
  bool anticausal = false;
  Index band = 0;  // number of leading blocks that are not exactly zero
};

/// Block-diagonal in time: (Op u)_k = factors[k] * u_k.
struct MultiplicationRep {
  std::vector<Matrix> factors;
};

/// Constant spatial block: (Op u)_k = a * u_k.
struct SpatialRep {
  Matrix a;
};

struct OpNode;
using NodePtr = std::shared_ptr<const OpNode>;

struct SumRep {
  NodePtr lhs, rhs;
};

/// Composition outer(inner(u)).
struct ProductRep {
  NodePtr outer, inner;
};

struct ScaleRep {
  Complex factor;
  NodePtr base;
};

using Rep = std::variant<ToeplitzRep, MultiplicationRep, SpatialRep, SumRep, ProductRep, ScaleRep>;

struct OpNode {
  TimeGrid grid;
  Index d_out, d_in;
  Rep rep;

  OpNode(TimeGrid g, Index dout, Index din, Rep r)
      : grid(g), d_out(dout), d_in(din), rep(std::move(r)) {}
};

}  // namespace detail

/// Result of the structural causality check.
struct CausalityCheck {
  bool causal = false;
  double max_off_causal = 0.0;
};

/// Block-structured linear operator on trajectories. Every non-adjoint
/// constructor yields a block lower triangular (causal) operator; weighted
/// adjoints and forward time shifts are block upper triangular and are
/// tracked as anticausal.
///
/// The representation is an algebra over Toeplitz kernels, time-varying
/// multiplications, constant spatial blocks and sum/product/scale
/// composites. Compositions within one family are folded eagerly (Toeplitz
/// kernels compose by block convolution), which keeps the exact-commutation
/// properties of the lower triangular Toeplitz algebra at the kernel level.
class CausalOperator {
 public:
  static CausalOperator toeplitz(const TimeGrid& grid, std::vector<Matrix> blocks,
                                 bool anticausal = false);
  static CausalOperator multiplication(const TimeGrid& grid, std::vector<Matrix> factors);
  static CausalOperator spatial_constant(const TimeGrid& grid, Matrix a);
  static CausalOperator identity(const TimeGrid& grid, Index dim);
  static CausalOperator zero(const TimeGrid& grid, Index d_out, Index d_in);

  const TimeGrid& grid() const noexcept { return node_->grid; }
  Index dim_in() const noexcept { return node_->d_in; }
  Index dim_out() const noexcept { return node_->d_out; }
  const detail::NodePtr& node() const noexcept { return node_; }

  /// True when no anticausal atom occurs anywhere in the representation.
  bool structurally_causal() const;

  Trajectory apply(const Trajectory& u) const;

  /// Dense (n*d_out) x (n*d_in) matrix; throws CapExceededError beyond cap.
  Matrix materialize(Index cap = kMaterializeCap) const;

  CausalOperator scaled(Complex s) const;
  friend CausalOperator operator+(const CausalOperator& a, const CausalOperator& b);
  friend CausalOperator operator-(const CausalOperator& a, const CausalOperator& b);
  /// Composition a after b.
  friend CausalOperator operator*(const CausalOperator& a, const CausalOperator& b);
  friend CausalOperator operator*(Complex s, const CausalOperator& a) { return a.scaled(s); }

  static constexpr Index kMaterializeCap = 4096;

  explicit CausalOperator(detail::NodePtr node) : node_(std::move(node)) {}

 private:
  detail::NodePtr node_;
};

/// Discrete time derivative: backward difference (Du)_k = (u_k - u_{k-1})/h
/// with zero history. Block lower bidiagonal, invertible, nu-independent.
CausalOperator time_derivative(const TimeGrid& grid, Index dim);

/// Discrete time integral (D^{-1} f)_k = h * sum_{j<=k} f_j. Exact inverse
/// of time_derivative on the window.
CausalOperator time_integral(const TimeGrid& grid, Index dim);

/// Regularizer (1 + eps*D)^{-1}; eps = 0 gives the identity. Realized by
/// its exact causal kernel c_m = h * eps^m / (h+eps)^{m+1}.
CausalOperator yosida(const TimeGrid& grid, Index dim, double eps);

/// Fractional integral D^{-alpha}, 0 < alpha <= 1, via Grunwald-Letnikov
/// weights h^alpha * g_j with g_0 = 1, g_j = g_{j-1} * (1 - (1-alpha)/j).
/// alpha = 1 reduces exactly to time_integral.
CausalOperator fractional_integral(const TimeGrid& grid, Index dim, double alpha);

/// Diagonal projection onto times t_k <= a (1 on the cutoff block, else 0).
CausalOperator cutoff_projection(const TimeGrid& grid, Index dim, double a);

/// Shift by m steps: (tau u)_k = u_{k+m}, zero-fill outside the window.
/// m > 0 looks forward (anticausal), m < 0 backward (causal).
CausalOperator time_shift(const TimeGrid& grid, Index dim, Index steps);

/// Causal convolution with the given kernel blocks (the discrete
/// realization of an autonomous material law M(D^{-1})).
CausalOperator causal_kernel_operator(const TimeGrid& grid, std::vector<Matrix> blocks);

/// Time-varying multiplication (Op u)_k = a(t_k) u_k.
CausalOperator multiplication_operator(const TimeGrid& grid,
                                       const std::function<Matrix(double)>& a, Index dim);

/// Weighted adjoint Op# = G^{-1} Op^H G for the Gram diagonal of w, so that
/// <Op u, v>_nu = <u, Op# v>_nu. Computed representation-wise: Toeplitz
/// kernels map to anticausal kernels exp(-2 nu m h) * g_m^H, multiplications
/// to blockwise Hermitian transposes, composites by the usual reversal rules.
CausalOperator weighted_adjoint(const CausalOperator& op, const Weight& w);

/// ab - ba. For two causal Toeplitz operands the kernel is assembled from
/// pairwise block commutators, so scalar-kernel families commute exactly.
CausalOperator commutator(const CausalOperator& a, const CausalOperator& b);

/// Weighted operator norm: largest singular value of G^{1/2} Op G^{-1/2}.
double operator_norm_weighted(const CausalOperator& op, const Weight& w);

/// Structural causality check on the materialized matrix: true iff every
/// strictly upper time block has magnitude <= tol.
CausalityCheck is_causal_structure(const CausalOperator& op, double tol);

struct SpectralDiagnostic {
  std::vector<double> frequencies;  // xi_j, ascending, length n
  Matrix values;                    // d x n transform values
  std::string norm_convention;
};

/// Discrete Fourier-Laplace transform of e^{-nu t} u(t):
///   u_hat(xi_j) = h/sqrt(2 pi) * sum_k exp(-(i xi_j + nu) t_k) u_k,
/// xi_j = 2 pi (j - floor(n/2)) / (n h). Parseval holds in the form
/// sum_j |u_hat_j|^2 * dxi = ||u||_nu^2 with dxi = 2 pi/(n h).
SpectralDiagnostic fourier_laplace(const Trajectory& u, const Weight& w);

}  // namespace evolv
