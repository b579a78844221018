#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "evolv/errors.hpp"

namespace evolv {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Uniform discrete time axis t_k = t0 + k*h, k = 0..n-1.
/// Immutable value type; equality is exact (same t0, h, n).
class TimeGrid {
 public:
  TimeGrid(double t0, double h, Index n);

  double t0() const noexcept { return t0_; }
  double h() const noexcept { return h_; }
  Index n() const noexcept { return n_; }
  double time(Index k) const noexcept { return t0_ + static_cast<double>(k) * h_; }
  double t_last() const noexcept { return time(n_ - 1); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.t0_ == b.t0_ && a.h_ == b.h_ && a.n_ == b.n_;
  }
  friend bool operator!=(const TimeGrid& a, const TimeGrid& b) noexcept {
    return !(a == b);
  }

 private:
  double t0_;
  double h_;
  Index n_;
};

inline TimeGrid make_grid(double t0, double h, Index n) { return TimeGrid(t0, h, n); }

/// Exponential weight nu with precomputed quadrature weights
/// w_k = exp(-2*nu*t_k) * h. All adjoints and norms are taken relative to
/// the Gram diagonal G = diag(w_k (x) I_d).
///
/// nu = 0 is admitted for diagnostics (plain L^2); the well-posedness
/// machinery itself is exercised at nu > 0.
class Weight {
 public:
  Weight(const TimeGrid& grid, double nu);

  const TimeGrid& grid() const noexcept { return grid_; }
  double nu() const noexcept { return nu_; }
  double w(Index k) const noexcept { return w_[k]; }
  const Eigen::VectorXd& values() const noexcept { return w_; }

 private:
  TimeGrid grid_;
  double nu_;
  Eigen::VectorXd w_;
};

/// Complex d-vector trajectory on a TimeGrid, stored as a d x n matrix
/// (one column per time step). Values vanish for k < 0 (zero history).
class Trajectory {
 public:
  Trajectory(const TimeGrid& grid, Matrix values);

  static Trajectory zero(const TimeGrid& grid, Index dim);
  /// Sample a scalar function of t into a 1-component trajectory.
  static Trajectory from_scalar(const TimeGrid& grid, const std::function<Complex(double)>& f);
  /// Sample a vector function of t into a d-component trajectory.
  static Trajectory from_function(const TimeGrid& grid, Index dim,
                                  const std::function<Vector(double)>& f);

  const TimeGrid& grid() const noexcept { return grid_; }
  Index dim() const noexcept { return values_.rows(); }
  Index n() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  Matrix& values() noexcept { return values_; }
  Vector at(Index k) const { return values_.col(k); }

  Trajectory& operator+=(const Trajectory& rhs);
  Trajectory& operator-=(const Trajectory& rhs);
  Trajectory& operator*=(Complex s);
  friend Trajectory operator+(Trajectory lhs, const Trajectory& rhs) { return lhs += rhs; }
  friend Trajectory operator-(Trajectory lhs, const Trajectory& rhs) { return lhs -= rhs; }
  friend Trajectory operator*(Complex s, Trajectory t) { return t *= s; }

  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  TimeGrid grid_;
  Matrix values_;
};

/// Discrete weighted inner product <u,v>_nu = sum_k w_k <u_k, v_k>,
/// sesquilinear (linear in u, conjugate-linear in v).
Complex weighted_inner(const Trajectory& u, const Trajectory& v, const Weight& w);

/// Induced norm ||u||_nu = sqrt(<u,u>_nu).
double weighted_norm(const Trajectory& u, const Weight& w);

void require_same_shape(const Trajectory& u, const Trajectory& v);

}  // namespace evolv
