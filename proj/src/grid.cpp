#include "evolv/grid.hpp"

#include <cmath>

namespace evolv {

TimeGrid::TimeGrid(double t0, double h, Index n) : t0_(t0), h_(h), n_(n) {
  if (!std::isfinite(t0) || !std::isfinite(h)) {
    throw InvalidGridError("time grid parameters must be finite");
  }
  if (h <= 0.0) {
    throw InvalidGridError("time grid requires step h > 0");
  }
  if (n < 2) {
    throw InvalidGridError("time grid requires at least 2 points");
  }
}

Weight::Weight(const TimeGrid& grid, double nu) : grid_(grid), nu_(nu), w_(grid.n()) {
  if (!std::isfinite(nu) || nu < 0.0) {
    throw ParameterError("weight rate nu must be finite and >= 0");
  }
  for (Index k = 0; k < grid.n(); ++k) {
    w_[k] = std::exp(-2.0 * nu * grid.time(k)) * grid.h();
  }
  if (!w_.allFinite() || w_.minCoeff() <= 0.0) {
    throw NumericError("weight vector is not positive and finite; window too long for this nu");
  }
}

Trajectory::Trajectory(const TimeGrid& grid, Matrix values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.cols() != grid_.n()) {
    throw ShapeError("trajectory length does not match grid point count");
  }
  if (!values_.allFinite()) {
    throw NumericError("trajectory contains non-finite entries");
  }
}

Trajectory Trajectory::zero(const TimeGrid& grid, Index dim) {
  return Trajectory(grid, Matrix::Zero(dim, grid.n()));
}

Trajectory Trajectory::from_scalar(const TimeGrid& grid,
                                   const std::function<Complex(double)>& f) {
  Matrix v(1, grid.n());
  for (Index k = 0; k < grid.n(); ++k) v(0, k) = f(grid.time(k));
  return Trajectory(grid, std::move(v));
}

Trajectory Trajectory::from_function(const TimeGrid& grid, Index dim,
                                     const std::function<Vector(double)>& f) {
  Matrix v(dim, grid.n());
  for (Index k = 0; k < grid.n(); ++k) {
    Vector col = f(grid.time(k));
    if (col.size() != dim) throw ShapeError("sampled vector has wrong dimension");
    v.col(k) = col;
  }
  return Trajectory(grid, std::move(v));
}

Trajectory& Trajectory::operator+=(const Trajectory& rhs) {
  require_same_shape(*this, rhs);
  values_ += rhs.values_;
  return *this;
}

Trajectory& Trajectory::operator-=(const Trajectory& rhs) {
  require_same_shape(*this, rhs);
  values_ -= rhs.values_;
  return *this;
}

Trajectory& Trajectory::operator*=(Complex s) {
  values_ *= s;
  return *this;
}

void require_same_shape(const Trajectory& u, const Trajectory& v) {
  if (u.grid() != v.grid()) throw ShapeError("trajectories live on different grids");
  if (u.dim() != v.dim()) throw ShapeError("trajectories have different state dimensions");
}

Complex weighted_inner(const Trajectory& u, const Trajectory& v, const Weight& w) {
  require_same_shape(u, v);
  if (u.grid() != w.grid()) throw ShapeError("weight grid does not match trajectories");
  Complex acc(0.0, 0.0);
  for (Index k = 0; k < u.n(); ++k) {
    // <u_k, v_k> in C^d, conjugate-linear in v_k.
    acc += w.w(k) * v.values().col(k).dot(u.values().col(k));
  }
  return acc;
}

double weighted_norm(const Trajectory& u, const Weight& w) {
  if (u.grid() != w.grid()) throw ShapeError("weight grid does not match trajectory");
  double acc = 0.0;
  for (Index k = 0; k < u.n(); ++k) {
    acc += w.w(k) * u.values().col(k).squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace evolv
