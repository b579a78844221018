#include "evolv/profile.hpp"

#include <cmath>

namespace evolv {

double standard_bump_value(const TimeGrid& grid, double t) {
  const double mid = 0.5 * (grid.t0() + grid.t_last());
  const double width = 0.25 * (grid.t_last() - grid.t0());
  const double s = (t - mid) / width;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

Trajectory standard_bump(const TimeGrid& grid, Index dim) {
  Matrix v(dim, grid.n());
  for (Index k = 0; k < grid.n(); ++k) {
    const double b = standard_bump_value(grid, grid.time(k));
    for (Index i = 0; i < dim; ++i) {
      v(i, k) = Complex(b / static_cast<double>(i + 1), 0.0);
    }
  }
  return Trajectory(grid, std::move(v));
}

}  // namespace evolv
