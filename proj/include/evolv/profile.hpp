#pragma once

#include "evolv/grid.hpp"

namespace evolv {

/// Standard smooth test profile: the bump exp(-1/(1-s^2)) supported on the
/// middle half of the window, zero outside, with s = (t - mid)/W and
/// W = (t_last - t0)/4. Infinitely differentiable, vanishes with all
/// derivatives at the support edges. Results quoted against this profile
/// are reproducible bit for bit.
double standard_bump_value(const TimeGrid& grid, double t);

/// Trajectory version; component i carries the profile scaled by 1/(i+1).
Trajectory standard_bump(const TimeGrid& grid, Index dim);

}  // namespace evolv
