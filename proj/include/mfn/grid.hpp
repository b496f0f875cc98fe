#pragma once

#include <cmath>
#include <stdexcept>

#include "mfn/errors.hpp"

namespace mfn {

// Uniform grid over [-tau, horizon] with dt = tau / steps_per_delay, so the
// delay window always spans exactly steps_per_delay steps. Row index i maps
// to time -tau + i*dt; row steps_per_delay is time 0.
struct TimeGrid {
  double tau = 1.0;
  int steps_per_delay = 1;  // n
  double horizon = 1.0;     // T
  double dt = 1.0;
  int num_steps = 2;  // ceil((T + tau)/dt); rows run 0..num_steps

  TimeGrid() = default;
  TimeGrid(double tau_, int n_, double horizon_) : tau(tau_), steps_per_delay(n_), horizon(horizon_) {
    if (!(tau > 0.0)) throw ConfigError("grid.tau must be positive");
    if (n_ < 1) throw ConfigError("grid.n must be a positive integer");
    if (!(horizon > 0.0)) throw ConfigError("grid.horizon must be positive");
    dt = tau / steps_per_delay;
    num_steps = steps_per_delay + static_cast<int>(std::ceil(horizon / dt - 1e-9));
    if (num_steps <= steps_per_delay) num_steps = steps_per_delay + 1;
  }

  double time_of(int index) const { return -tau + index * dt; }
  int time_zero_index() const { return steps_per_delay; }
  int rows() const { return num_steps + 1; }

  // kappa(n,t) = k*tau/n for t in (k*tau/n, (k+1)*tau/n]. Only defined for
  // t > 0; t = 0 belongs to the initial data.
  double kappa(double t) const {
    if (!(t > 0.0)) throw std::domain_error("kappa requires t > 0");
    const double k = std::ceil(t / dt - 1e-9) - 1.0;
    return (k < 0.0 ? 0.0 : k) * dt;
  }

  // Grid index of a time on the grid (within rounding slack).
  int index_of(double t) const {
    const double x = (t + tau) / dt;
    const int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-6) throw ShapeError("time is not on the grid");
    return i;
  }
};

}  // namespace mfn
