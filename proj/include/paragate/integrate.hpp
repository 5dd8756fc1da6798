// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "paragate/common.hpp"

namespace paragate {

struct OdeOptions {
  double abs_tol = 1e-9;  // local error per step, absolute
  double rel_tol = 1e-9;  // local error per step, relative
  double h_init = 0.0;    // 0 = choose automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 50000000;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

// dy/dt = f(t, y); f writes the derivative into its third argument (which is
// preallocated and may alias nothing).
using OdeRhs = std::function<void(double t, const Vector& y, Vector& dy)>;

// Called for each requested sample time, with the dense-output interpolant
// evaluated there.
using OdeSampler = std::function<void(size_t sample_index, double t, const Vector& y)>;

// Integrate from t0 to t1 (t1 >= t0) with the Dormand-Prince 5(4) embedded
// pair, PI-free step control, and 4th-order dense output at `sample_times`
// (must be sorted, within [t0, t1]).  Returns y(t1).
Vector integrate(const OdeRhs& f, Vector y0, double t0, double t1,
                 const OdeOptions& opts = {},
                 const std::vector<double>& sample_times = {},
                 const OdeSampler& on_sample = nullptr, OdeStats* stats = nullptr);

}  // namespace paragate
