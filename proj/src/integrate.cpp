// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace paragate {
namespace {

// Dormand-Prince 5(4) tableau (the classic ode45 pair, FSAL).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
// b - b* (5th-order weights minus the embedded 4th-order weights).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights for the quartic interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Vector integrate(const OdeRhs& f, Vector y0, double t0, double t1,
                 const OdeOptions& opts, const std::vector<double>& sample_times,
                 const OdeSampler& on_sample, OdeStats* stats) {
  require(t1 >= t0, "integrate: t1 must be >= t0");
  require(opts.abs_tol > 0.0 && opts.rel_tol > 0.0, "integrate: tolerances must be positive");
  const double span = t1 - t0;
  for (size_t i = 0; i < sample_times.size(); ++i) {
    require(sample_times[i] >= t0 - 1e-12 * span && sample_times[i] <= t1 + 1e-12 * span,
            "integrate: sample time outside [t0, t1]");
    if (i) require(sample_times[i] >= sample_times[i - 1],
                   "integrate: sample times must be sorted");
  }

  const Eigen::Index n = y0.size();
  Vector y = std::move(y0);
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
  Vector rc2(n), rc3(n), rc4(n), rc5(n);

  OdeStats local_stats;
  OdeStats& st = stats ? *stats : local_stats;

  size_t next_sample = 0;
  auto emit_at = [&](double t_step, double h, const Vector& ybeg) {
    // Dense output over [t_step, t_step + h]; rc* capture the interpolant.
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t_step + h * (1.0 + 1e-12)) {
      const double ts = std::min(sample_times[next_sample], t_step + h);
      const double th = (ts - t_step) / h;
      const double th1 = 1.0 - th;
      ytmp = ybeg + th * (rc2 + th1 * (rc3 + th * (rc4 + th1 * rc5)));
      if (on_sample) on_sample(next_sample, ts, ytmp);
      ++next_sample;
    }
  };

  if (span == 0.0) {
    while (next_sample < sample_times.size()) {
      if (on_sample) on_sample(next_sample, t0, y);
      ++next_sample;
    }
    return y;
  }

  // Samples that sit exactly at t0.
  while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) {
    if (on_sample) on_sample(next_sample, t0, y);
    ++next_sample;
  }

  f(t0, y, k1);
  ++st.rhs_evals;

  double h = opts.h_init;
  if (h <= 0.0) {
    const double dy = k1.norm();
    const double dn = std::max(y.norm(), 1e-12);
    h = (dy > 1e-300) ? 0.01 * dn / dy : 1e-6 * span;
    h = std::min(h, 0.1 * span);
  }
  h = std::min(h, opts.h_max);

  double t = t0;
  bool fsal_valid = true;  // k1 holds f(t, y)

  while (t < t1) {
    require(st.steps + st.rejected < opts.max_steps,
            "integrate: step budget exhausted (the problem may be stiffer than expected)");
    h = std::min(h, t1 - t);

    if (!fsal_valid) {
      f(t, y, k1);
      ++st.rhs_evals;
      fsal_valid = true;
    }

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);
    st.rhs_evals += 6;

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    // RMS of the componentwise scaled error.
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      const double r = std::abs(yerr(i)) / sc;
      acc += r * r;
    }
    const double err = std::sqrt(acc / static_cast<double>(n));

    if (err <= 1.0) {
      // Accepted.  Build the dense-output polynomial before advancing.
      if (next_sample < sample_times.size() &&
          sample_times[next_sample] <= t + h * (1.0 + 1e-12)) {
        rc2 = ynew - y;
        rc3 = h * k1 - rc2;
        rc4 = rc2 - h * k7 - rc3;
        rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        emit_at(t, h, y);
      }
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      fsal_valid = true;
      ++st.steps;
      const double fac = (err > 1e-300) ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = std::min(h * std::clamp(fac, 0.2, 5.0), opts.h_max);
    } else {
      ++st.rejected;
      const double fac = 0.9 * std::pow(err, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
      require(h > 1e-18 * span, "integrate: step size underflow");
      // k1 still holds f(t, y); keep it.
    }
  }

  // Samples pinned to t1 that floating point left behind.
  while (next_sample < sample_times.size()) {
    if (on_sample) on_sample(next_sample, t1, y);
    ++next_sample;
  }
  return y;
}

}  // namespace paragate
