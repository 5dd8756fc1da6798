// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/bessel.hpp"

#include <cmath>
#include <cstdlib>

#include "paragate/common.hpp"

namespace paragate {
namespace {

// Power series J_n(x) = (x/2)^n sum_k (-1)^k (x^2/4)^k / (k! (n+k)!),
// evaluated in long double.  For |x| <= 12 the series converges to full
// double precision in well under 60 terms and suffers no cancellation
// beyond a few digits (terms peak near k ~ x/2, ratio bounded by
// (x/2)^2 / k^2).
long double series_jn(int n, long double x) {
  const long double h = x / 2.0L;
  long double prefactor = 1.0L;
  for (int k = 1; k <= n; ++k) prefactor *= h / k;
  long double term = prefactor;  // k = 0 term
  long double sum = term;
  const long double h2 = h * h;
  for (int k = 1; k < 200; ++k) {
    term *= -h2 / (static_cast<long double>(k) * (n + k));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) + 1e-320L) break;
  }
  return sum;
}

// Large-argument asymptotics (Hankel's expansion):
//   J_n(x) ~ sqrt(2/(pi x)) [ P_n(x) cos(chi) - Q_n(x) sin(chi) ],
//   chi = x - (2n+1) pi/4,
// with the standard P/Q series in 1/(8x)^2.  Truncated where the terms stop
// decreasing; for x >= 12 this reaches ~1e-16 relative accuracy.
long double asymptotic_jn(int n, long double x) {
  const long double mu = 4.0L * n * n;
  const long double w = 8.0L * x;
  // P-series: 1 - (mu-1)(mu-9)/(2! w^2) + (mu-1)(mu-9)(mu-25)(mu-49)/(4! w^4) ...
  // Q-series: (mu-1)/w - (mu-1)(mu-9)(mu-25)/(3! w^3) + ...
  long double p = 1.0L, q = (mu - 1.0L) / w;
  long double term_p = 1.0L, term_q = q;
  int sign = -1;
  for (int k = 1; k < 20; ++k) {
    const long double f2k1 = mu - (4.0L * k - 3.0L) * (4.0L * k - 3.0L);
    const long double f2k = mu - (4.0L * k - 1.0L) * (4.0L * k - 1.0L);
    term_p *= f2k1 * f2k / ((2.0L * k - 1.0L) * (2.0L * k) * w * w);
    const long double f2k1q = mu - (4.0L * k - 1.0L) * (4.0L * k - 1.0L);
    const long double f2kq = mu - (4.0L * k + 1.0L) * (4.0L * k + 1.0L);
    term_q *= f2k1q * f2kq / ((2.0L * k) * (2.0L * k + 1.0L) * w * w);
    p += sign * term_p;
    q += sign * term_q;
    sign = -sign;
    if (std::fabs(term_p) < 1e-20L && std::fabs(term_q) < 1e-20L) break;
  }
  const long double chi = x - (2.0L * n + 1.0L) * 0.78539816339744830961566084581988L;
  return std::sqrt(2.0L / (3.14159265358979323846264338327950L * x)) *
         (p * std::cos(chi) - q * std::sin(chi));
}

double jn_impl(int n, double x) {
  // J_n(-x) = (-1)^n J_n(x)
  long double xa = std::fabs(static_cast<long double>(x));
  long double v = (xa <= 12.0L) ? series_jn(n, xa) : asymptotic_jn(n, xa);
  if (x < 0.0 && (n % 2) != 0) v = -v;
  return static_cast<double>(v);
}

}  // namespace

double bessel_j0(double x) { return jn_impl(0, x); }
double bessel_j1(double x) { return jn_impl(1, x); }

double bessel_jn(int n, double x) {
  require(n >= 0, "bessel_jn: order must be non-negative");
  return jn_impl(n, x);
}

double bessel_j1_inverse(double y) {
  require(y >= 0.0 && y <= j1_peak_value,
          "bessel_j1_inverse: value outside the invertible range [0, J1 peak]");
  if (y == 0.0) return 0.0;
  // Bisection seed, Newton polish.  J1 is strictly increasing on
  // [0, j1_peak_x] with J1' = J0 - J1/x > 0 there.
  double lo = 0.0, hi = j1_peak_x;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j1(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    const double d = bessel_j0(x) - bessel_j1(x) / (x > 1e-300 ? x : 1e-300);
    if (std::fabs(d) < 1e-14) break;  // at the peak the bisection answer stands
    const double step = (bessel_j1(x) - y) / d;
    x -= step;
    if (x < 0.0) x = 0.0;
    if (x > j1_peak_x) x = j1_peak_x;
  }
  return x;
}

}  // namespace paragate
