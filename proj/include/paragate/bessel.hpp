// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

namespace paragate {

// Bessel functions of the first kind.  These set the sideband weights of the
// frequency-modulated coupling, so they are implemented here (power series
// plus large-argument asymptotics) rather than pulled from a library, and
// are unit-tested against high-precision reference values to 1e-12 relative
// accuracy.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_jn(int n, double x);

// First maximum of J1: location and value.  J1 grows on [0, j1_peak_x], so
// drive calibration inverts it on that interval only.
inline constexpr double j1_peak_x = 1.8411837813406593;
inline constexpr double j1_peak_value = 0.5818652242815964;

// First zero of J0: a tone parked here gates its spectator factor to zero.
inline constexpr double j0_first_zero = 2.4048255576957724;

// Inverse of J1 restricted to [0, j1_peak_x].  Throws if y is outside
// [0, J1(j1_peak_x)].
double bessel_j1_inverse(double y);

}  // namespace paragate
