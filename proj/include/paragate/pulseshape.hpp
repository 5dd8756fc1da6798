// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "paragate/common.hpp"
#include "paragate/optimize.hpp"

namespace paragate {

// Linear difference-equation filter
//   a0 y[n] = sum_i b_i x[n-i] - sum_{j>=1} a_j y[n-j],
// zero initial conditions, taps ordered a0/b0 first.
struct FilterCoefficients {
  std::vector<double> a;
  std::vector<double> b;
  double sample_rate = 0.0;  // Hz
  void validate() const;
};

// Damped-sinusoid component of a step response.
struct RingingSpec {
  double amplitude = 0.0;   // relative to the step's final value
  double frequency = 0.0;   // Hz
  double decay_time = 0.0;  // s
};

// Step-response model s(t) = 1 + A e^{-t/tau} (+ ringing), t >= 0.
struct DistortionModel {
  double undershoot = 0.0;  // A, |A| < 1
  double tau = 0.0;         // s, > 0
  std::optional<RingingSpec> ringing;
  void validate() const;
};

// Ramsey-style flux-pulse characterization: quadratures of the phase
// accumulated up to each duration.
struct CryoscopeTrace {
  std::vector<double> durations;  // s, strictly increasing, uniform spacing
  std::vector<double> qx, qy;     // cos(phi), sin(phi)
  double amplitude = 0.0;         // commanded pulse amplitude (flux units)
};

// Direct-form evaluation of the difference equation; bit-reproducible.
std::vector<double> apply_filter(const std::vector<double>& x,
                                 const FilterCoefficients& coeffs);

// Exact one-pole digital model of the exponential step distortion: applying
// this filter to the commanded waveform yields the distorted waveform
// (step in -> 1 + A r^n out, r = e^{-1/(f_s tau)}).
FilterCoefficients distortion_filter(double undershoot, double tau, double f_s);

// Pre-distortion inverse of the exponential distortion: numerator zero
// exactly at r, pole at 1 - alpha with alpha = 1 - exp(-1/(f_s tau (A+1))),
// feedforward taps scaled to unit DC gain.  Cascading with the distortion
// leaves steps flat within 1% after two samples across the supported
// parameter range; A = 0 returns an exact passthrough.
FilterCoefficients iir_invert_exponential(double undershoot, double tau, double f_s);

// Model step/impulse response sampled at f_s, and the distortion of an
// arbitrary waveform via direct convolution (supports the ringing term,
// which has no one-pole filter form).
std::vector<double> step_response(const DistortionModel& model, int n_samples, double f_s);
std::vector<double> apply_distortion(const DistortionModel& model,
                                     const std::vector<double>& x, double f_s);

// Savitzky-Golay derivative: least-squares local polynomial of degree
// `order` over an odd `window`, evaluated at each sample (asymmetric
// windows at the edges).  Exact for polynomials of degree <= order.
std::vector<double> savgol_derivative(const std::vector<double>& y, int window, int order,
                                      double dt);

// Accumulated phase of a square flux pulse of each duration through the
// distortion and the flux->detuning map (rad/s as a function of flux):
// phi(tau) = integral_0^tau freq_map(amplitude * s(t)) dt, by quadrature.
// The map must be monotone over the swept flux range.
CryoscopeTrace cryoscope_synthesize(const DistortionModel& model, double amplitude,
                                    const std::vector<double>& durations,
                                    const std::function<double(double)>& freq_map);

// Same, for an arbitrary commanded waveform sampled at f_s (used to verify
// pre-distorted pulses end to end).
CryoscopeTrace cryoscope_synthesize_waveform(const DistortionModel& model,
                                             const std::vector<double>& waveform, double f_s,
                                             const std::vector<double>& durations,
                                             const std::function<double(double)>& freq_map);

// Reconstruct the on-chip flux waveform from a trace: demodulate at the
// dominant DFT frequency of e^{i phi} (ties toward lower frequency), unwrap,
// Savitzky-Golay-differentiate the total phase, and invert the flux map.
std::vector<double> cryoscope_analyze(const CryoscopeTrace& trace,
                                      const std::function<double(double)>& inverse_freq_map,
                                      int savgol_window = 9);

// Monotone map inversion on [lo, hi] by bisection (helper for building
// inverse_freq_map arguments).
std::function<double(double)> invert_monotone_map(const std::function<double(double)>& map,
                                                  double lo, double hi);

// Least-squares (A, tau) of an exponential settling tail in a reconstructed
// waveform (relative to `amplitude`), skipping `skip` edge samples.
struct UndershootFit {
  double undershoot = 0.0;
  double tau = 0.0;
};
UndershootFit fit_exponential_undershoot(const std::vector<double>& waveform, double dt,
                                         double amplitude, int skip);

// Derivative-free minimization (covariance-matrix-adaptation evolution
// strategy, default population 4 + floor(3 ln n)); deterministic per seed;
// history holds the best value per generation.
CmaEsResult cma_es_minimize(const VectorFn& objective, const Eigen::VectorXd& x0,
                            double sigma0, long budget, std::uint64_t seed);

// FIR taps (unit DC gain) minimizing the mean squared error between the
// filtered measured response and the target, via cma_es_minimize.
FilterCoefficients fir_optimize(const std::vector<double>& measured_response,
                                const std::vector<double>& target, double f_s,
                                int n_taps = 7, std::uint64_t seed = 1);

}  // namespace paragate
