// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paragate/common.hpp"

namespace paragate {

// 1/f flux-noise description for the common (flux-tunable) qubit.
// Amplitude is sqrt(A_Phi) in units of Phi0 (so 2.45e-6 means 2.45 uPhi0);
// slope is d(omega01)/d(Phi) at the operating point in rad/s per Phi0.
struct FluxNoiseSpec {
  double sqrt_amp_phi0 = 0.0;
  double slope = 0.0;
  double f_low_hz = 1e-4;
};

struct QubitParams {
  double omega = 0.0;    // 0-1 transition frequency at the operating point, rad/s
  double alpha = 0.0;    // anharmonicity, rad/s (negative for transmons)
  double h = 0.0;        // coupling to the bus resonator, rad/s
  double t1 = 0.0;       // relaxation time, s
  double t2_echo = 0.0;  // echo coherence time, s
  double zz = 0.0;       // static cross-Kerr to the common qubit, rad/s (mode 0: unused)
};

// Ring of transmons coupled through a common bus.  Mode 0 is the
// flux-tunable common qubit whose frequency is parametrically modulated;
// modes 1..n-1 are the computational qubits.  The bus is far detuned and
// enters only through the exchange couplings it mediates.
struct DeviceParams {
  std::vector<QubitParams> qubits;
  double bus_freq = 0.0;  // rad/s
  int truncation = 3;     // levels kept per transmon
  std::optional<FluxNoiseSpec> flux_noise;

  int n_qubits() const { return static_cast<int>(qubits.size()); }
  // omega_j - omega_0: the modulation frequency that brings qubit j into
  // resonance with the common qubit.
  double detuning(int j) const;
  // omega_j - omega_bus.
  double bus_detuning(int j) const;
  // Bus-mediated exchange coupling between the common qubit and qubit j.
  double coupling(int j) const;
  // Relaxation and pure-dephasing rates (1/s).
  double gamma1(int j) const;
  double gamma_phi(int j) const;
  void validate() const;
};

// One modulation tone on the common qubit's frequency:
// delta_omega0(t) += amplitude * sin(frequency * t + phase).
struct DriveTone {
  int target = 0;          // computational qubit this tone addresses (>= 1)
  double amplitude = 0.0;  // rad/s
  double frequency = 0.0;  // rad/s
  double phase = 0.0;      // rad
};

// Full drive program.  The envelope ramps the tone amplitudes up and down
// with raised-cosine edges of length `ramp` (0 = hard square).
struct DriveConfig {
  std::vector<DriveTone> tones;
  double duration = 0.0;  // s
  double ramp = 2e-9;     // s

  // Modulation index of tone i.
  double epsilon(size_t i) const;
  void validate() const;
};

// g = (h0 hj / 2) (1/(w0 - wb) + 1/(wj - wb)).
double bus_mediated_coupling(double h0, double hj, double delta_0b, double delta_jb);

// chi = -h^2 alpha / (delta (delta - alpha)): dispersive shift of a
// transmon (coupling h, anharmonicity alpha) on a resonator detuned by
// delta = omega_qubit - omega_resonator.
double dispersive_shift(double h, double alpha, double delta);

// Sideband-weighted coupling of tone j when the common qubit is modulated
// with indices eps[k]: g_eff = g_j * J1(eps[j]) * prod_{k != j} J0(eps[k]).
double effective_coupling(double g_j, const std::vector<double>& eps, size_t j);

// Exact time-averaged exchange-coupling magnitude of each listed tone under
// the full multi-tone modulation: |g_j <e^{i delta_j t} prod_k e^{i eps_k
// cos(nu_k t + phase)}>| averaged over the commensurate period of all tone
// and detuning frequencies.  Unlike effective_coupling this keeps every
// sideband path, so tones (or their harmonics) that alias onto another
// tone's detuning — e.g. nu_a - nu_b = delta_b — show up as the coupling
// shifts they really cause; with no such collisions it reduces to the
// closed-form product.  Tones are assumed resonant (frequency =
// |detuning|) with a common phase, as make_calibrated_drive produces.
// Falls back to the closed form when no commensurate period exists.
std::vector<double> dc_effective_couplings(const DeviceParams& device,
                                           const std::vector<int>& targets,
                                           const std::vector<double>& eps,
                                           double phase = -0.5 * pi);

// Solve for the modulation indices that realize per-tone couplings
// |g_eff_j| = g_targets[j] (all magnitudes) on the listed computational
// qubits.  Multi-tone fixed point on the closed-form product, then refined
// against dc_effective_couplings so sideband collisions between tones are
// absorbed the way an experimental rate calibration would absorb them;
// converges to 1e-6 relative.  Throws a numeric error naming the largest
// feasible uniform scale when the request is out of reach (J1 arguments
// are confined to [0, j1_peak_x]).
std::vector<double> calibrate_amplitudes(const DeviceParams& device,
                                         const std::vector<int>& targets,
                                         const std::vector<double>& g_targets,
                                         double phase = -0.5 * pi);

// Largest uniform per-tone |g_eff| the device can reach on these targets.
double max_uniform_coupling(const DeviceParams& device, const std::vector<int>& targets);

enum class GateKind { sqrt_iswap, iswap };

// Duration of the two-qubit gate at effective coupling g_eff:
// (n + 1/4) pi / g_eff for sqrt-iSWAP, (n + 1/2) pi / g_eff for iSWAP.
double gate_time(double g_eff, GateKind kind, int n = 0);

// Time at which a single excitation on the common qubit is shared equally
// with n_targets resonant computational qubits (all per-tone couplings equal
// to g_per_tone): t = arccos(1/sqrt(n+1)) / (sqrt(n) g).
double w_share_time(double g_per_tone, int n_targets);

// Build a resonant drive (tone j at frequency detuning(j)) with amplitudes
// calibrated to a uniform per-tone coupling magnitude.  All tone phases are
// set to `phase` (default -pi/2, which makes the effective exchange real).
DriveConfig make_calibrated_drive(const DeviceParams& device,
                                  const std::vector<int>& targets,
                                  double g_per_tone, double duration,
                                  double phase = -pi / 2.0);

// The sub-device containing the common qubit plus the listed computational
// qubits only (strictly increasing indices >= 1), renumbered 1..k in the
// given order.  Bus, truncation and flux-noise description carry over.
// Simulating an n-qubit experiment on the subsystem it actually involves is
// exact when the dropped qubits stay in their ground state.
DeviceParams subsystem(const DeviceParams& device, const std::vector<int>& computational);

// --- transmon flux dispersion ---------------------------------------------
// omega01(Phi) = (omega_sweet01 + Ec) sqrt(|cos(pi Phi)|) - Ec, Phi in Phi0.

// Frequency at flux `phi` given the sweet-spot frequency and charging
// energy Ec = -alpha (all rad/s).
double transmon_freq_at_flux(double omega_sweet01, double ec, double phi);

// Flux bias (in Phi0, within [0, 1/2)) at which the qubit sits at
// omega_op01; requires omega_op01 <= omega_sweet01.
double flux_operating_point(double omega_op01, double omega_sweet01, double ec);

// d(omega01)/d(Phi) at the operating point, rad/s per Phi0 (negative on the
// falling side of the band; callers usually take the magnitude).
double flux_slope(double omega_op01, double omega_sweet01, double ec);

// Echo (1/f) dephasing rate from a flux-noise amplitude:
// Gamma_phi^E = sqrt(ln 2) |slope| sqrt(A_Phi).
double echo_rate_from_flux_noise(double slope, double sqrt_amp_phi0);

}  // namespace paragate
