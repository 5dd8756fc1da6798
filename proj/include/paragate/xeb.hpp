// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "paragate/device.hpp"
#include "paragate/dynamics.hpp"
#include "paragate/errors.hpp"
#include "paragate/qops.hpp"

namespace paragate {

// The 64-element single-qubit gate set used between entangler cycles:
// gate(n, m) = Rz(m*pi/8) · R_axis(n*pi/8, pi/2), n, m in 0..7, where
// R_axis(a, pi/2) is a pi/2 rotation about the xy-plane axis at angle a and
// Rz acts afterwards.  gate(0, 0) is a pure X_{pi/2}.
struct XebGateSet {
  std::vector<Matrix> gates;  // 64 unitaries, 2x2, index = 8*n + m
};
XebGateSet build_gate_set();

// Cross-entropy fidelity
//   F = (H(u, p_th) - H(p_exp, p_th)) / (H(u, p_th) - H(p_th, p_th)),
// H(p, q) = -sum p(x) log2 q(x), u uniform.  Linear in p_exp; 1 when
// p_exp = p_th, 0 when p_exp is uniform.  p_th entries below 1e-12 are
// floored and the distribution renormalized (*floored set when non-null).
double xeb_fidelity(const std::vector<double>& p_exp, const std::vector<double>& p_th,
                    bool* floored = nullptr);

struct DecayFit {
  double amplitude = 1.0;   // A in F(m) = A * base^m
  double base = 1.0;        // per-cycle fidelity
  double base_std_err = 0.0;
  bool log_space = true;    // false = linear-space fallback (non-positive F)
};

// Least-squares fit of F(m) = A * base^m, in log space when every mean
// fidelity is positive, otherwise directly in linear space (flagged).
DecayFit fit_decay(const std::vector<int>& depths, const std::vector<double>& mean_f);

struct XebOptions {
  std::vector<int> depths;       // strictly increasing cycle counts
  int n_seq = 20;                // random sequences per depth
  int shots = 0;                 // 0 = exact probabilities, else multinomial
  double depolarizing = 0.0;     // per-cycle global depolarizing (ideal runs)
  bool include_two_qubit_gate = true;  // false = single-qubit-only reference
  double t_single_qubit = 0.0;   // extra per-cycle time in the phase ledger
  int threads = 1;               // workers for the gate-process evolution
};

struct XebRun {
  std::vector<int> depths;
  Eigen::MatrixXd fidelities;        // (depth index, sequence index)
  std::vector<double> mean_fidelity; // per depth
  DecayFit fit;
  // Drive-tone phase at the start of each cycle, phi(k) = phi(0) +
  // k * Delta * t_cycle reduced mod 2pi (device runs; the simulated pulse
  // runs on its own clock with this phase, which makes every cycle realize
  // the same calibrated process).
  std::vector<double> cycle_phases;
  double gate_leakage = 0.0;     // trace retention deficit of one cycle
};

// Exact/sampled XEB of the ideal entangler (optionally with an injected
// per-cycle depolarizing channel, the calibration oracle for fit_decay).
XebRun run_xeb_ideal(GateKind kind, const XebOptions& options, std::uint64_t seed);

// XEB of the simulated device gate: the entangler is the full time-dynamics
// process of `drive` on (common, target) under `noise` (virtual-Z folded in
// once, as hardware compiles phase corrections into the following
// single-qubit gates); single-qubit gates are ideal and instantaneous.
XebRun run_xeb_device(const DeviceParams& device, const DriveConfig& drive, int target,
                      GateKind kind, const NoiseModel& noise, const XebOptions& options,
                      std::uint64_t seed);

}  // namespace paragate
