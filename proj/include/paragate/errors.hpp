// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "paragate/device.hpp"
#include "paragate/qops.hpp"

namespace paragate {

// Which incoherent / parasitic channels a simulation includes.  Decoherence
// is parameterized by per-qubit rates so individual qubits can be switched
// off; ZZ and flux noise are global toggles resolved against DeviceParams.
struct NoiseModel {
  std::vector<double> gamma1;     // relaxation rates, 1/s (0 disables)
  std::vector<double> gamma_phi;  // pure-dephasing rates, 1/s (0 disables)
  bool zz_on = true;
  bool flux_on = true;

  static NoiseModel from_device(const DeviceParams& device);
  static NoiseModel none(int n_qubits);

  NoiseModel without_decoherence() const;
  NoiseModel without_zz() const;
  NoiseModel without_flux() const;
  bool any_decoherence() const;
};

// First-order decoherence infidelity of an n-qubit entangling operation of
// duration t: eps = alpha_n * t * sum_q (gamma1_q + gamma_phi_q), with
// alpha_n = 2^(n-1) / (2^n + 1)  (2/5, 4/9, 8/17 for n = 2, 3, 4).
double analytic_decoherence_infidelity(const std::vector<double>& gamma1,
                                       const std::vector<double>& gamma_phi, double t);
double decoherence_prefactor(int n_qubits);

// Single-qubit Kraus channels (2x2).
std::vector<Matrix> amplitude_damping_kraus(double p1);
std::vector<Matrix> phase_damping_kraus(double p_phi);
// Amplitude damping followed by phase damping.
std::vector<Matrix> qubit_damping_kraus(double p1, double p_phi);

// Tensor product of per-qubit Kraus sets (all combinations).
std::vector<Matrix> kron_kraus(const std::vector<Matrix>& a, const std::vector<Matrix>& b);

// Average fidelity of a d-dimensional channel to the identity:
// F = (d + sum_k |Tr E_k|^2) / (d (d + 1)).
double kraus_average_fidelity(const std::vector<Matrix>& kraus);

// Standard deviation of the quasi-static flux offset accumulated from 1/f
// noise over a gate of length t_gate: sigma = sqrt(A ln(1/(t_gate f_low)))
// in Phi0 (sqrt_amp_phi0 = sqrt(A)).
double quasi_static_sigma(double sqrt_amp_phi0, double t_gate, double f_low_hz);

// Synthesize a 1/f flux-noise trace (Phi0 units) of n samples spaced dt
// apart: a sum of log-spaced random-phase tones with an S(f) = A/f spectrum
// between f_low and the Nyquist frequency.
std::vector<double> flux_noise_trace(double sqrt_amp_phi0, int n_samples, double dt,
                                     double f_low_hz, Rng& rng);

// --- channel attribution -----------------------------------------------

enum class BudgetScenario { w_state, gate };

struct BudgetRequest {
  BudgetScenario scenario = BudgetScenario::w_state;
  std::vector<int> targets;  // participating computational qubits
  DriveConfig drive;
  GateKind gate = GateKind::sqrt_iswap;
  int mc_realizations = 1000;  // quasi-static flux samples
  int threads = 1;             // worker threads for the batched evolutions
};

struct ChannelBudget {
  double fidelity = 0.0;       // all channels on
  double fidelity_std_err = 0.0;
  double eps_decoherence = 0.0;  // fidelity gain with decoherence disabled
  double eps_zz = 0.0;           // fidelity gain with static ZZ disabled
  double eps_flux = 0.0;         // fidelity gain with flux noise disabled
  double eps_flux_std_err = 0.0;
  double sigma_phi0 = 0.0;       // quasi-static spread used (Phi0)
  double duration = 0.0;         // scored evolution time
  int mc_realizations = 0;
};

// Runs the scenario four times -- all channels on, decoherence off, ZZ off,
// flux off -- and attributes per-channel infidelity as the fidelity gained
// when that channel is disabled.  Flux noise is averaged over
// `mc_realizations` Gaussian quasi-static offsets (common random numbers
// across the four runs); the Monte-Carlo standard error is reported.
ChannelBudget error_budget(const DeviceParams& device, const BudgetRequest& request,
                           std::uint64_t seed);

}  // namespace paragate
