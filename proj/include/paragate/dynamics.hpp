// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "paragate/device.hpp"
#include "paragate/errors.hpp"
#include "paragate/integrate.hpp"
#include "paragate/qops.hpp"

namespace paragate {

// How the time dependence is represented:
//  - full_drive: the common qubit's frequency modulation enters literally as
//    a diagonal drive term; exchange terms rotate at the static detunings.
//  - effective: the drive is replaced by its sideband-averaged static
//    exchange Hamiltonian (Bessel-weighted couplings).  Used for cross
//    checks and cheap scans, never silently.
enum class Frame { full_drive, effective };

struct EvolveOptions {
  OdeOptions ode{};
  Frame frame = Frame::full_drive;
  // Worker threads for batched evolutions.  Results are bitwise independent
  // of this setting (work is cut into fixed-size column chunks).
  int threads = 1;
  // Static frequency offset of the common qubit (rad/s), e.g. a quasi-static
  // flux-noise draw already converted through the flux slope.
  double flux_offset = 0.0;
  // Optional sampled time-dependent offset added on top (rad/s vs time, in
  // equal steps of waveform_dt starting at t = 0, linearly interpolated).
  std::vector<double> flux_waveform;
  double waveform_dt = 0.0;
  // Restrict to the invariant total-excitation sector of the initial state
  // (exact for every Hamiltonian this library builds).  Disable to run the
  // full tensor space, e.g. in tests that validate the restriction.
  bool sector_restriction = true;
  // Keep the sector-basis density at every sample time in the Trajectory.
  bool store_densities = false;
};

struct Trajectory {
  std::vector<double> times;
  // populations(q, k): probability of level 1 of qubit q at times[k].
  Eigen::MatrixXd populations;
  // leakage(q, k): total probability above level 1.
  Eigen::MatrixXd leakage;
  QuantumState final_state;  // density form, full tensor space
  // Sector-basis densities at the sample times (only when
  // EvolveOptions::store_densities is set) and the sector they live in.
  SectorBasis sector;
  std::vector<Matrix> sampled_densities;
};

// Integrate the Lindblad master equation for the device under the drive.
// `sample_times` must be sorted within [0, drive.duration].
Trajectory evolve(const DeviceParams& device, const DriveConfig& drive,
                  const QuantumState& initial, const NoiseModel& noise,
                  const std::vector<double>& sample_times = {},
                  const EvolveOptions& options = {});

// Batched evolution: every initial state is evolved against every static
// flux offset, sharing one adaptive integration (one wide block of density
// matrices).  Columns are ordered state-major: block index = s * n_offsets + r.
// Returns the final density of each (state, offset) pair in the full space
// only on demand via `final_density`; the raw block stays in the sector
// basis for cheap scoring.
struct BatchResult {
  SectorBasis sector;
  Matrix block;  // dim x (dim * n_states * n_offsets)
  int n_states = 0;
  int n_offsets = 0;

  // Sector-basis density of pair (state s, offset r).
  Eigen::Ref<const Matrix> sector_density(int s, int r) const;
  Matrix full_density(int s, int r) const;
};

BatchResult evolve_batch(const DeviceParams& device, const DriveConfig& drive,
                         const std::vector<QuantumState>& initials,
                         const NoiseModel& noise,
                         const std::vector<double>& flux_offsets,
                         const EvolveOptions& options = {});

// --- resonance scans -------------------------------------------------------

struct ChevronResult {
  std::vector<double> frequency_offsets;  // rad/s, added to the tone frequency
  std::vector<double> times;
  // transfer(i, k): target-qubit level-1 population at offset i, time k.
  Eigen::MatrixXd transfer;
  // Offset maximizing the time-averaged transfer (interpolated), rad/s.
  double peak_offset = 0.0;
};

// Sweep the single tone's modulation frequency around its nominal value and
// record excitation transfer from the common qubit into the target.
ChevronResult chevron_scan(const DeviceParams& device, const DriveConfig& drive,
                           int target, const std::vector<double>& frequency_offsets,
                           const std::vector<double>& times,
                           const NoiseModel& noise, const EvolveOptions& options = {});

// --- canned experiments ------------------------------------------------------

struct WStateResult {
  QuantumState state;          // final density matrix, full space
  double fidelity = 0.0;       // Uhlmann fidelity to the W target, after virtual-Z
  double fidelity_raw = 0.0;   // before virtual-Z
  std::vector<double> z_phases;  // per participating qubit (common first)
  double share_time = 0.0;     // evolution time actually scored
  DriveConfig drive;           // the calibrated drive used
};

// Ideal W target: one excitation shared equally by the common qubit and the
// targets (uniform amplitudes, zero phases).
QuantumState w_target(const LevelScheme& scheme, const std::vector<int>& targets);

// Calibrate a resonant drive at g_per_tone on each target, evolve
// |1 0 ... 0> for the equal-sharing time (optionally fine-searching the
// fidelity maximum in a +-scan window), apply optimal virtual-Z corrections,
// and score against the W target.
struct WStateRequest {
  std::vector<int> targets;
  double g_per_tone = 0.0;     // magnitude, rad/s
  double ramp = 2e-9;
  double duration = 0.0;       // 0 = equal-sharing time from w_share_time
  double time_scan_halfwidth = 0.0;  // 0 = score exactly at `duration`
  int time_scan_points = 33;
};
WStateResult generate_w_state(const DeviceParams& device, const WStateRequest& request,
                              const NoiseModel& noise, const EvolveOptions& options = {});

// --- two-qubit gate characterization ---------------------------------------

struct GateProcessResult {
  // Average gate fidelity from the propagated process (computational
  // subspace, entanglement-fidelity identity).
  double avg_fidelity = 0.0;
  // Mean state fidelity over the 36 two-qubit stabilizer-ish product states
  // (|0>, |1>, |+>, |->, |+i>, |-i>)^{x2}.
  double state_mean_fidelity = 0.0;
  // Mean over the 4 computational-basis products / the 4 (|+>,|+i>)^{x2}
  // products (population-sensitive vs phase-sensitive subsets).
  double basis_subset_fidelity = 0.0;
  double phase_subset_fidelity = 0.0;
  double leakage = 0.0;          // trace lost from the computational subspace
  // Virtual-Z frame phases {out_common, out_target, in_common, in_target}:
  // the free rotating-frame origins chosen on each qubit before and after
  // the pulse (the gate is scored up to local Z rotations).
  std::vector<double> z_phases;
  Matrix ideal_unitary;          // 4x4 computational-subspace target
};

// Propagate the full process of a parametric two-qubit gate between the
// common qubit and `target`, then score it against the ideal sqrt-iSWAP /
// iSWAP with optimal virtual-Z corrections.
struct GateProcessRequest {
  int target = 1;
  GateKind kind = GateKind::sqrt_iswap;
  DriveConfig drive;          // fully specified drive program
  double flux_offset = 0.0;   // static common-qubit offset (rad/s)
};
GateProcessResult gate_process(const DeviceParams& device, const GateProcessRequest& request,
                               const NoiseModel& noise, const EvolveOptions& options = {});

// Ideal computational-subspace unitary of the exchange gate (basis order
// 00, 01, 10, 11 on (common, target)).
Matrix ideal_exchange_unitary(GateKind kind);

// --- process reconstruction helpers ----------------------------------------
// A two-qubit process is captured by evolving 16 Hermitian basis states of
// the pair's computational operator space; the budget code reuses these to
// score one process per noise realization out of a single batch.

// The 16 basis states: |i><i|, and (|i>+|j>)/sqrt2, (|i>+i|j>)/sqrt2
// projectors for i < j, embedded into `scheme` (spectator modes in |0>).
std::vector<QuantumState> process_basis_states(const LevelScheme& scheme, int q_a, int q_b);

// Rebuild the 16x16 computational-subspace transfer matrix
// T[(4k+l),(4i+j)] = <k| L(|i><j|) |l> from the 16 evolved finals (sector
// basis, same order as process_basis_states).
Matrix process_transfer(const std::vector<Eigen::Ref<const Matrix>>& finals,
                        const SectorBasis& sector, int q_a, int q_b);

// Entanglement-fidelity-based average gate fidelity of the transfer matrix
// against target_u up to virtual-Z frame rotations.  z_phases holds either
// two phases {out0, out1} (output-side only) or four
// {out0, out1, in0, in1}; the scored channel is
// Z_out L(Z_in rho Z_in†) Z_out†.  Both directions are physically free:
// a parametric gate is defined relative to each qubit's rotating-frame
// origin, which the drive phase and per-gate frame updates set.
double average_gate_fidelity(const Matrix& transfer, const Matrix& target_u,
                             const std::vector<double>& z_phases);

// Phases {out0, out1, in0, in1} maximizing average_gate_fidelity.
std::vector<double> calibrate_virtual_z(const Matrix& transfer, const Matrix& target_u);

// <psi'| Z_out L(Z_in rho Z_in†) Z_out† |psi'> for a pure 4-dim input
// rho = |psi><psi| and target |psi'> = U|psi>.
double state_fidelity_through(const Matrix& transfer, const Matrix& rho_in,
                              const Matrix& target_u, const std::vector<double>& z_phases);

// Trace retained in the computational subspace, averaged over the four
// basis-state inputs (1 - this = leakage).
double process_trace_retention(const Matrix& transfer);

// The 36 single-qubit-product probe inputs (|0>,|1>,|+>,|->,|+i>,|-i>)^{x2}
// as 4x4 densities, with subset masks: index into {basis, phase, other}.
struct ProbeSet {
  std::vector<Matrix> states;       // 36 densities, 4x4
  std::vector<int> basis_subset;    // indices with both factors in {|0>,|1>}
  std::vector<int> phase_subset;    // indices with both factors in {|+>,|+i>}
};
const ProbeSet& two_qubit_probe_set();

// Uhlmann fidelity of a sector-basis density to the W target on
// {common} ∪ targets after optimal per-qubit virtual-Z (golden-section
// coordinate passes + simplex polish); optionally returns the phases
// (common qubit first).
double w_fidelity(const Matrix& sector_rho, const SectorBasis& sector,
                  const std::vector<int>& targets, std::vector<double>* phases = nullptr);

}  // namespace paragate
