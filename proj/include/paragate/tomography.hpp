// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paragate/qops.hpp"

namespace paragate {

// Measurement axis for one qubit.  Pre-rotations map the +1 eigenstate of
// the measured Pauli onto |0>, so outcome bit 0 always means eigenvalue +1:
//   X: (1/sqrt2) [[1, 1], [-1, 1]]     (|+>  -> |0>)
//   Y: (1/sqrt2) [[1, -i], [-i, 1]]    (|+i> -> |0>)
//   Z: identity
enum class PauliBasis { x, y, z };

using BasisSetting = std::vector<PauliBasis>;

// All 3^n per-qubit basis assignments, lexicographic with X < Y < Z and the
// first qubit slowest (ZZ..Z is the last setting).
std::vector<BasisSetting> all_settings(int n_qubits);

// 2x2 pre-rotation for one axis / their Kronecker product for a setting.
Matrix basis_rotation(PauliBasis basis);
Matrix setting_rotation(const BasisSetting& setting);

char basis_label(PauliBasis basis);
std::string setting_label(const BasisSetting& setting);
BasisSetting setting_from_label(const std::string& label);

// Simulated Pauli-basis counts.  `counts[s][k]` is the number of times
// outcome bitstring k (qubit 0 = most significant bit) was observed under
// settings[s]; fractional values are allowed so exact (infinite-shot)
// datasets can flow through the same reconstruction (`shots` = 0 then, and
// each row holds Born probabilities).
struct TomographyDataset {
  int n_qubits = 0;
  std::vector<BasisSetting> settings;
  std::vector<std::vector<double>> counts;
  double shots = 0.0;
  // Probability removed when the state was projected onto the two-level
  // computational subspace before sampling.
  double leakage = 0.0;
  bool leakage_warning = false;  // set when leakage exceeds 5%

  void validate() const;
};

// Project a (possibly three-level, multi-mode) state onto the two-level
// computational subspace of the kept modes: partial-trace everything else,
// drop rows/columns with any level >= 2, renormalize.
struct QubitProjection {
  Matrix rho;        // 2^m x 2^m, trace 1
  double leakage;    // probability discarded by the projection
};
QubitProjection project_to_qubits(const QuantumState& state, const std::vector<int>& modes);

// Multinomial sampling from Born probabilities after the ideal pre-rotation,
// one derived RNG stream per setting (parallel-safe, order-independent).
TomographyDataset simulate_measurements(const Matrix& rho,
                                        const std::vector<BasisSetting>& settings,
                                        int shots, std::uint64_t seed);
// Same, starting from a full simulator state: projects `modes` first and
// records the leakage (warning above 5%).
TomographyDataset simulate_measurements(const QuantumState& state,
                                        const std::vector<int>& modes,
                                        const std::vector<BasisSetting>& settings,
                                        int shots, std::uint64_t seed);
// Infinite-shot dataset: rows carry the exact Born probabilities.
TomographyDataset exact_dataset(const Matrix& rho,
                                const std::vector<BasisSetting>& settings);

struct ReconstructionResult {
  Matrix rho;                 // PSD, trace 1
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Maximum-likelihood reconstruction: diluted R·rho·R fixed point from the
// maximally mixed state.  Every iterate is PSD with unit trace and the
// log-likelihood never decreases (the dilution factor halves until a step
// improves it).  Requires an informationally complete setting set.
ReconstructionResult mle_reconstruct(const TomographyDataset& data, int max_iter = 2000,
                                     double tol = 1e-10);

// Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)) — the amplitude
// (square-root) convention — and its squared companion.  Symmetric and
// unitarily invariant; for pure sigma = |psi><psi| it reduces to
// sqrt(<psi|rho|psi>).
double state_fidelity(const Matrix& rho, const Matrix& sigma);
double state_fidelity_squared(const Matrix& rho, const Matrix& sigma);

// Per-qubit Z rotation diag(1, e^{i angle_q}) applied as Z rho Z†; the
// diagonal of rho is untouched.
Matrix apply_virtual_z(const Matrix& rho, const std::vector<double>& angles);

struct VirtualZResult {
  Matrix rho;                   // aligned state
  std::vector<double> angles;   // one per qubit
  double fidelity = 0.0;        // state_fidelity after alignment
};

// Per-qubit Z angles maximizing state_fidelity(Z rho Z†, target), found by
// coordinate golden-section passes plus a simplex polish.  When no angle
// assignment beats zero (already aligned, or diagonal rho making the
// objective flat), all-zero angles are returned.
VirtualZResult virtual_z_correction(const Matrix& rho, const Matrix& target);

// Dataset (de)serialization; round trip is exact.
std::string dataset_to_json(const TomographyDataset& data);
TomographyDataset dataset_from_json(const std::string& text);

}  // namespace paragate
