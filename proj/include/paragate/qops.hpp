// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "paragate/common.hpp"

namespace paragate {

// Dimension bookkeeping for a register of bosonic modes (anharmonic
// oscillators truncated to a few levels each).  Mode 0 is, by convention
// everywhere in this library, the flux-tunable common qubit.
struct LevelScheme {
  std::vector<int> dims;

  LevelScheme() = default;
  LevelScheme(std::initializer_list<int> d) : dims(d) { validate(); }
  explicit LevelScheme(std::vector<int> d) : dims(std::move(d)) { validate(); }

  static LevelScheme uniform(int n_modes, int levels) {
    require(n_modes >= 1, "level scheme needs at least one mode");
    require(levels >= 2, "each mode needs at least two levels");
    return LevelScheme(std::vector<int>(static_cast<size_t>(n_modes), levels));
  }

  int n_modes() const { return static_cast<int>(dims.size()); }
  int dim() const {
    int d = 1;
    for (int x : dims) d *= x;
    return d;
  }
  // Row-major index stride of `mode` in the tensor-product basis
  // (mode 0 is the slowest index).
  int stride(int mode) const {
    int s = 1;
    for (int m = mode + 1; m < n_modes(); ++m) s *= dims[static_cast<size_t>(m)];
    return s;
  }
  bool operator==(const LevelScheme& o) const { return dims == o.dims; }

  void validate() const {
    require(!dims.empty(), "level scheme needs at least one mode");
    for (int x : dims) require(x >= 2, "each mode needs at least two levels");
  }
};

// A matrix tagged with the level scheme it acts on.
struct OperatorMatrix {
  LevelScheme scheme;
  Matrix m;
};

// A state of the register: either a ket or a density matrix.  Density form
// is produced lazily; most code paths work with whichever form was supplied.
struct QuantumState {
  LevelScheme scheme;
  Vector ket;      // used when pure == true
  Matrix density;  // used when pure == false
  bool pure = true;

  static QuantumState from_ket(LevelScheme s, Vector psi);
  static QuantumState from_density(LevelScheme s, Matrix rho);

  int dim() const { return scheme.dim(); }
  Matrix to_density() const { return pure ? Matrix(ket * ket.adjoint()) : density; }
  // Hermiticity / trace-one / positivity checks (tolerances documented at
  // the implementation).  Throws on violation.
  void validate() const;
};

// Annihilation and creation operators for a single d-level mode.
std::pair<Matrix, Matrix> ladder_ops(int d);

// Number operator diag(0, 1, ..., d-1).
Matrix number_op(int d);

// Kronecker product (row-major tensor convention, factor order = argument
// order).
Matrix kron(const Matrix& a, const Matrix& b);

// Lift a single-mode operator onto `mode` of the register, identity
// elsewhere.
OperatorMatrix embed(const Matrix& op, int mode, const LevelScheme& scheme);

// <op> in `state`; requires matching schemes.
cxd expectation(const QuantumState& state, const OperatorMatrix& op);

// Trace out every mode not listed in `keep` (kept modes stay in their
// original relative order).  Always returns a density-form state.
QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep);

// Basis ket |occupations[0], occupations[1], ...>.
QuantumState basis_ket(const LevelScheme& scheme, const std::vector<int>& occupations);

// Flat tensor index of a basis configuration.
int basis_index(const LevelScheme& scheme, const std::vector<int>& occupations);

// --- restriction to a total-excitation sector ----------------------------
//
// Every Hamiltonian built in this library commutes with total excitation
// number, and the collapse channels only lower or preserve it, so a state
// supported on <= k excitations stays there exactly.  Restricting operators
// to that sector is a pure change of basis, not an approximation; it is what
// makes Monte-Carlo error budgets cheap.
struct SectorBasis {
  LevelScheme scheme;         // full scheme this sector was cut from
  int max_excitation = 0;     // total-excitation cap
  std::vector<int> indices;   // full-space flat index per sector basis vector

  int dim() const { return static_cast<int>(indices.size()); }
};

// All basis configurations with total excitation <= max_excitation.
SectorBasis excitation_sector(const LevelScheme& scheme, int max_excitation);

// Project a full-space operator / ket into the sector basis.
Matrix restrict_op(const Matrix& full, const SectorBasis& sector);
Vector restrict_ket(const Vector& full, const SectorBasis& sector);

// Embed a sector-basis density matrix back into the full space.
Matrix unrestrict_density(const Matrix& sector_rho, const SectorBasis& sector);

// Total excitation of a state's support (largest occupied sector), used to
// pick the restriction automatically.  Components with weight below `tol`
// are ignored.
int max_excitation_of(const QuantumState& state, double tol = 1e-12);

}  // namespace paragate
