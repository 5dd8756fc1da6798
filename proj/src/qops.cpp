// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/qops.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

namespace paragate {

QuantumState QuantumState::from_ket(LevelScheme s, Vector psi) {
  require(psi.size() == s.dim(), "ket length does not match level scheme");
  QuantumState st;
  st.scheme = std::move(s);
  st.ket = std::move(psi);
  st.pure = true;
  st.validate();
  return st;
}

QuantumState QuantumState::from_density(LevelScheme s, Matrix rho) {
  require(rho.rows() == s.dim() && rho.cols() == s.dim(),
          "density matrix shape does not match level scheme");
  QuantumState st;
  st.scheme = std::move(s);
  st.density = std::move(rho);
  st.pure = false;
  st.validate();
  return st;
}

void QuantumState::validate() const {
  if (pure) {
    const double n = ket.norm();
    require(std::abs(n - 1.0) <= 1e-9, "ket is not normalized");
    return;
  }
  require((density - density.adjoint()).cwiseAbs().maxCoeff() <= 1e-9,
          "density matrix is not Hermitian");
  require(std::abs(density.trace().real() - 1.0) <= 1e-9 &&
              std::abs(density.trace().imag()) <= 1e-9,
          "density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(density, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-8,
          "density matrix has a significantly negative eigenvalue");
}

std::pair<Matrix, Matrix> ladder_ops(int d) {
  require(d >= 2, "ladder operators need at least two levels");
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {a, a.adjoint()};
}

Matrix number_op(int d) {
  require(d >= 2, "number operator needs at least two levels");
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

OperatorMatrix embed(const Matrix& op, int mode, const LevelScheme& scheme) {
  require(mode >= 0 && mode < scheme.n_modes(), "embed: mode index out of range");
  const int d = scheme.dims[static_cast<size_t>(mode)];
  require(op.rows() == d && op.cols() == d,
          "embed: operator dimension does not match the mode");
  Matrix out = Matrix::Identity(1, 1);
  for (int m = 0; m < scheme.n_modes(); ++m) {
    const int dm = scheme.dims[static_cast<size_t>(m)];
    out = (m == mode) ? kron(out, op) : kron(out, Matrix(Matrix::Identity(dm, dm)));
  }
  return OperatorMatrix{scheme, std::move(out)};
}

cxd expectation(const QuantumState& state, const OperatorMatrix& op) {
  require(state.scheme == op.scheme, "expectation: level schemes do not match");
  if (state.pure) return state.ket.dot(op.m * state.ket);  // dot conjugates lhs
  return (op.m * state.density).trace();
}

QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep) {
  const LevelScheme& s = state.scheme;
  require(!keep.empty(), "partial_trace: must keep at least one mode");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "partial_trace: duplicate mode index");
  require(std::is_sorted(keep.begin(), keep.end()),
          "partial_trace: keep list must be in ascending mode order");
  for (int m : keep)
    require(m >= 0 && m < s.n_modes(), "partial_trace: mode index out of range");

  std::vector<int> traced;
  for (int m = 0; m < s.n_modes(); ++m)
    if (!std::binary_search(sorted.begin(), sorted.end(), m)) traced.push_back(m);

  std::vector<int> keep_dims, traced_dims;
  for (int m : keep) keep_dims.push_back(s.dims[static_cast<size_t>(m)]);
  for (int m : traced) traced_dims.push_back(s.dims[static_cast<size_t>(m)]);
  const int dk = std::accumulate(keep_dims.begin(), keep_dims.end(), 1, std::multiplies<>());
  const int dt = std::accumulate(traced_dims.begin(), traced_dims.end(), 1, std::multiplies<>());

  // Flat index from (kept multi-index, traced multi-index).
  auto flat = [&](int ik, int it) {
    int idx = 0;
    int rk = ik, rt = it;
    // Decode both multi-indices (row-major within their own groups) and
    // recombine with the full-scheme strides.
    std::vector<int> occ(static_cast<size_t>(s.n_modes()), 0);
    for (int p = static_cast<int>(keep.size()) - 1; p >= 0; --p) {
      occ[static_cast<size_t>(keep[static_cast<size_t>(p)])] = rk % keep_dims[static_cast<size_t>(p)];
      rk /= keep_dims[static_cast<size_t>(p)];
    }
    for (int p = static_cast<int>(traced.size()) - 1; p >= 0; --p) {
      occ[static_cast<size_t>(traced[static_cast<size_t>(p)])] = rt % traced_dims[static_cast<size_t>(p)];
      rt /= traced_dims[static_cast<size_t>(p)];
    }
    for (int m = 0; m < s.n_modes(); ++m) idx += occ[static_cast<size_t>(m)] * s.stride(m);
    return idx;
  };

  Matrix rho = state.to_density();
  Matrix red = Matrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j) {
      cxd acc = 0.0;
      for (int t = 0; t < dt; ++t) acc += rho(flat(i, t), flat(j, t));
      red(i, j) = acc;
    }

  LevelScheme rs{std::vector<int>(keep_dims.begin(), keep_dims.end())};
  QuantumState out;
  out.scheme = rs;
  out.density = std::move(red);
  out.pure = false;
  return out;
}

int basis_index(const LevelScheme& scheme, const std::vector<int>& occupations) {
  require(static_cast<int>(occupations.size()) == scheme.n_modes(),
          "basis index: occupation list length does not match scheme");
  int idx = 0;
  for (int m = 0; m < scheme.n_modes(); ++m) {
    const int o = occupations[static_cast<size_t>(m)];
    require(o >= 0 && o < scheme.dims[static_cast<size_t>(m)],
            "basis index: occupation out of range");
    idx += o * scheme.stride(m);
  }
  return idx;
}

QuantumState basis_ket(const LevelScheme& scheme, const std::vector<int>& occupations) {
  Vector psi = Vector::Zero(scheme.dim());
  psi(basis_index(scheme, occupations)) = 1.0;
  return QuantumState::from_ket(scheme, std::move(psi));
}

SectorBasis excitation_sector(const LevelScheme& scheme, int max_excitation) {
  require(max_excitation >= 0, "excitation sector: cap must be non-negative");
  SectorBasis sector;
  sector.scheme = scheme;
  sector.max_excitation = max_excitation;
  const int dim = scheme.dim();
  for (int idx = 0; idx < dim; ++idx) {
    int rem = idx, total = 0;
    for (int m = 0; m < scheme.n_modes(); ++m) {
      const int st = scheme.stride(m);
      total += rem / st;
      rem %= st;
    }
    if (total <= max_excitation) sector.indices.push_back(idx);
  }
  return sector;
}

Matrix restrict_op(const Matrix& full, const SectorBasis& sector) {
  require(full.rows() == sector.scheme.dim() && full.cols() == sector.scheme.dim(),
          "restrict_op: operator does not match the sector's full scheme");
  const int d = sector.dim();
  Matrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out(i, j) = full(sector.indices[static_cast<size_t>(i)],
                       sector.indices[static_cast<size_t>(j)]);
  return out;
}

Vector restrict_ket(const Vector& full, const SectorBasis& sector) {
  require(full.size() == sector.scheme.dim(),
          "restrict_ket: ket does not match the sector's full scheme");
  const int d = sector.dim();
  Vector out(d);
  for (int i = 0; i < d; ++i) out(i) = full(sector.indices[static_cast<size_t>(i)]);
  return out;
}

Matrix unrestrict_density(const Matrix& sector_rho, const SectorBasis& sector) {
  const int d = sector.dim();
  require(sector_rho.rows() == d && sector_rho.cols() == d,
          "unrestrict_density: density does not match the sector");
  Matrix out = Matrix::Zero(sector.scheme.dim(), sector.scheme.dim());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out(sector.indices[static_cast<size_t>(i)], sector.indices[static_cast<size_t>(j)]) =
          sector_rho(i, j);
  return out;
}

int max_excitation_of(const QuantumState& state, double tol) {
  const LevelScheme& s = state.scheme;
  const int dim = s.dim();
  auto excitation_of_index = [&](int idx) {
    int rem = idx, total = 0;
    for (int m = 0; m < s.n_modes(); ++m) {
      const int st = s.stride(m);
      total += rem / st;
      rem %= st;
    }
    return total;
  };
  int cap = 0;
  if (state.pure) {
    for (int i = 0; i < dim; ++i)
      if (std::norm(state.ket(i)) > tol) cap = std::max(cap, excitation_of_index(i));
  } else {
    for (int i = 0; i < dim; ++i)
      if (std::abs(state.density(i, i)) > tol) cap = std::max(cap, excitation_of_index(i));
  }
  return cap;
}

}  // namespace paragate
