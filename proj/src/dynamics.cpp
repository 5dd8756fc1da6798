// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include "paragate/bessel.hpp"
#include "paragate/optimize.hpp"

namespace paragate {
namespace {

// Fixed batching granularity: results are assembled chunk by chunk, so they
// do not depend on how many worker threads execute the chunks.
constexpr int kChunkColumns = 128;

struct ExchangeTerm {
  cxd coeff;     // static prefactor
  double delta;  // frame rotation frequency, rad/s
  std::vector<std::tuple<int, int, double>> elems;  // (row, col, weight) of a0 a_j†
};

struct JumpOp {
  std::vector<std::tuple<int, int, double>> elems;  // (row, col, value), value real
};

// Sector-restricted operator data for one (device, drive, noise) problem.
struct Model {
  SectorBasis sector;
  int d = 0;
  int n_modes = 0;
  std::vector<std::vector<int>> occ;  // occupations per sector basis state
  Eigen::VectorXd h_diag;             // static diagonal of H (rad/s)
  Eigen::VectorXd n0;                 // common-qubit occupation per state
  Matrix n0_diff;                     // n0(i) - n0(j), complex-cast for cwise use
  std::vector<ExchangeTerm> exchange;
  std::vector<JumpOp> jumps;
  Eigen::VectorXd k_diag;  // sum_C C†C (diagonal for our jump set)
  // Drive (full_drive frame only; empty in the effective frame).
  std::vector<DriveTone> tones;
  double ramp = 0.0;
  double duration = 0.0;
  std::vector<double> waveform;  // optional sampled flux offset, rad/s
  double waveform_dt = 0.0;

  double envelope(double t) const {
    if (ramp <= 0.0) return 1.0;
    if (t <= 0.0 || t >= duration) return 0.0;
    if (t < ramp) return 0.5 * (1.0 - std::cos(pi * t / ramp));
    if (t > duration - ramp) return 0.5 * (1.0 - std::cos(pi * (duration - t) / ramp));
    return 1.0;
  }

  // Common-qubit frequency offset: modulation tones plus sampled waveform.
  double drive_value(double t) const {
    double v = 0.0;
    if (!tones.empty()) {
      const double env = envelope(t);
      for (const DriveTone& tone : tones)
        v += tone.amplitude * env * std::sin(tone.frequency * t + tone.phase);
    }
    if (!waveform.empty()) {
      const double u = t / waveform_dt;
      const auto n = static_cast<long>(waveform.size());
      long i = static_cast<long>(std::floor(u));
      if (i < 0) i = 0;
      if (i >= n - 1) {
        v += waveform.back();
      } else {
        const double f = u - static_cast<double>(i);
        v += (1.0 - f) * waveform[static_cast<size_t>(i)] +
             f * waveform[static_cast<size_t>(i + 1)];
      }
    }
    return v;
  }
};

std::vector<int> occupations_of(const LevelScheme& scheme, int flat) {
  std::vector<int> occ(static_cast<size_t>(scheme.n_modes()));
  for (int m = 0; m < scheme.n_modes(); ++m) {
    const int st = scheme.stride(m);
    occ[static_cast<size_t>(m)] = flat / st;
    flat %= st;
  }
  return occ;
}

Model build_model(const DeviceParams& device, const DriveConfig& drive,
                  const NoiseModel& noise, const EvolveOptions& options,
                  int max_excitation) {
  const int n = device.n_qubits();
  const LevelScheme scheme = LevelScheme::uniform(n, device.truncation);
  int cap_full = 0;
  for (int dm : scheme.dims) cap_full += dm - 1;
  const int cap = options.sector_restriction ? std::min(max_excitation, cap_full) : cap_full;

  Model m;
  m.sector = excitation_sector(scheme, cap);
  m.d = m.sector.dim();
  m.n_modes = n;
  for (int i = 0; i < m.d; ++i)
    m.occ.push_back(occupations_of(scheme, m.sector.indices[static_cast<size_t>(i)]));

  // Full-space flat index -> sector index.
  std::vector<int> lookup(static_cast<size_t>(scheme.dim()), -1);
  for (int i = 0; i < m.d; ++i) lookup[static_cast<size_t>(m.sector.indices[static_cast<size_t>(i)])] = i;
  auto sector_index = [&](const std::vector<int>& occ) {
    return lookup[static_cast<size_t>(basis_index(scheme, occ))];
  };

  // Static diagonal: anharmonicity and (optionally) the cross-Kerr ZZ terms.
  m.h_diag = Eigen::VectorXd::Zero(m.d);
  m.n0 = Eigen::VectorXd::Zero(m.d);
  for (int i = 0; i < m.d; ++i) {
    const auto& occ = m.occ[static_cast<size_t>(i)];
    double h = 0.0;
    for (int q = 0; q < n; ++q) {
      const double nq = occ[static_cast<size_t>(q)];
      h += 0.5 * device.qubits[static_cast<size_t>(q)].alpha * nq * (nq - 1.0);
    }
    if (noise.zz_on) {
      for (int j = 1; j < n; ++j)
        h += device.qubits[static_cast<size_t>(j)].zz * occ[0] * occ[static_cast<size_t>(j)];
    }
    m.h_diag(i) = h;
    m.n0(i) = occ[0];
  }
  m.n0_diff = Matrix::Zero(m.d, m.d);
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) m.n0_diff(i, j) = m.n0(i) - m.n0(j);

  // Exchange couplings a0 a_j† (+ h.c. applied at evaluation time).
  auto exchange_elems = [&](int j) {
    std::vector<std::tuple<int, int, double>> elems;
    for (int i = 0; i < m.d; ++i) {
      const auto& occ = m.occ[static_cast<size_t>(i)];
      if (occ[0] < 1) continue;
      if (occ[static_cast<size_t>(j)] >= scheme.dims[static_cast<size_t>(j)] - 1) continue;
      std::vector<int> to = occ;
      to[0] -= 1;
      to[static_cast<size_t>(j)] += 1;
      const int r = sector_index(to);
      if (r < 0) continue;  // cannot happen: excitation is conserved
      elems.emplace_back(r, i,
                         std::sqrt(static_cast<double>(occ[0]) *
                                   (occ[static_cast<size_t>(j)] + 1.0)));
    }
    return elems;
  };

  if (options.frame == Frame::full_drive) {
    for (int j = 1; j < n; ++j) {
      ExchangeTerm term;
      term.coeff = device.coupling(j);
      term.delta = device.detuning(j);
      term.elems = exchange_elems(j);
      if (!term.elems.empty()) m.exchange.push_back(std::move(term));
    }
    m.tones = drive.tones;
    m.ramp = drive.ramp;
    m.duration = drive.duration;
  } else {
    // Effective frame: each tone becomes a static Bessel-weighted exchange
    // with its target; undriven spectator couplings (far off-resonant) are
    // dropped along with the explicit drive term.
    std::vector<double> eps;
    for (size_t i = 0; i < drive.tones.size(); ++i) eps.push_back(drive.epsilon(i));
    for (size_t i = 0; i < drive.tones.size(); ++i) {
      const DriveTone& tone = drive.tones[i];
      const double g_eff = effective_coupling(device.coupling(tone.target), eps, i);
      ExchangeTerm term;
      term.coeff = iu * g_eff * std::exp(iu * tone.phase);
      term.delta = device.detuning(tone.target) - tone.frequency;
      term.elems = exchange_elems(tone.target);
      if (!term.elems.empty()) m.exchange.push_back(std::move(term));
    }
    m.duration = drive.duration;
  }

  // Collapse channels.
  m.k_diag = Eigen::VectorXd::Zero(m.d);
  require(static_cast<int>(noise.gamma1.size()) == n &&
              static_cast<int>(noise.gamma_phi.size()) == n,
          "noise model size does not match the device");
  for (int q = 0; q < n; ++q) {
    const double g1 = noise.gamma1[static_cast<size_t>(q)];
    if (g1 > 0.0) {
      JumpOp op;
      const double s = std::sqrt(g1);
      for (int i = 0; i < m.d; ++i) {
        const auto& occ = m.occ[static_cast<size_t>(i)];
        const int nq = occ[static_cast<size_t>(q)];
        if (nq < 1) continue;
        std::vector<int> to = occ;
        to[static_cast<size_t>(q)] -= 1;
        op.elems.emplace_back(sector_index(to), i, s * std::sqrt(static_cast<double>(nq)));
        m.k_diag(i) += g1 * nq;
      }
      if (!op.elems.empty()) m.jumps.push_back(std::move(op));
    }
    const double gp = noise.gamma_phi[static_cast<size_t>(q)];
    if (gp > 0.0) {
      JumpOp op;
      const double s = std::sqrt(2.0 * gp);
      for (int i = 0; i < m.d; ++i) {
        const int nq = m.occ[static_cast<size_t>(i)][static_cast<size_t>(q)];
        if (nq < 1) continue;
        op.elems.emplace_back(i, i, s * nq);
        m.k_diag(i) += 2.0 * gp * nq * nq;
      }
      if (!op.elems.empty()) m.jumps.push_back(std::move(op));
    }
  }

  if (!options.flux_waveform.empty()) {
    require(options.waveform_dt > 0.0, "flux waveform needs a positive sample step");
    require(options.waveform_dt * (static_cast<double>(options.flux_waveform.size()) - 1.0) >=
                drive.duration * (1.0 - 1e-9),
            "flux waveform does not cover the drive duration");
    m.waveform = options.flux_waveform;
    m.waveform_dt = options.waveform_dt;
  }
  return m;
}

// Lindblad right-hand side for a block of densities sharing the drive, with
// a per-density static common-qubit offset.  Densities are Hermitian, so the
// right G† multiplication is the adjoint of the left one.
class BlockRhs {
 public:
  BlockRhs(const Model& m, std::vector<double> offsets)
      : m_(m), offsets_(std::move(offsets)), n_(static_cast<int>(offsets_.size())) {
    G_.resize(m_.d, m_.d);
    A_.resize(m_.d, m_.d * n_);
  }

  void operator()(double t, const Vector& y, Vector& dy) {
    const int d = m_.d;
    Eigen::Map<const Matrix> p(y.data(), d, d * n_);
    Eigen::Map<Matrix> out(dy.data(), d, d * n_);

    const double dv = m_.drive_value(t);
    G_.setZero();
    for (int i = 0; i < d; ++i)
      G_(i, i) = cxd(-0.5 * m_.k_diag(i), -(m_.h_diag(i) + dv * m_.n0(i)));
    for (const ExchangeTerm& term : m_.exchange) {
      const cxd c = -iu * term.coeff * std::exp(iu * (term.delta * t));
      const cxd cc = -iu * std::conj(term.coeff * std::exp(iu * (term.delta * t)));
      for (const auto& [r, cidx, w] : term.elems) {
        G_(r, cidx) += c * w;
        G_(cidx, r) += cc * w;
      }
    }

    A_.noalias() = G_ * p;
    for (int b = 0; b < n_; ++b) {
      auto ab = A_.middleCols(b * d, d);
      auto pb = p.middleCols(b * d, d);
      auto ob = out.middleCols(b * d, d);
      ob = ab + ab.adjoint();
      if (offsets_[static_cast<size_t>(b)] != 0.0)
        ob += cxd(0.0, -offsets_[static_cast<size_t>(b)]) * m_.n0_diff.cwiseProduct(pb);
      for (const JumpOp& jump : m_.jumps) {
        for (const auto& [r1, c1, v1] : jump.elems)
          for (const auto& [r2, c2, v2] : jump.elems) ob(r1, r2) += v1 * v2 * pb(c1, c2);
      }
    }
  }

 private:
  const Model& m_;
  std::vector<double> offsets_;
  int n_;
  Matrix G_;
  Matrix A_;
};

Vector flatten_density(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix sector_density_from(const Model& m, const QuantumState& state) {
  const Matrix rho_full = state.to_density();
  Matrix rho(m.d, m.d);
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j)
      rho(i, j) = rho_full(m.sector.indices[static_cast<size_t>(i)],
                           m.sector.indices[static_cast<size_t>(j)]);
  require(std::abs(rho.trace().real() - 1.0) <= 1e-9,
          "initial state has support outside the restricted excitation sector");
  return rho;
}

void symmetrize_normalize(Matrix& rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (tr > 0.0) rho /= tr;
}

void check_common_inputs(const DeviceParams& device, const DriveConfig& drive,
                         const NoiseModel& noise, const QuantumState& initial) {
  device.validate();
  drive.validate();
  for (const DriveTone& tone : drive.tones)
    require(tone.target < device.n_qubits(), "drive tone targets a missing qubit");
  require(static_cast<int>(noise.gamma1.size()) == device.n_qubits() &&
              static_cast<int>(noise.gamma_phi.size()) == device.n_qubits(),
          "noise model size does not match the device");
  require(initial.scheme ==
              LevelScheme::uniform(device.n_qubits(), device.truncation),
          "initial state level scheme does not match the device");
}

}  // namespace

Eigen::Ref<const Matrix> BatchResult::sector_density(int s, int r) const {
  require(s >= 0 && s < n_states && r >= 0 && r < n_offsets,
          "batch density index out of range");
  const int d = sector.dim();
  return block.middleCols(static_cast<Eigen::Index>(s * n_offsets + r) * d, d);
}

Matrix BatchResult::full_density(int s, int r) const {
  Matrix rho = sector_density(s, r);
  symmetrize_normalize(rho);
  return unrestrict_density(rho, sector);
}

Trajectory evolve(const DeviceParams& device, const DriveConfig& drive,
                  const QuantumState& initial, const NoiseModel& noise,
                  const std::vector<double>& sample_times, const EvolveOptions& options) {
  check_common_inputs(device, drive, noise, initial);
  const Model model = build_model(device, drive, noise, options, max_excitation_of(initial));
  const int d = model.d;
  const int n = device.n_qubits();

  Matrix rho0 = sector_density_from(model, initial);
  BlockRhs rhs(model, {options.flux_offset});

  Trajectory traj;
  traj.times = sample_times;
  traj.sector = model.sector;
  traj.populations = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(sample_times.size()));
  traj.leakage = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(sample_times.size()));

  auto sampler = [&](size_t k, double, const Vector& y) {
    Eigen::Map<const Matrix> rho(y.data(), d, d);
    for (int q = 0; q < n; ++q) {
      double p1 = 0.0, leak = 0.0;
      for (int i = 0; i < d; ++i) {
        const int nq = model.occ[static_cast<size_t>(i)][static_cast<size_t>(q)];
        if (nq == 1) p1 += rho(i, i).real();
        if (nq >= 2) leak += rho(i, i).real();
      }
      traj.populations(q, static_cast<Eigen::Index>(k)) = p1;
      traj.leakage(q, static_cast<Eigen::Index>(k)) = leak;
    }
    if (options.store_densities) {
      Matrix r = rho;
      symmetrize_normalize(r);
      traj.sampled_densities.push_back(std::move(r));
    }
  };

  Vector yf = integrate([&](double t, const Vector& y, Vector& dy) { rhs(t, y, dy); },
                        flatten_density(rho0), 0.0, drive.duration, options.ode,
                        sample_times, sampler);

  Matrix rho_final = Eigen::Map<const Matrix>(yf.data(), d, d);
  symmetrize_normalize(rho_final);
  traj.final_state = QuantumState::from_density(
      LevelScheme::uniform(n, device.truncation), unrestrict_density(rho_final, model.sector));
  return traj;
}

BatchResult evolve_batch(const DeviceParams& device, const DriveConfig& drive,
                         const std::vector<QuantumState>& initials, const NoiseModel& noise,
                         const std::vector<double>& flux_offsets,
                         const EvolveOptions& options) {
  require(!initials.empty(), "batched evolution needs at least one initial state");
  require(!flux_offsets.empty(), "batched evolution needs at least one flux offset");
  for (const QuantumState& st : initials)
    check_common_inputs(device, drive, noise, st);

  int cap = 0;
  for (const QuantumState& st : initials) cap = std::max(cap, max_excitation_of(st));
  const Model model = build_model(device, drive, noise, options, cap);
  const int d = model.d;
  const int s_count = static_cast<int>(initials.size());
  const int r_count = static_cast<int>(flux_offsets.size());
  const long pairs = static_cast<long>(s_count) * r_count;

  BatchResult result;
  result.sector = model.sector;
  result.n_states = s_count;
  result.n_offsets = r_count;
  result.block.resize(d, static_cast<Eigen::Index>(pairs) * d);

  // Initial block: sector densities are shared across offsets.
  std::vector<Matrix> rho0;
  rho0.reserve(static_cast<size_t>(s_count));
  for (const QuantumState& st : initials) rho0.push_back(sector_density_from(model, st));

  const long n_chunks = (pairs + kChunkColumns - 1) / kChunkColumns;
  std::atomic<long> next_chunk{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;

  auto worker = [&]() {
    try {
      for (;;) {
        const long c = next_chunk.fetch_add(1);
        if (c >= n_chunks) return;
        const long p0 = c * kChunkColumns;
        const long p1 = std::min(pairs, p0 + kChunkColumns);
        const int count = static_cast<int>(p1 - p0);

        std::vector<double> offsets(static_cast<size_t>(count));
        Matrix chunk(d, static_cast<Eigen::Index>(count) * d);
        for (int k = 0; k < count; ++k) {
          const long pair = p0 + k;
          const int s = static_cast<int>(pair / r_count);
          const int r = static_cast<int>(pair % r_count);
          offsets[static_cast<size_t>(k)] =
              options.flux_offset + flux_offsets[static_cast<size_t>(r)];
          chunk.middleCols(static_cast<Eigen::Index>(k) * d, d) = rho0[static_cast<size_t>(s)];
        }

        BlockRhs rhs(model, offsets);
        Vector yf =
            integrate([&](double t, const Vector& y, Vector& dy) { rhs(t, y, dy); },
                      Eigen::Map<const Vector>(chunk.data(), chunk.size()), 0.0,
                      drive.duration, options.ode);
        result.block.middleCols(static_cast<Eigen::Index>(p0) * d,
                                static_cast<Eigen::Index>(count) * d) =
            Eigen::Map<const Matrix>(yf.data(), d, static_cast<Eigen::Index>(count) * d);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || n_chunks == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int t_used = static_cast<int>(std::min<long>(threads, n_chunks));
    pool.reserve(static_cast<size_t>(t_used));
    for (int i = 0; i < t_used; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

ChevronResult chevron_scan(const DeviceParams& device, const DriveConfig& drive,
                           int target, const std::vector<double>& frequency_offsets,
                           const std::vector<double>& times, const NoiseModel& noise,
                           const EvolveOptions& options) {
  require(target >= 1 && target < device.n_qubits(), "chevron target out of range");
  require(!frequency_offsets.empty() && !times.empty(), "chevron scan needs a grid");
  require(drive.tones.size() == 1 && drive.tones[0].target == target,
          "chevron scan expects a single tone on the scanned target");

  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  std::vector<int> occ0(static_cast<size_t>(device.n_qubits()), 0);
  occ0[0] = 1;
  const QuantumState psi0 = basis_ket(scheme, occ0);

  ChevronResult result;
  result.frequency_offsets = frequency_offsets;
  result.times = times;
  result.transfer.resize(static_cast<Eigen::Index>(frequency_offsets.size()),
                         static_cast<Eigen::Index>(times.size()));

  for (size_t i = 0; i < frequency_offsets.size(); ++i) {
    DriveConfig scanned = drive;
    scanned.tones[0].frequency += frequency_offsets[i];
    require(scanned.tones[0].frequency > 0.0, "chevron offset made the tone frequency negative");
    Trajectory traj = evolve(device, scanned, psi0, noise, times, options);
    result.transfer.row(static_cast<Eigen::Index>(i)) =
        traj.populations.row(target).head(static_cast<Eigen::Index>(times.size()));
  }

  // Peak of the time-averaged transfer, refined with a 3-point parabola.
  Eigen::VectorXd avg = result.transfer.rowwise().mean();
  Eigen::Index best = 0;
  avg.maxCoeff(&best);
  result.peak_offset = frequency_offsets[static_cast<size_t>(best)];
  if (best > 0 && best + 1 < avg.size()) {
    const double y0 = avg(best - 1), y1 = avg(best), y2 = avg(best + 1);
    const double denom = y0 - 2.0 * y1 + y2;
    if (std::abs(denom) > 1e-30) {
      const double shift = 0.5 * (y0 - y2) / denom;
      const double h = frequency_offsets[static_cast<size_t>(best) + 1] -
                       frequency_offsets[static_cast<size_t>(best)];
      result.peak_offset += shift * h;
    }
  }
  return result;
}

QuantumState w_target(const LevelScheme& scheme, const std::vector<int>& targets) {
  require(!targets.empty(), "W target needs at least one computational qubit");
  Vector psi = Vector::Zero(scheme.dim());
  std::vector<int> participants{0};
  for (int t : targets) {
    require(t >= 1 && t < scheme.n_modes(), "W target qubit out of range");
    participants.push_back(t);
  }
  const double amp = 1.0 / std::sqrt(static_cast<double>(participants.size()));
  for (int q : participants) {
    std::vector<int> occ(static_cast<size_t>(scheme.n_modes()), 0);
    occ[static_cast<size_t>(q)] = 1;
    psi(basis_index(scheme, occ)) = amp;
  }
  return QuantumState::from_ket(scheme, std::move(psi));
}

double w_fidelity(const Matrix& sector_rho, const SectorBasis& sector,
                  const std::vector<int>& targets, std::vector<double>* phases) {
  std::vector<int> participants{0};
  for (int t : targets) participants.push_back(t);
  const int m = static_cast<int>(participants.size());

  // Locate the single-excitation basis states of the participants.
  std::vector<int> idx(static_cast<size_t>(m), -1);
  for (int i = 0; i < sector.dim(); ++i) {
    const auto occ = occupations_of(sector.scheme, sector.indices[static_cast<size_t>(i)]);
    int total = 0;
    for (int o : occ) total += o;
    if (total != 1) continue;
    for (int k = 0; k < m; ++k)
      if (occ[static_cast<size_t>(participants[static_cast<size_t>(k)])] == 1)
        idx[static_cast<size_t>(k)] = i;
  }
  for (int k = 0; k < m; ++k)
    require(idx[static_cast<size_t>(k)] >= 0,
            "sector does not contain the single-excitation W components");

  Matrix block(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      block(a, b) = sector_rho(idx[static_cast<size_t>(a)], idx[static_cast<size_t>(b)]);

  auto f2 = [&](const Eigen::VectorXd& theta) {
    cxd acc = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        acc += std::exp(iu * (theta(a) - theta(b))) * block(a, b);
    return acc.real() / static_cast<double>(m);
  };

  // Seed from the dominant eigenvector's phases (exact for rank-1 blocks).
  Eigen::SelfAdjointEigenSolver<Matrix> es(block);
  Eigen::VectorXcd v = es.eigenvectors().col(m - 1);
  Eigen::VectorXd theta(m);
  for (int a = 0; a < m; ++a) theta(a) = -std::arg(v(a) + cxd(1e-300, 0.0));

  // Coordinate golden-section passes, then a simplex polish.
  for (int round = 0; round < 2; ++round) {
    for (int a = 1; a < m; ++a) {  // theta(0) fixed: global phase
      const double center = theta(a);
      theta(a) = golden_section_min(
          [&](double x) {
            Eigen::VectorXd th = theta;
            th(a) = x;
            return -f2(th);
          },
          center - pi, center + pi, 1e-10);
    }
  }
  if (m > 1) {
    SimplexOptions sopt;
    sopt.initial_step = 0.05;
    sopt.f_tol = 1e-14;
    SimplexResult sr = nelder_mead([&](const Eigen::VectorXd& th) { return -f2(th); },
                                   theta, sopt);
    if (-sr.value >= f2(theta)) theta = sr.x;
  }

  if (phases) {
    phases->assign(static_cast<size_t>(m), 0.0);
    for (int a = 0; a < m; ++a) (*phases)[static_cast<size_t>(a)] = theta(a);
  }
  return std::sqrt(std::max(0.0, f2(theta)));
}

WStateResult generate_w_state(const DeviceParams& device, const WStateRequest& request,
                              const NoiseModel& noise, const EvolveOptions& options) {
  require(request.g_per_tone > 0.0, "W-state generation needs a positive coupling target");
  const int n_t = static_cast<int>(request.targets.size());
  require(n_t >= 1, "W-state generation needs at least one target");

  const double t_nominal = request.duration > 0.0
                               ? request.duration
                               : w_share_time(request.g_per_tone, n_t);
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  std::vector<int> occ0(static_cast<size_t>(device.n_qubits()), 0);
  occ0[0] = 1;
  const QuantumState psi0 = basis_ket(scheme, occ0);

  double t_score = t_nominal;
  if (request.time_scan_halfwidth > 0.0) {
    // Fine search: sample the virtual-Z-corrected fidelity along one long
    // trajectory and pick the best time (parabolic refinement).  Mid-pulse
    // samples lack the ramp-down, which only shifts phases the virtual-Z
    // absorbs; the final score below re-runs the full pulse at t_score.
    const double lo = std::max(t_nominal - request.time_scan_halfwidth, 2.0 * request.ramp);
    const double hi = t_nominal + request.time_scan_halfwidth;
    const int pts = std::max(5, request.time_scan_points);
    std::vector<double> ts(static_cast<size_t>(pts));
    for (int k = 0; k < pts; ++k)
      ts[static_cast<size_t>(k)] = lo + (hi - lo) * k / (pts - 1.0);

    DriveConfig scan_drive =
        make_calibrated_drive(device, request.targets, request.g_per_tone, hi);
    scan_drive.ramp = request.ramp;
    EvolveOptions scan_opts = options;
    scan_opts.store_densities = true;
    Trajectory traj = evolve(device, scan_drive, psi0, noise, ts, scan_opts);

    std::vector<double> fs(ts.size());
    for (size_t k = 0; k < ts.size(); ++k)
      fs[k] = w_fidelity(traj.sampled_densities[k], traj.sector, request.targets);
    size_t best = 0;
    for (size_t k = 1; k < fs.size(); ++k)
      if (fs[k] > fs[best]) best = k;
    t_score = ts[best];
    if (best > 0 && best + 1 < fs.size()) {
      const double denom = fs[best - 1] - 2.0 * fs[best] + fs[best + 1];
      if (std::abs(denom) > 1e-30)
        t_score += 0.5 * (fs[best - 1] - fs[best + 1]) / denom * (ts[1] - ts[0]);
    }
  }

  WStateResult result;
  result.drive = make_calibrated_drive(device, request.targets, request.g_per_tone, t_score);
  result.drive.ramp = request.ramp;
  result.share_time = t_score;

  EvolveOptions run_opts = options;
  run_opts.store_densities = true;
  Trajectory traj = evolve(device, result.drive, psi0, noise, {t_score}, run_opts);
  const Matrix& rho_sector = traj.sampled_densities.back();

  std::vector<double> phases;
  result.fidelity = w_fidelity(rho_sector, traj.sector, request.targets, &phases);
  result.z_phases = phases;
  // Raw (no virtual-Z) fidelity for reference.
  const QuantumState target = w_target(scheme, request.targets);
  const Vector w_sector = restrict_ket(target.ket, traj.sector);
  result.fidelity_raw =
      std::sqrt(std::max(0.0, (w_sector.adjoint() * rho_sector * w_sector)(0, 0).real()));
  result.state = traj.final_state;
  return result;
}

Matrix ideal_exchange_unitary(GateKind kind) {
  Matrix u = Matrix::Identity(4, 4);
  if (kind == GateKind::sqrt_iswap) {
    const double c = 1.0 / std::sqrt(2.0);
    u(1, 1) = c;
    u(1, 2) = -iu * c;
    u(2, 1) = -iu * c;
    u(2, 2) = c;
  } else {
    u(1, 1) = 0.0;
    u(1, 2) = -iu;
    u(2, 1) = -iu;
    u(2, 2) = 0.0;
  }
  return u;
}

std::vector<QuantumState> process_basis_states(const LevelScheme& scheme, int q_a, int q_b) {
  require(q_a >= 0 && q_a < scheme.n_modes() && q_b >= 0 && q_b < scheme.n_modes() &&
              q_a != q_b,
          "process basis needs two distinct modes");
  auto comp_ket = [&](int i) {
    std::vector<int> occ(static_cast<size_t>(scheme.n_modes()), 0);
    occ[static_cast<size_t>(q_a)] = (i >> 1) & 1;
    occ[static_cast<size_t>(q_b)] = i & 1;
    Vector psi = Vector::Zero(scheme.dim());
    psi(basis_index(scheme, occ)) = 1.0;
    return psi;
  };
  std::vector<QuantumState> states;
  for (int i = 0; i < 4; ++i)
    states.push_back(QuantumState::from_ket(scheme, comp_ket(i)));
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      states.push_back(QuantumState::from_ket(scheme, r * (comp_ket(i) + comp_ket(j))));
      states.push_back(QuantumState::from_ket(scheme, r * (comp_ket(i) + iu * comp_ket(j))));
    }
  return states;
}

Matrix process_transfer(const std::vector<Eigen::Ref<const Matrix>>& finals,
                        const SectorBasis& sector, int q_a, int q_b) {
  require(finals.size() == 16, "process reconstruction needs the 16 basis finals");
  // Sector indices of the four computational configurations.
  std::vector<int> comp(4, -1);
  for (int i = 0; i < sector.dim(); ++i) {
    const auto occ = occupations_of(sector.scheme, sector.indices[static_cast<size_t>(i)]);
    int total = 0;
    for (int o : occ) total += o;
    const int na = occ[static_cast<size_t>(q_a)], nb = occ[static_cast<size_t>(q_b)];
    if (na > 1 || nb > 1 || total != na + nb) continue;
    comp[static_cast<size_t>(2 * na + nb)] = i;
  }
  for (int i = 0; i < 4; ++i)
    require(comp[static_cast<size_t>(i)] >= 0,
            "sector does not contain the computational subspace");

  auto comp_block = [&](const Eigen::Ref<const Matrix>& rho) {
    Matrix b(4, 4);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l)
        b(k, l) = rho(comp[static_cast<size_t>(k)], comp[static_cast<size_t>(l)]);
    return b;
  };

  std::vector<Matrix> diag(4);
  for (int i = 0; i < 4; ++i) diag[static_cast<size_t>(i)] = comp_block(finals[static_cast<size_t>(i)]);

  Matrix transfer(16, 16);
  auto put = [&](int i, int j, const Matrix& lij) {
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) transfer(4 * k + l, 4 * i + j) = lij(k, l);
  };
  for (int i = 0; i < 4; ++i) put(i, i, diag[static_cast<size_t>(i)]);
  int s = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const Matrix bu = comp_block(finals[static_cast<size_t>(s++)]);
      const Matrix bv = comp_block(finals[static_cast<size_t>(s++)]);
      const Matrix lij = bu + iu * bv -
                         0.5 * (1.0 + iu) * (diag[static_cast<size_t>(i)] + diag[static_cast<size_t>(j)]);
      put(i, j, lij);
      put(j, i, lij.adjoint());
    }
  return transfer;
}

namespace {

Matrix z_mask(double z0, double z1) {
  Matrix zd = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k)
    zd(k, k) = std::exp(iu * (z0 * ((k >> 1) & 1) + z1 * (k & 1)));
  return zd;
}

// Split {out0, out1[, in0, in1]} into the output and input diagonal masks.
std::pair<Matrix, Matrix> z_masks(const std::vector<double>& z) {
  require(z.size() == 2 || z.size() == 4, "virtual-Z needs two or four phases");
  const Matrix z_out = z_mask(z[0], z[1]);
  const Matrix z_in = z.size() == 4 ? z_mask(z[2], z[3]) : Matrix(Matrix::Identity(4, 4));
  return {z_out, z_in};
}

double entanglement_fidelity(const Matrix& transfer, const Matrix& m) {
  // F_e = (1/16) sum_{ij} <i| M† L(|i><j|) M |j>.
  cxd acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          acc += std::conj(m(k, i)) * transfer(4 * k + l, 4 * i + j) * m(l, j);
  return acc.real() / 16.0;
}

}  // namespace

double average_gate_fidelity(const Matrix& transfer, const Matrix& target_u,
                             const std::vector<double>& z_phases) {
  // Folding both frame rotations into the target leaves the plain
  // entanglement-fidelity sum: score L against Z_out† U Z_in†.
  const auto [z_out, z_in] = z_masks(z_phases);
  const Matrix m = z_out.adjoint() * target_u * z_in.adjoint();
  const double fe = entanglement_fidelity(transfer, m);
  return (4.0 * fe + 1.0) / 5.0;
}

std::vector<double> calibrate_virtual_z(const Matrix& transfer, const Matrix& target_u) {
  auto objective = [&](const std::vector<double>& z) {
    return -average_gate_fidelity(transfer, target_u, z);
  };
  // Coarse 4-D grid to land in the right lobe, then golden passes per axis
  // and a simplex polish.
  std::vector<double> best{0.0, 0.0, 0.0, 0.0};
  double bestf = objective(best);
  const int n_grid = 12;
  std::vector<double> z(4);
  for (int a = 0; a < n_grid; ++a)
    for (int b = 0; b < n_grid; ++b)
      for (int c = 0; c < n_grid; ++c)
        for (int d = 0; d < n_grid; ++d) {
          z[0] = -pi + two_pi * a / n_grid;
          z[1] = -pi + two_pi * b / n_grid;
          z[2] = -pi + two_pi * c / n_grid;
          z[3] = -pi + two_pi * d / n_grid;
          const double f = objective(z);
          if (f < bestf) {
            bestf = f;
            best = z;
          }
        }
  for (int round = 0; round < 2; ++round)
    for (size_t axis = 0; axis < 4; ++axis) {
      auto line = [&](double x) {
        std::vector<double> probe = best;
        probe[axis] = x;
        return objective(probe);
      };
      best[axis] = golden_section_min(line, best[axis] - 0.4, best[axis] + 0.4, 1e-12);
    }
  Eigen::VectorXd x0(4);
  x0 << best[0], best[1], best[2], best[3];
  SimplexOptions sopt;
  sopt.initial_step = 0.02;
  sopt.f_tol = 1e-15;
  SimplexResult sr = nelder_mead(
      [&](const Eigen::VectorXd& v) {
        return objective({v(0), v(1), v(2), v(3)});
      },
      x0, sopt);
  return {sr.x(0), sr.x(1), sr.x(2), sr.x(3)};
}

double state_fidelity_through(const Matrix& transfer, const Matrix& rho_in,
                              const Matrix& target_u, const std::vector<double>& z_phases) {
  const auto [z_out, z_in] = z_masks(z_phases);
  const Matrix rho_rot = z_in * rho_in * z_in.adjoint();
  Matrix out = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (rho_rot(i, j) == cxd(0.0, 0.0)) continue;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          out(k, l) += rho_rot(i, j) * transfer(4 * k + l, 4 * i + j);
    }
  const Matrix target = target_u * rho_in * target_u.adjoint();
  return (target * (z_out * out * z_out.adjoint())).trace().real();
}

double process_trace_retention(const Matrix& transfer) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) acc += transfer(4 * k + k, 4 * i + i).real();
  return acc / 4.0;
}

const ProbeSet& two_qubit_probe_set() {
  static const ProbeSet set = [] {
    ProbeSet ps;
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::Vector2cd> sq(6);
    sq[0] << 1.0, 0.0;                 // |0>
    sq[1] << 0.0, 1.0;                 // |1>
    sq[2] << r, r;                     // |+>
    sq[3] << r, -r;                    // |->
    sq[4] << r, iu * r;                // |+i>
    sq[5] << r, -iu * r;               // |-i>
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        Eigen::Vector4cd psi;
        psi << sq[static_cast<size_t>(a)](0) * sq[static_cast<size_t>(b)](0),
            sq[static_cast<size_t>(a)](0) * sq[static_cast<size_t>(b)](1),
            sq[static_cast<size_t>(a)](1) * sq[static_cast<size_t>(b)](0),
            sq[static_cast<size_t>(a)](1) * sq[static_cast<size_t>(b)](1);
        const int idx = static_cast<int>(ps.states.size());
        ps.states.push_back(psi * psi.adjoint());
        if (a < 2 && b < 2) ps.basis_subset.push_back(idx);
        if ((a == 2 || a == 4) && (b == 2 || b == 4)) ps.phase_subset.push_back(idx);
      }
    return ps;
  }();
  return set;
}

GateProcessResult gate_process(const DeviceParams& device, const GateProcessRequest& request,
                               const NoiseModel& noise, const EvolveOptions& options) {
  require(request.target >= 1 && request.target < device.n_qubits(),
          "gate target out of range");
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  const std::vector<QuantumState> basis = process_basis_states(scheme, 0, request.target);

  EvolveOptions opts = options;
  opts.flux_offset += request.flux_offset;
  const BatchResult batch =
      evolve_batch(device, request.drive, basis, noise, {0.0}, opts);

  std::vector<Eigen::Ref<const Matrix>> finals;
  finals.reserve(16);
  for (int s = 0; s < 16; ++s) finals.emplace_back(batch.sector_density(s, 0));
  const Matrix transfer = process_transfer(finals, batch.sector, 0, request.target);

  GateProcessResult result;
  result.ideal_unitary = ideal_exchange_unitary(request.kind);
  result.z_phases = calibrate_virtual_z(transfer, result.ideal_unitary);
  result.avg_fidelity = average_gate_fidelity(transfer, result.ideal_unitary, result.z_phases);
  result.leakage = 1.0 - process_trace_retention(transfer);

  const ProbeSet& probes = two_qubit_probe_set();
  double mean = 0.0;
  std::vector<double> per_state(probes.states.size());
  for (size_t s = 0; s < probes.states.size(); ++s) {
    per_state[s] = state_fidelity_through(transfer, probes.states[s], result.ideal_unitary,
                                          result.z_phases);
    mean += per_state[s];
  }
  result.state_mean_fidelity = mean / static_cast<double>(probes.states.size());
  double acc = 0.0;
  for (int idx : probes.basis_subset) acc += per_state[static_cast<size_t>(idx)];
  result.basis_subset_fidelity = acc / static_cast<double>(probes.basis_subset.size());
  acc = 0.0;
  for (int idx : probes.phase_subset) acc += per_state[static_cast<size_t>(idx)];
  result.phase_subset_fidelity = acc / static_cast<double>(probes.phase_subset.size());
  return result;
}

}  // namespace paragate
