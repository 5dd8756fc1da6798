// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/errors.hpp"

#include <algorithm>
#include <cmath>

#include "paragate/dynamics.hpp"

namespace paragate {

NoiseModel NoiseModel::from_device(const DeviceParams& device) {
  NoiseModel nm;
  for (int q = 0; q < device.n_qubits(); ++q) {
    nm.gamma1.push_back(device.gamma1(q));
    nm.gamma_phi.push_back(device.gamma_phi(q));
  }
  return nm;
}

NoiseModel NoiseModel::none(int n_qubits) {
  NoiseModel nm;
  nm.gamma1.assign(static_cast<size_t>(n_qubits), 0.0);
  nm.gamma_phi.assign(static_cast<size_t>(n_qubits), 0.0);
  nm.zz_on = false;
  nm.flux_on = false;
  return nm;
}

NoiseModel NoiseModel::without_decoherence() const {
  NoiseModel nm = *this;
  std::fill(nm.gamma1.begin(), nm.gamma1.end(), 0.0);
  std::fill(nm.gamma_phi.begin(), nm.gamma_phi.end(), 0.0);
  return nm;
}

NoiseModel NoiseModel::without_zz() const {
  NoiseModel nm = *this;
  nm.zz_on = false;
  return nm;
}

NoiseModel NoiseModel::without_flux() const {
  NoiseModel nm = *this;
  nm.flux_on = false;
  return nm;
}

bool NoiseModel::any_decoherence() const {
  for (double g : gamma1)
    if (g > 0.0) return true;
  for (double g : gamma_phi)
    if (g > 0.0) return true;
  return false;
}

double decoherence_prefactor(int n_qubits) {
  require(n_qubits >= 1, "decoherence prefactor needs at least one qubit");
  const double d = std::pow(2.0, n_qubits);
  return 0.5 * d / (d + 1.0);
}

double analytic_decoherence_infidelity(const std::vector<double>& gamma1,
                                       const std::vector<double>& gamma_phi, double t) {
  require(gamma1.size() == gamma_phi.size() && !gamma1.empty(),
          "rate lists must be non-empty and of equal length");
  require(t >= 0.0, "duration must be non-negative");
  double total = 0.0;
  for (size_t q = 0; q < gamma1.size(); ++q) total += gamma1[q] + gamma_phi[q];
  return decoherence_prefactor(static_cast<int>(gamma1.size())) * t * total;
}

std::vector<Matrix> amplitude_damping_kraus(double p1) {
  require(p1 >= 0.0 && p1 <= 1.0, "damping probability must be in [0, 1]");
  Matrix e0 = Matrix::Identity(2, 2);
  e0(1, 1) = std::sqrt(1.0 - p1);
  Matrix e1 = Matrix::Zero(2, 2);
  e1(0, 1) = std::sqrt(p1);
  return {e0, e1};
}

std::vector<Matrix> phase_damping_kraus(double p_phi) {
  require(p_phi >= 0.0 && p_phi <= 1.0, "dephasing probability must be in [0, 1]");
  Matrix e0 = std::sqrt(1.0 - p_phi) * Matrix::Identity(2, 2);
  Matrix e1 = Matrix::Zero(2, 2);
  e1(0, 0) = std::sqrt(p_phi);
  e1(1, 1) = -std::sqrt(p_phi);
  return {e0, e1};
}

std::vector<Matrix> qubit_damping_kraus(double p1, double p_phi) {
  std::vector<Matrix> out;
  for (const Matrix& a : phase_damping_kraus(p_phi))
    for (const Matrix& b : amplitude_damping_kraus(p1)) out.push_back(a * b);
  return out;
}

std::vector<Matrix> kron_kraus(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  std::vector<Matrix> out;
  out.reserve(a.size() * b.size());
  for (const Matrix& x : a)
    for (const Matrix& y : b) out.push_back(kron(x, y));
  return out;
}

double kraus_average_fidelity(const std::vector<Matrix>& kraus) {
  require(!kraus.empty(), "channel needs at least one Kraus operator");
  const Eigen::Index d = kraus.front().rows();
  double acc = 0.0;
  Matrix completeness = Matrix::Zero(d, d);
  for (const Matrix& e : kraus) {
    require(e.rows() == d && e.cols() == d, "Kraus operators must share one dimension");
    acc += std::norm(e.trace());
    completeness += e.adjoint() * e;
  }
  require((completeness - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-9,
          "Kraus operators are not trace preserving");
  const double dd = static_cast<double>(d);
  return (dd + acc) / (dd * (dd + 1.0));
}

double quasi_static_sigma(double sqrt_amp_phi0, double t_gate, double f_low_hz) {
  require(sqrt_amp_phi0 >= 0.0, "flux noise amplitude must be >= 0");
  require(t_gate > 0.0 && f_low_hz > 0.0, "sigma needs positive time and cutoff");
  const double arg = 1.0 / (t_gate * f_low_hz);
  require(arg > 1.0, "quasi-static window shorter than the infrared cutoff period");
  return sqrt_amp_phi0 * std::sqrt(std::log(arg));
}

std::vector<double> flux_noise_trace(double sqrt_amp_phi0, int n_samples, double dt,
                                     double f_low_hz, Rng& rng) {
  require(n_samples >= 2 && dt > 0.0, "trace needs at least two samples");
  require(f_low_hz > 0.0, "trace needs a positive infrared cutoff");
  const double f_high = 0.5 / dt;
  require(f_high > f_low_hz, "Nyquist frequency must exceed the infrared cutoff");
  const double amp2 = sqrt_amp_phi0 * sqrt_amp_phi0;

  // Sum of log-spaced random-phase tones, equal power per log-frequency
  // interval: S(f) = A/f between the cutoffs.
  const int tones = 24 * std::max(1, static_cast<int>(std::log10(f_high / f_low_hz)));
  const double log_lo = std::log(f_low_hz), log_hi = std::log(f_high);
  std::vector<double> out(static_cast<size_t>(n_samples), 0.0);
  for (int k = 0; k < tones; ++k) {
    const double le0 = log_lo + (log_hi - log_lo) * k / tones;
    const double le1 = log_lo + (log_hi - log_lo) * (k + 1) / tones;
    const double f = std::exp(0.5 * (le0 + le1));
    // Band variance: integral of A/f over the band = A (le1 - le0).
    const double a = std::sqrt(2.0 * amp2 * (le1 - le0));
    const double phase = two_pi * rng.uniform();
    for (int i = 0; i < n_samples; ++i)
      out[static_cast<size_t>(i)] += a * std::cos(two_pi * f * i * dt + phase);
  }
  return out;
}

namespace {

struct MeanStats {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanStats mean_stats(const std::vector<double>& xs) {
  MeanStats st;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) st.mean += x;
  st.mean /= n;
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - st.mean) * (x - st.mean);
    st.std_err = std::sqrt(var / (n - 1.0) / n);
  }
  return st;
}

// One budget run: mean fidelity over the flux offsets (empty offsets = one
// run at zero offset).
MeanStats run_w_scenario(const DeviceParams& device, const BudgetRequest& request,
                         const NoiseModel& noise, const std::vector<double>& offsets_rad,
                         const EvolveOptions& options) {
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  std::vector<int> occ0(static_cast<size_t>(device.n_qubits()), 0);
  occ0[0] = 1;
  const std::vector<QuantumState> initials{basis_ket(scheme, occ0)};
  const std::vector<double> offs = offsets_rad.empty() ? std::vector<double>{0.0} : offsets_rad;
  const BatchResult batch =
      evolve_batch(device, request.drive, initials, noise, offs, options);
  std::vector<double> fs(offs.size());
  for (size_t r = 0; r < offs.size(); ++r) {
    Matrix rho = batch.sector_density(0, static_cast<int>(r));
    rho = 0.5 * (rho + rho.adjoint()).eval();
    fs[r] = w_fidelity(rho, batch.sector, request.targets);
  }
  return mean_stats(fs);
}

MeanStats run_gate_scenario(const DeviceParams& device, const BudgetRequest& request,
                            const NoiseModel& noise, const std::vector<double>& offsets_rad,
                            const std::vector<double>& z_phases,
                            const EvolveOptions& options) {
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  const int target = request.targets.front();
  const std::vector<QuantumState> basis = process_basis_states(scheme, 0, target);
  const std::vector<double> offs = offsets_rad.empty() ? std::vector<double>{0.0} : offsets_rad;
  const BatchResult batch = evolve_batch(device, request.drive, basis, noise, offs, options);
  const Matrix u = ideal_exchange_unitary(request.gate);
  std::vector<double> fs(offs.size());
  for (size_t r = 0; r < offs.size(); ++r) {
    std::vector<Eigen::Ref<const Matrix>> finals;
    finals.reserve(16);
    for (int s = 0; s < 16; ++s)
      finals.emplace_back(batch.sector_density(s, static_cast<int>(r)));
    const Matrix transfer = process_transfer(finals, batch.sector, 0, target);
    fs[r] = average_gate_fidelity(transfer, u, z_phases);
  }
  return mean_stats(fs);
}

}  // namespace

ChannelBudget error_budget(const DeviceParams& device, const BudgetRequest& request,
                           std::uint64_t seed) {
  device.validate();
  request.drive.validate();
  require(!request.targets.empty(), "budget needs at least one target qubit");
  if (request.scenario == BudgetScenario::gate)
    require(request.targets.size() == 1, "the gate scenario scores a single pair");
  require(request.mc_realizations >= 1, "budget needs at least one realization");

  const NoiseModel noise = NoiseModel::from_device(device);
  EvolveOptions options;
  options.threads = request.threads;

  // Quasi-static flux offsets (common random numbers across the four runs).
  ChannelBudget budget;
  budget.duration = request.drive.duration;
  budget.mc_realizations = request.mc_realizations;
  std::vector<double> offsets;
  if (device.flux_noise && device.flux_noise->sqrt_amp_phi0 > 0.0) {
    budget.sigma_phi0 = quasi_static_sigma(device.flux_noise->sqrt_amp_phi0,
                                           request.drive.duration,
                                           device.flux_noise->f_low_hz);
    Rng rng = Rng(seed).spawn(0x11u);
    offsets.resize(static_cast<size_t>(request.mc_realizations));
    for (double& o : offsets)
      o = device.flux_noise->slope * budget.sigma_phi0 * rng.normal();
  }

  std::vector<double> z_phases{0.0, 0.0, 0.0, 0.0};
  if (request.scenario == BudgetScenario::gate) {
    // Calibrate the virtual-Z once, on the flux-free gate, exactly as a real
    // calibration would; the same correction then serves every realization.
    GateProcessRequest greq;
    greq.target = request.targets.front();
    greq.kind = request.gate;
    greq.drive = request.drive;
    const GateProcessResult ideal_run = gate_process(device, greq, noise, options);
    z_phases = ideal_run.z_phases;
  }

  auto run = [&](const NoiseModel& nm, const std::vector<double>& offs) {
    return request.scenario == BudgetScenario::w_state
               ? run_w_scenario(device, request, nm, offs, options)
               : run_gate_scenario(device, request, nm, offs, z_phases, options);
  };

  const std::vector<double> no_offsets;
  const MeanStats all_on = run(noise, offsets);
  const MeanStats decoh_off = run(noise.without_decoherence(), offsets);
  const MeanStats zz_off = run(noise.without_zz(), offsets);
  const MeanStats flux_off = run(noise, no_offsets);

  budget.fidelity = all_on.mean;
  budget.fidelity_std_err = all_on.std_err;
  budget.eps_decoherence = decoh_off.mean - all_on.mean;
  budget.eps_zz = zz_off.mean - all_on.mean;
  budget.eps_flux = flux_off.mean - all_on.mean;
  budget.eps_flux_std_err = all_on.std_err;
  return budget;
}

}  // namespace paragate
