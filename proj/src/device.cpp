// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/device.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "paragate/bessel.hpp"

namespace paragate {

double DeviceParams::detuning(int j) const {
  require(j >= 1 && j < n_qubits(), "detuning: computational qubit index out of range");
  return qubits[static_cast<size_t>(j)].omega - qubits[0].omega;
}

double DeviceParams::bus_detuning(int j) const {
  require(j >= 0 && j < n_qubits(), "bus_detuning: qubit index out of range");
  return qubits[static_cast<size_t>(j)].omega - bus_freq;
}

double DeviceParams::coupling(int j) const {
  require(j >= 1 && j < n_qubits(), "coupling: computational qubit index out of range");
  return bus_mediated_coupling(qubits[0].h, qubits[static_cast<size_t>(j)].h,
                               bus_detuning(0), bus_detuning(j));
}

double DeviceParams::gamma1(int j) const {
  require(j >= 0 && j < n_qubits(), "gamma1: qubit index out of range");
  return 1.0 / qubits[static_cast<size_t>(j)].t1;
}

double DeviceParams::gamma_phi(int j) const {
  require(j >= 0 && j < n_qubits(), "gamma_phi: qubit index out of range");
  const QubitParams& q = qubits[static_cast<size_t>(j)];
  // 1/Tphi = 1/T2E - 1/(2 T1); clamp tiny negative values from rounding.
  return std::max(0.0, 1.0 / q.t2_echo - 0.5 / q.t1);
}

void DeviceParams::validate() const {
  require(n_qubits() >= 2, "device needs the common qubit plus at least one other");
  require(truncation >= 2, "device truncation must keep at least two levels");
  require(bus_freq > 0.0, "bus frequency must be positive");
  for (int j = 0; j < n_qubits(); ++j) {
    const QubitParams& q = qubits[static_cast<size_t>(j)];
    std::ostringstream who;
    who << "qubit " << j << ": ";
    require(q.omega > 0.0, who.str() + "frequency must be positive");
    require(q.t1 > 0.0, who.str() + "T1 must be positive");
    require(q.t2_echo > 0.0, who.str() + "T2 echo must be positive");
    require(q.t2_echo <= 2.0 * q.t1 * (1.0 + 1e-9),
            who.str() + "T2 echo cannot exceed 2 T1");
    require(std::abs(bus_detuning(j)) > 0.0, who.str() + "sits on the bus frequency");
  }
  for (int j = 1; j < n_qubits(); ++j) {
    require(std::abs(detuning(j)) > 0.0,
            "computational qubit is degenerate with the common qubit");
  }
  if (flux_noise) {
    require(flux_noise->sqrt_amp_phi0 >= 0.0, "flux noise amplitude must be >= 0");
    require(flux_noise->f_low_hz > 0.0, "flux noise infrared cutoff must be positive");
  }
}

double DriveConfig::epsilon(size_t i) const {
  require(i < tones.size(), "drive tone index out of range");
  require(tones[i].frequency != 0.0, "drive tone frequency must be nonzero");
  return tones[i].amplitude / std::abs(tones[i].frequency);
}

void DriveConfig::validate() const {
  require(duration > 0.0, "drive duration must be positive");
  require(ramp >= 0.0 && 2.0 * ramp <= duration,
          "drive ramps must be non-negative and fit inside the duration");
  for (size_t i = 0; i < tones.size(); ++i) {
    require(tones[i].target >= 1, "drive tone must target a computational qubit");
    require(tones[i].amplitude >= 0.0, "drive tone amplitude must be >= 0");
    require(tones[i].frequency > 0.0, "drive tone frequency must be positive");
  }
}

double bus_mediated_coupling(double h0, double hj, double delta_0b, double delta_jb) {
  require(delta_0b != 0.0 && delta_jb != 0.0,
          "bus-mediated coupling undefined at zero bus detuning");
  return 0.5 * h0 * hj * (1.0 / delta_0b + 1.0 / delta_jb);
}

double dispersive_shift(double h, double alpha, double delta) {
  require(delta != 0.0 && delta != alpha,
          "dispersive shift undefined at delta = 0 or delta = alpha");
  return -h * h * alpha / (delta * (delta - alpha));
}

double effective_coupling(double g_j, const std::vector<double>& eps, size_t j) {
  require(j < eps.size(), "effective_coupling: tone index out of range");
  double w = bessel_j1(eps[j]);
  for (size_t k = 0; k < eps.size(); ++k)
    if (k != j) w *= bessel_j0(eps[k]);
  return g_j * w;
}

namespace {

// Largest frequency (by tolerant Euclid) dividing every entry, or 0 when the
// set shares no usable common divisor.  Floating-point remainders drift, so
// anything below `tol` counts as zero.
double approx_gcd(const std::vector<double>& freqs, double tol) {
  double g = 0.0;
  for (double f : freqs) {
    double b = std::abs(f);
    if (b <= tol) continue;
    if (g == 0.0) {
      g = b;
      continue;
    }
    double a = std::max(g, b);
    b = std::min(g, b);
    while (b > tol) {
      const double r = std::fmod(a, b);
      a = b;
      b = r;
    }
    g = a;
  }
  return g;
}

// |g_j <e^{i delta_j t} prod_k e^{i eps_k cos(nu_k t + phase)}>| over the
// commensurate period, by the rectangle rule (spectrally exact on periodic
// integrands once the sample count clears the sideband bandwidth).  Empty
// result means no commensurate period / out of sampling budget.
std::vector<double> dc_magnitudes(const std::vector<double>& g_abs,
                                  const std::vector<double>& detunings,
                                  const std::vector<double>& freqs,
                                  const std::vector<double>& eps, double phase) {
  const size_t n = g_abs.size();
  std::vector<double> all = freqs;
  for (double d : detunings) all.push_back(d);
  double fmax = 0.0;
  for (double f : all) fmax = std::max(fmax, std::abs(f));
  if (fmax <= 0.0) return {};
  const double base = approx_gcd(all, 1e-9 * fmax);
  if (base < 1e-4 * fmax) return {};  // effectively incommensurate

  // Sideband ladders die off a dozen orders past the modulation index, so
  // the integrand's bandwidth is ~ sum_k (eps_k + 12) nu_k plus the detuning.
  double bandwidth = fmax;
  for (size_t k = 0; k < n; ++k) bandwidth += (eps[k] + 12.0) * freqs[k];
  const double samples = 2.0 * bandwidth / base + 17.0;
  if (samples > static_cast<double>(1u << 21)) return {};
  const size_t n_samples = static_cast<size_t>(samples);

  const double period = 2.0 * pi / base;
  std::vector<std::complex<double>> acc(n, 0.0);
  for (size_t s = 0; s < n_samples; ++s) {
    const double t = period * static_cast<double>(s) / static_cast<double>(n_samples);
    double mod_phase = 0.0;
    for (size_t k = 0; k < n; ++k) mod_phase += eps[k] * std::cos(freqs[k] * t + phase);
    for (size_t j = 0; j < n; ++j)
      acc[j] += std::exp(std::complex<double>(0.0, detunings[j] * t + mod_phase));
  }
  std::vector<double> mags(n);
  for (size_t j = 0; j < n; ++j)
    mags[j] = g_abs[j] * std::abs(acc[j]) / static_cast<double>(n_samples);
  return mags;
}

// One fixed-point pass: eps_i <- J1^{-1}(t_i / (|g_i| prod_{k!=i} J0(eps_k))).
// Returns false if any required J1 value exceeds the peak (infeasible).
bool calibration_pass(const std::vector<double>& g_abs,
                      const std::vector<double>& targets,
                      std::vector<double>& eps) {
  const size_t n = eps.size();
  for (size_t i = 0; i < n; ++i) {
    double spectator = 1.0;
    for (size_t k = 0; k < n; ++k)
      if (k != i) spectator *= bessel_j0(eps[k]);
    const double needed = targets[i] / (g_abs[i] * spectator);
    if (needed > j1_peak_value) return false;
    eps[i] = bessel_j1_inverse(needed);
  }
  return true;
}

bool try_calibrate(const std::vector<double>& g_abs, const std::vector<double>& targets,
                   std::vector<double>& eps_out) {
  const size_t n = g_abs.size();
  std::vector<double> eps(n, 0.0);
  for (int pass = 0; pass < 400; ++pass) {
    std::vector<double> prev = eps;
    if (!calibration_pass(g_abs, targets, eps)) return false;
    double rel = 0.0;
    for (size_t i = 0; i < n; ++i)
      rel = std::max(rel, std::abs(eps[i] - prev[i]) / std::max(eps[i], 1e-12));
    if (rel < 1e-9) break;
  }
  // Verify the achieved couplings to the contract tolerance.
  for (size_t i = 0; i < n; ++i) {
    double achieved = bessel_j1(eps[i]) * g_abs[i];
    for (size_t k = 0; k < n; ++k)
      if (k != i) achieved *= bessel_j0(eps[k]);
    if (std::abs(std::abs(achieved) - targets[i]) > 1e-6 * targets[i]) return false;
  }
  eps_out = std::move(eps);
  return true;
}

// Refine a closed-form solution against the exact time-averaged couplings so
// sideband collisions between tones are absorbed into the amplitudes, the way
// an experimental rate calibration absorbs them.  Fixed point on the
// generalized spectator weight w_i = |C_i(eps)| / (g_i J1(eps_i)), which is
// prod_{k!=i} J0(eps_k) when no collisions are present.  A no-op for a single
// tone or when no commensurate period exists.  Returns false when the
// refinement leaves the feasible J1 range or fails to converge.
bool refine_against_dc(const std::vector<double>& g_abs,
                       const std::vector<double>& detunings,
                       const std::vector<double>& freqs,
                       const std::vector<double>& targets, double phase,
                       std::vector<double>& eps) {
  if (eps.size() < 2) return true;
  for (int pass = 0; pass < 500; ++pass) {
    const std::vector<double> mags = dc_magnitudes(g_abs, detunings, freqs, eps, phase);
    if (mags.empty()) return pass == 0;  // incommensurate: closed form is exact
    double rel = 0.0;
    for (size_t i = 0; i < eps.size(); ++i)
      rel = std::max(rel, std::abs(mags[i] - targets[i]) / targets[i]);
    if (rel < 1e-8) return true;
    // Damped multiplicative update (|C_i| is ~ linear in eps_i on the rising
    // branch); the half-power step keeps the strongly cross-coupled system
    // from oscillating.
    for (size_t i = 0; i < eps.size(); ++i) {
      const double factor = std::clamp(targets[i] / mags[i], 0.5, 2.0);
      eps[i] *= std::sqrt(factor);
      if (!(eps[i] <= j1_peak_x)) return false;  // off the monotonic branch
    }
  }
  return false;
}

}  // namespace

std::vector<double> dc_effective_couplings(const DeviceParams& device,
                                           const std::vector<int>& targets,
                                           const std::vector<double>& eps,
                                           double phase) {
  require(!targets.empty(), "coupling evaluation needs at least one target qubit");
  require(targets.size() == eps.size(),
          "coupling evaluation needs one modulation index per tone");
  std::vector<double> g_abs, detunings, freqs;
  for (size_t i = 0; i < targets.size(); ++i) {
    const int j = targets[i];
    require(j >= 1 && j < device.n_qubits(), "coupling evaluation target out of range");
    require(eps[i] >= 0.0, "modulation indices must be non-negative");
    g_abs.push_back(std::abs(device.coupling(j)));
    detunings.push_back(device.detuning(j));
    freqs.push_back(std::abs(device.detuning(j)));
  }
  std::vector<double> mags = dc_magnitudes(g_abs, detunings, freqs, eps, phase);
  if (mags.empty()) {
    mags.resize(targets.size());
    for (size_t i = 0; i < targets.size(); ++i)
      mags[i] = std::abs(effective_coupling(g_abs[i], eps, i));
  }
  return mags;
}

std::vector<double> calibrate_amplitudes(const DeviceParams& device,
                                         const std::vector<int>& targets,
                                         const std::vector<double>& g_targets,
                                         double phase) {
  require(!targets.empty(), "calibration needs at least one target qubit");
  require(targets.size() == g_targets.size(),
          "calibration needs one coupling target per qubit");
  std::vector<double> g_abs, detunings, freqs;
  for (size_t i = 0; i < targets.size(); ++i) {
    const int j = targets[i];
    require(j >= 1 && j < device.n_qubits(), "calibration target index out of range");
    require(g_targets[i] > 0.0, "coupling targets are magnitudes and must be positive");
    g_abs.push_back(std::abs(device.coupling(j)));
    detunings.push_back(device.detuning(j));
    freqs.push_back(std::abs(device.detuning(j)));
  }

  const auto solve = [&](const std::vector<double>& want, std::vector<double>& eps_out) {
    return try_calibrate(g_abs, want, eps_out) &&
           refine_against_dc(g_abs, detunings, freqs, want, phase, eps_out);
  };

  std::vector<double> eps;
  if (solve(g_targets, eps)) return eps;

  // Infeasible: find the largest uniform scale-back that works and report it.
  double lo = 0.0, hi = 1.0;
  std::vector<double> scaled(targets.size());
  for (int it = 0; it < 40; ++it) {
    const double s = 0.5 * (lo + hi);
    for (size_t i = 0; i < scaled.size(); ++i) scaled[i] = s * g_targets[i];
    std::vector<double> tmp;
    (solve(scaled, tmp) ? lo : hi) = s;
  }
  std::ostringstream msg;
  msg << "requested couplings are out of reach; at most " << lo
      << " of the request is attainable (largest feasible per-tone couplings:";
  for (double t : g_targets) msg << ' ' << (lo * t) / units::MHz << " MHz";
  msg << ")";
  Error::numeric(msg.str());
}

double max_uniform_coupling(const DeviceParams& device, const std::vector<int>& targets) {
  require(!targets.empty(), "feasibility query needs at least one target qubit");
  std::vector<double> g_abs;
  for (int j : targets) {
    require(j >= 1 && j < device.n_qubits(), "feasibility target index out of range");
    g_abs.push_back(std::abs(device.coupling(j)));
  }
  const double cap = *std::min_element(g_abs.begin(), g_abs.end()) * j1_peak_value;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 50; ++it) {
    const double g = 0.5 * (lo + hi);
    std::vector<double> tmp;
    (try_calibrate(g_abs, std::vector<double>(g_abs.size(), g), tmp) ? lo : hi) = g;
  }
  return lo;
}

double gate_time(double g_eff, GateKind kind, int n) {
  require(g_eff > 0.0, "gate time needs a positive effective coupling");
  require(n >= 0, "gate repetition index must be >= 0");
  const double quarter = (kind == GateKind::sqrt_iswap) ? 0.25 : 0.5;
  return (n + quarter) * pi / g_eff;
}

double w_share_time(double g_per_tone, int n_targets) {
  require(g_per_tone > 0.0, "sharing time needs a positive coupling");
  require(n_targets >= 1, "sharing time needs at least one target");
  const double n = static_cast<double>(n_targets);
  return std::acos(1.0 / std::sqrt(n + 1.0)) / (std::sqrt(n) * g_per_tone);
}

DriveConfig make_calibrated_drive(const DeviceParams& device,
                                  const std::vector<int>& targets,
                                  double g_per_tone, double duration, double phase) {
  const std::vector<double> eps = calibrate_amplitudes(
      device, targets, std::vector<double>(targets.size(), g_per_tone), phase);
  DriveConfig drive;
  drive.duration = duration;
  for (size_t i = 0; i < targets.size(); ++i) {
    DriveTone tone;
    tone.target = targets[i];
    tone.frequency = std::abs(device.detuning(targets[i]));
    tone.amplitude = eps[i] * tone.frequency;
    tone.phase = phase;
    drive.tones.push_back(tone);
  }
  drive.validate();
  return drive;
}

DeviceParams subsystem(const DeviceParams& device, const std::vector<int>& computational) {
  require(!computational.empty(), "subsystem needs at least one computational qubit");
  DeviceParams sub;
  sub.bus_freq = device.bus_freq;
  sub.truncation = device.truncation;
  sub.flux_noise = device.flux_noise;
  sub.qubits.push_back(device.qubits.front());
  int previous = 0;
  for (int q : computational) {
    require(q > previous, "subsystem qubit list must be strictly increasing and >= 1");
    require(q < device.n_qubits(), "subsystem qubit index out of range");
    sub.qubits.push_back(device.qubits[static_cast<size_t>(q)]);
    previous = q;
  }
  sub.validate();
  return sub;
}

double transmon_freq_at_flux(double omega_sweet01, double ec, double phi) {
  require(ec > 0.0, "charging energy must be positive");
  const double wj = omega_sweet01 + ec;
  return wj * std::sqrt(std::abs(std::cos(pi * phi))) - ec;
}

double flux_operating_point(double omega_op01, double omega_sweet01, double ec) {
  require(ec > 0.0, "charging energy must be positive");
  require(omega_op01 <= omega_sweet01,
          "operating frequency cannot exceed the sweet-spot frequency");
  const double wj = omega_sweet01 + ec;
  const double c = std::pow((omega_op01 + ec) / wj, 2);
  require(c > 0.0 && c <= 1.0, "operating frequency outside the flux band");
  return std::acos(c) / pi;
}

double flux_slope(double omega_op01, double omega_sweet01, double ec) {
  const double phi = flux_operating_point(omega_op01, omega_sweet01, ec);
  const double wj = omega_sweet01 + ec;
  const double c = std::cos(pi * phi);
  return -wj * pi * std::sin(pi * phi) / (2.0 * std::sqrt(c));
}

double echo_rate_from_flux_noise(double slope, double sqrt_amp_phi0) {
  return std::sqrt(std::log(2.0)) * std::abs(slope) * sqrt_amp_phi0;
}

}  // namespace paragate
