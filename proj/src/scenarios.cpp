// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "paragate/dynamics.hpp"
#include "paragate/errors.hpp"
#include "paragate/pulseshape.hpp"
#include "paragate/tomography.hpp"
#include "paragate/xeb.hpp"

namespace paragate {

namespace {

// Shortest round-trip decimal form: deterministic, exact, locale-free.
std::string fnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fint(long v) { return std::to_string(v); }

// Accumulates the per-run scalar record in both text and JSON form.
class Record {
 public:
  void add(const std::string& key, double v) {
    rows_.emplace_back(key, fnum(v));
    json_[key] = v;
  }
  void add(const std::string& key, long v) {
    rows_.emplace_back(key, fint(v));
    json_[key] = v;
  }
  void add(const std::string& key, int v) { add(key, static_cast<long>(v)); }
  void add(const std::string& key, bool v) {
    rows_.emplace_back(key, v ? "true" : "false");
    json_[key] = v;
  }
  void add(const std::string& key, const std::string& v) {
    rows_.emplace_back(key, v);
    json_[key] = v;
  }
  std::string text() const {
    size_t width = 0;
    for (const auto& [k, v] : rows_) width = std::max(width, k.size());
    std::string out;
    for (const auto& [k, v] : rows_)
      out += k + ":" + std::string(width - k.size() + 1, ' ') + v + "\n";
    return out;
  }
  const Json& json() const { return json_; }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
  Json json_ = Json::object();
};

class Emitter {
 public:
  Emitter(const ScenarioConfig& config, const RunOptions& options)
      : out_dir_(options.out_dir),
        prefix_(schema::text_or(config.run, "run", "prefix", config.name)) {
    std::filesystem::create_directories(out_dir_);
  }

  std::string path(const std::string& suffix) const {
    return (std::filesystem::path(out_dir_) / (prefix_ + suffix)).string();
  }

  void write(RunOutput& output, const std::string& suffix, const std::string& content) {
    const std::string p = path(suffix);
    std::ofstream out(p, std::ios::binary);
    if (!out) Error::invalid("cannot write output file \"" + p + "\"");
    out << content;
    output.files_written.push_back(p);
  }

  void write_csv(RunOutput& output, const std::string& suffix,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (size_t i = 0; i < header.size(); ++i)
      text += (i ? "," : "") + header[i];
    text += "\n";
    for (const auto& row : rows) {
      require(row.size() == header.size(), "csv row width mismatch");
      for (size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + fnum(row[i]);
      text += "\n";
    }
    write(output, suffix, text);
  }

  void finish(RunOutput& output, const ScenarioConfig& config, Record& record) {
    Record full;
    full.add("command", config.command);
    full.add("config", prefix_);
    output.summary_json = record.json();
    output.summary_json["command"] = config.command;
    output.summary_json["config"] = prefix_;
    output.summary_text = full.text() + record.text();
    write(output, "_summary.txt", output.summary_text);
  }

 private:
  std::string out_dir_;
  std::string prefix_;
};

const DeviceSpec& need_device(const ScenarioConfig& config) {
  if (!config.device)
    Error::invalid("config.device: required by command \"" + config.command + "\"");
  return *config.device;
}

const DriveSpec& need_drive(const ScenarioConfig& config) {
  if (!config.drive)
    Error::invalid("config.drive: required by command \"" + config.command + "\"");
  return *config.drive;
}

NoiseModel noise_from_run(const DeviceParams& device, const Json& run) {
  NoiseModel noise = NoiseModel::from_device(device);
  if (!schema::flag_or(run, "run", "decoherence", true))
    noise = noise.without_decoherence();
  if (!schema::flag_or(run, "run", "zz", true)) noise = noise.without_zz();
  return noise;
}

GateKind gate_from_run(const Json& run) {
  const std::string name = schema::text_or(run, "run", "gate", "sqrt_iswap");
  if (name == "sqrt_iswap") return GateKind::sqrt_iswap;
  if (name == "iswap") return GateKind::iswap;
  Error::invalid("run.gate: expected \"sqrt_iswap\" or \"iswap\"");
}

std::vector<int> targets_from_run(const Json& run, const DeviceParams& device) {
  const std::vector<long> raw = schema::integer_list(run, "run", "targets");
  require(!raw.empty(), "run.targets: needs at least one qubit");
  std::vector<int> targets;
  for (long t : raw) {
    if (t < 1 || t >= device.n_qubits())
      Error::invalid("run.targets: qubit " + std::to_string(t) + " out of range");
    targets.push_back(static_cast<int>(t));
  }
  std::set<int> unique(targets.begin(), targets.end());
  require(unique.size() == targets.size(), "run.targets: duplicate qubit");
  return targets;
}

std::vector<int> participants_of(const DriveConfig& drive) {
  std::set<int> modes{0};
  for (const DriveTone& tone : drive.tones) modes.insert(tone.target);
  return {modes.begin(), modes.end()};
}

// --- exchange ---------------------------------------------------------------

RunOutput cmd_exchange(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run", {"prefix", "samples", "decoherence", "zz"});
  const DeviceParams device = need_device(config).to_device();
  const DriveConfig drive = need_drive(config).to_drive();
  const long samples = schema::integer_or(config.run, "run", "samples", 401);
  require(samples >= 3, "run.samples: need at least three samples");
  const NoiseModel noise = noise_from_run(device, config.run);

  std::vector<double> times(static_cast<size_t>(samples));
  for (long k = 0; k < samples; ++k)
    times[static_cast<size_t>(k)] = drive.duration * static_cast<double>(k) /
                                    static_cast<double>(samples - 1);

  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  std::vector<int> occ(static_cast<size_t>(device.n_qubits()), 0);
  occ[0] = 1;
  EvolveOptions evolve_options;
  evolve_options.threads = options.threads;
  const Trajectory traj =
      evolve(device, drive, basis_ket(scheme, occ), noise, times, evolve_options);

  // Spread of the participating-qubit populations; the half-swap (equal
  // sharing) point is its first interior local minimum.  The raw spread
  // carries fast ripples at the modulation period, so it is averaged over
  // 1.5 modulation periods first and a candidate must have descended below
  // half of the initial spread.
  const std::vector<int> participants = participants_of(drive);
  const Eigen::Index n_t = static_cast<Eigen::Index>(times.size());
  std::vector<double> spread(static_cast<size_t>(n_t));
  for (Eigen::Index k = 0; k < n_t; ++k) {
    double lo = 1.0, hi = 0.0;
    for (int q : participants) {
      lo = std::min(lo, traj.populations(q, k));
      hi = std::max(hi, traj.populations(q, k));
    }
    spread[static_cast<size_t>(k)] = hi - lo;
  }
  double nu_min = drive.tones.front().frequency;
  for (const DriveTone& tone : drive.tones) nu_min = std::min(nu_min, tone.frequency);
  const double dt = times[1] - times[0];
  const Eigen::Index w = std::clamp<Eigen::Index>(
      nu_min > 0.0 ? std::lround(1.5 * (two_pi / nu_min) / dt) : 1, 1, n_t / 4);
  std::vector<double> smooth(static_cast<size_t>(n_t));
  for (Eigen::Index k = 0; k < n_t; ++k) {
    const Eigen::Index a = std::max<Eigen::Index>(0, k - w);
    const Eigen::Index b = std::min<Eigen::Index>(n_t - 1, k + w);
    double acc = 0.0;
    for (Eigen::Index j = a; j <= b; ++j) acc += spread[static_cast<size_t>(j)];
    smooth[static_cast<size_t>(k)] = acc / static_cast<double>(b - a + 1);
  }
  double half_swap = -1.0;
  for (Eigen::Index k = 1; k + 1 < n_t; ++k) {
    const double sm = smooth[static_cast<size_t>(k - 1)];
    const double s0 = smooth[static_cast<size_t>(k)];
    const double sp = smooth[static_cast<size_t>(k + 1)];
    if (s0 <= sm && s0 <= sp && s0 < 0.5 * smooth[0]) {
      const double denom = sm - 2.0 * s0 + sp;
      const double shift = denom > 1e-15 ? 0.5 * (sm - sp) / denom : 0.0;
      half_swap = times[static_cast<size_t>(k)] + shift * dt;
      break;
    }
  }

  RunOutput output;
  Emitter emit(config, options);
  std::vector<std::string> header{"time_ns"};
  for (int q = 0; q < device.n_qubits(); ++q) header.push_back("p" + std::to_string(q));
  for (int q = 0; q < device.n_qubits(); ++q)
    header.push_back("leak" + std::to_string(q));
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k] / units::ns};
    for (int q = 0; q < device.n_qubits(); ++q)
      row.push_back(traj.populations(q, static_cast<Eigen::Index>(k)));
    for (int q = 0; q < device.n_qubits(); ++q)
      row.push_back(traj.leakage(q, static_cast<Eigen::Index>(k)));
    rows.push_back(std::move(row));
  }
  emit.write_csv(output, "_trajectory.csv", header, rows);

  Record record;
  record.add("duration_ns", drive.duration / units::ns);
  record.add("samples", samples);
  record.add("participants", static_cast<long>(participants.size()));
  record.add("half_swap_found", half_swap >= 0.0);
  if (half_swap >= 0.0) record.add("half_swap_ns", half_swap / units::ns);
  const Eigen::Index last = static_cast<Eigen::Index>(times.size()) - 1;
  for (int q : participants)
    record.add("final_p" + std::to_string(q), traj.populations(q, last));
  emit.finish(output, config, record);
  return output;
}

// --- budget -------------------------------------------------------------------

void add_budget_fields(Record& record, const ChannelBudget& budget) {
  record.add("fidelity_pct", 100.0 * budget.fidelity);
  record.add("fidelity_std_err_pct", 100.0 * budget.fidelity_std_err);
  record.add("eps_decoherence_pct", 100.0 * budget.eps_decoherence);
  record.add("eps_zz_pct", 100.0 * budget.eps_zz);
  record.add("eps_flux_pct", 100.0 * budget.eps_flux);
  record.add("eps_flux_std_err_pct", 100.0 * budget.eps_flux_std_err);
  record.add("sigma_flux_uPhi0", budget.sigma_phi0 * 1e6);
  record.add("duration_ns", budget.duration / units::ns);
  record.add("mc_realizations", static_cast<long>(budget.mc_realizations));
}

RunOutput cmd_budget(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "scenario", "targets", "mc_realizations", "gate"});
  const DeviceParams device = need_device(config).to_device();

  BudgetRequest request;
  request.drive = need_drive(config).to_drive();
  const std::string scenario = schema::text_or(config.run, "run", "scenario", "w");
  if (scenario == "w")
    request.scenario = BudgetScenario::w_state;
  else if (scenario == "gate")
    request.scenario = BudgetScenario::gate;
  else
    Error::invalid("run.scenario: expected \"w\" or \"gate\"");
  request.targets = targets_from_run(config.run, device);
  request.gate = gate_from_run(config.run);
  request.mc_realizations =
      static_cast<int>(schema::integer_or(config.run, "run", "mc_realizations", 1000));
  request.threads = options.threads;

  const ChannelBudget budget = error_budget(device, request, options.seed);

  RunOutput output;
  Emitter emit(config, options);
  emit.write_csv(output, "_budget.csv",
                 {"fidelity_pct", "fidelity_std_err_pct", "eps_decoherence_pct",
                  "eps_zz_pct", "eps_flux_pct", "eps_flux_std_err_pct",
                  "sigma_flux_uPhi0", "duration_ns", "mc_realizations"},
                 {{100.0 * budget.fidelity, 100.0 * budget.fidelity_std_err,
                   100.0 * budget.eps_decoherence, 100.0 * budget.eps_zz,
                   100.0 * budget.eps_flux, 100.0 * budget.eps_flux_std_err,
                   budget.sigma_phi0 * 1e6, budget.duration / units::ns,
                   static_cast<double>(budget.mc_realizations)}});

  Record record;
  record.add("scenario", scenario);
  add_budget_fields(record, budget);
  emit.finish(output, config, record);
  return output;
}

// --- tomography -----------------------------------------------------------------

Matrix w_target_density(int n_qubits) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  Vector w = Vector::Zero(dim);
  for (int k = 0; k < n_qubits; ++k)
    w(Eigen::Index(1) << (n_qubits - 1 - k)) = 1.0 / std::sqrt(double(n_qubits));
  return w * w.adjoint();
}

void write_matrix_csv(Emitter& emit, RunOutput& output, const std::string& suffix,
                      const Matrix& m, bool imag_part) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back("c" + std::to_string(j));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(imag_part ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(row));
  }
  emit.write_csv(output, suffix, header, rows);
}

RunOutput cmd_tomography(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "targets", "shots", "decoherence", "zz", "max_iter"});
  const DeviceParams device = need_device(config).to_device();
  const DriveConfig drive = need_drive(config).to_drive();
  const std::vector<int> targets = targets_from_run(config.run, device);
  const long shots = schema::integer_or(config.run, "run", "shots", 10000);
  require(shots >= 0, "run.shots: must be non-negative");
  const long max_iter = schema::integer_or(config.run, "run", "max_iter", 2000);
  const NoiseModel noise = noise_from_run(device, config.run);

  // Prepare the W state on {common} + targets with the configured drive.
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  std::vector<int> occ(static_cast<size_t>(device.n_qubits()), 0);
  occ[0] = 1;
  EvolveOptions evolve_options;
  evolve_options.threads = options.threads;
  const Trajectory traj =
      evolve(device, drive, basis_ket(scheme, occ), noise, {drive.duration},
             evolve_options);

  std::vector<int> modes{0};
  modes.insert(modes.end(), targets.begin(), targets.end());
  std::sort(modes.begin(), modes.end());
  const int n = static_cast<int>(modes.size());

  const std::vector<BasisSetting> settings = all_settings(n);
  const TomographyDataset dataset = simulate_measurements(
      traj.final_state, modes, settings, static_cast<int>(shots), options.seed);
  const ReconstructionResult recon =
      mle_reconstruct(dataset, static_cast<int>(max_iter));

  const QubitProjection direct = project_to_qubits(traj.final_state, modes);
  const Matrix w_rho = w_target_density(n);
  const VirtualZResult mle_vs_w = virtual_z_correction(recon.rho, w_rho);
  const VirtualZResult direct_vs_w = virtual_z_correction(direct.rho, w_rho);

  RunOutput output;
  Emitter emit(config, options);
  emit.write(output, "_dataset.json", dataset_to_json(dataset));
  write_matrix_csv(emit, output, "_rho_mle_re.csv", recon.rho, false);
  write_matrix_csv(emit, output, "_rho_mle_im.csv", recon.rho, true);
  write_matrix_csv(emit, output, "_rho_direct_re.csv", direct.rho, false);
  write_matrix_csv(emit, output, "_rho_direct_im.csv", direct.rho, true);

  Record record;
  record.add("qubits", static_cast<long>(n));
  record.add("settings", static_cast<long>(settings.size()));
  record.add("shots_per_setting", shots);
  record.add("fidelity_mle_vs_direct", state_fidelity(recon.rho, direct.rho));
  record.add("fidelity_mle_vs_w", mle_vs_w.fidelity);
  record.add("fidelity_direct_vs_w", direct_vs_w.fidelity);
  record.add("projection_leakage", direct.leakage);
  record.add("mle_iterations", static_cast<long>(recon.iterations));
  record.add("mle_converged", recon.converged);
  record.add("mle_log_likelihood", recon.log_likelihood);
  emit.finish(output, config, record);
  return output;
}

// --- xeb -------------------------------------------------------------------------

RunOutput cmd_xeb(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "mode", "depths", "n_seq", "shots", "depolarizing",
                      "gate", "target", "t_single_qubit_ns", "decoherence", "zz"});
  const std::string mode = schema::text_or(config.run, "run", "mode", "ideal");
  if (mode != "ideal" && mode != "device")
    Error::invalid("run.mode: expected \"ideal\" or \"device\"");

  XebOptions xeb_options;
  for (long d : schema::integer_list(config.run, "run", "depths"))
    xeb_options.depths.push_back(static_cast<int>(d));
  xeb_options.n_seq = static_cast<int>(schema::integer_or(config.run, "run", "n_seq", 20));
  xeb_options.shots = static_cast<int>(schema::integer_or(config.run, "run", "shots", 0));
  xeb_options.depolarizing = schema::number_or(config.run, "run", "depolarizing", 0.0);
  xeb_options.t_single_qubit =
      schema::number_or(config.run, "run", "t_single_qubit_ns", 0.0) * units::ns;
  xeb_options.threads = options.threads;
  const GateKind kind = gate_from_run(config.run);

  XebRun run;
  if (mode == "ideal") {
    run = run_xeb_ideal(kind, xeb_options, options.seed);
  } else {
    const DeviceParams device = need_device(config).to_device();
    const DriveConfig drive = need_drive(config).to_drive();
    const int target = static_cast<int>(
        schema::integer_or(config.run, "run", "target", drive.tones.front().target));
    const NoiseModel noise = noise_from_run(device, config.run);
    run = run_xeb_device(device, drive, target, kind, noise, xeb_options, options.seed);
  }

  RunOutput output;
  Emitter emit(config, options);
  {
    std::vector<std::vector<double>> rows;
    for (size_t di = 0; di < run.depths.size(); ++di)
      for (Eigen::Index s = 0; s < run.fidelities.cols(); ++s)
        rows.push_back({static_cast<double>(run.depths[di]), static_cast<double>(s),
                        run.fidelities(static_cast<Eigen::Index>(di), s)});
    emit.write_csv(output, "_sequences.csv", {"depth", "sequence", "fidelity"}, rows);
  }
  {
    std::vector<std::vector<double>> rows;
    for (size_t di = 0; di < run.depths.size(); ++di)
      rows.push_back({static_cast<double>(run.depths[di]), run.mean_fidelity[di]});
    emit.write_csv(output, "_decay.csv", {"depth", "mean_fidelity"}, rows);
  }
  if (!run.cycle_phases.empty()) {
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < run.cycle_phases.size(); ++k)
      rows.push_back({static_cast<double>(k), run.cycle_phases[k]});
    emit.write_csv(output, "_phases.csv", {"cycle", "phase_rad"}, rows);
  }

  Record record;
  record.add("mode", mode);
  record.add("n_seq", static_cast<long>(xeb_options.n_seq));
  record.add("shots", static_cast<long>(xeb_options.shots));
  record.add("fit_amplitude", run.fit.amplitude);
  record.add("per_cycle_fidelity", run.fit.base);
  record.add("per_cycle_fidelity_std_err", run.fit.base_std_err);
  record.add("fit_log_space", run.fit.log_space);
  if (mode == "device") record.add("gate_leakage", run.gate_leakage);
  emit.finish(output, config, record);
  return output;
}

// --- cryoscope ----------------------------------------------------------------------

RunOutput cmd_cryoscope(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "undershoot", "tau_ns", "amplitude_phi0", "duration_ns",
                      "dt_ns", "savgol_window", "sweet_freq_GHz", "ec_MHz", "op_freq_GHz",
                      "ringing_amplitude", "ringing_freq_MHz", "ringing_decay_ns"});
  DistortionModel model;
  model.undershoot = schema::number(config.run, "run", "undershoot");
  model.tau = schema::number(config.run, "run", "tau_ns") * units::ns;
  const double ringing_amp = schema::number_or(config.run, "run", "ringing_amplitude", 0.0);
  if (ringing_amp != 0.0) {
    RingingSpec ringing;
    ringing.amplitude = ringing_amp;
    ringing.frequency = schema::number(config.run, "run", "ringing_freq_MHz") * 1e6;
    ringing.decay_time = schema::number(config.run, "run", "ringing_decay_ns") * units::ns;
    model.ringing = ringing;
  }
  model.validate();

  const double amplitude = schema::number(config.run, "run", "amplitude_phi0");
  require(amplitude > 0.0, "run.amplitude_phi0: must be positive");
  const double duration = schema::number(config.run, "run", "duration_ns") * units::ns;
  const double dt = schema::number_or(config.run, "run", "dt_ns", 1.0) * units::ns;
  require(duration > dt && dt > 0.0, "run.duration_ns: must exceed dt_ns");
  const int window =
      static_cast<int>(schema::integer_or(config.run, "run", "savgol_window", 9));

  // Flux-to-detuning map from the transmon dispersion around the bias point.
  const double sweet = schema::number(config.run, "run", "sweet_freq_GHz") * units::GHz;
  const double ec = schema::number(config.run, "run", "ec_MHz") * units::MHz;
  const double op = schema::number(config.run, "run", "op_freq_GHz") * units::GHz;
  const double phi_op = flux_operating_point(op, sweet, ec);
  const double f_op = transmon_freq_at_flux(sweet, ec, phi_op);
  auto freq_map = [sweet, ec, phi_op, f_op](double flux) {
    return transmon_freq_at_flux(sweet, ec, phi_op + flux) - f_op;
  };

  std::vector<double> durations;
  for (double t = dt; t <= duration + 1e-15; t += dt) durations.push_back(t);
  const CryoscopeTrace trace = cryoscope_synthesize(model, amplitude, durations, freq_map);

  const double swing = std::abs(model.undershoot) +
                       (model.ringing ? std::abs(model.ringing->amplitude) : 0.0);
  const auto inverse = invert_monotone_map(freq_map, 0.0, amplitude * (1.0 + swing + 0.05));
  const std::vector<double> flux_rec = cryoscope_analyze(trace, inverse, window);

  std::vector<double> flux_true(durations.size());
  for (size_t k = 0; k < durations.size(); ++k) {
    const double s = 1.0 + model.undershoot * std::exp(-durations[k] / model.tau);
    double v = s;
    if (model.ringing)
      v += model.ringing->amplitude * std::exp(-durations[k] / model.ringing->decay_time) *
           std::sin(two_pi * model.ringing->frequency * durations[k]);
    flux_true[k] = amplitude * v;
  }

  const UndershootFit fit =
      fit_exponential_undershoot(flux_rec, dt, amplitude, window);

  double rms = 0.0;
  int count = 0;
  for (size_t k = static_cast<size_t>(window); k + static_cast<size_t>(window) < flux_rec.size(); ++k) {
    const double rel = (flux_rec[k] - flux_true[k]) / amplitude;
    rms += rel * rel;
    ++count;
  }
  rms = count > 0 ? std::sqrt(rms / count) : 0.0;

  RunOutput output;
  Emitter emit(config, options);
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < durations.size(); ++k)
    rows.push_back({durations[k] / units::ns, trace.qx[k], trace.qy[k], flux_true[k],
                    flux_rec[k]});
  emit.write_csv(output, "_trace.csv",
                 {"duration_ns", "qx", "qy", "flux_true_phi0", "flux_rec_phi0"}, rows);

  Record record;
  record.add("model_undershoot", model.undershoot);
  record.add("model_tau_ns", model.tau / units::ns);
  record.add("fit_undershoot", fit.undershoot);
  record.add("fit_tau_ns", fit.tau / units::ns);
  record.add("flux_bias_phi0", phi_op);
  record.add("reconstruction_rms_rel", rms);
  emit.finish(output, config, record);
  return output;
}

// --- predistort --------------------------------------------------------------------

RunOutput cmd_predistort(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "undershoot", "tau_ns", "sample_rate_GHz", "duration_ns",
                      "waveform", "freq_MHz", "fir_taps", "settle_samples"});
  const double undershoot = schema::number(config.run, "run", "undershoot");
  const double tau = schema::number(config.run, "run", "tau_ns") * units::ns;
  const double f_s = schema::number_or(config.run, "run", "sample_rate_GHz", 1.0) * 1e9;
  const double duration = schema::number(config.run, "run", "duration_ns") * units::ns;
  const long n = std::lround(duration * f_s);
  require(n >= 8, "run.duration_ns: too short for the sample rate");
  const std::string waveform = schema::text_or(config.run, "run", "waveform", "step");
  const long fir_taps = schema::integer_or(config.run, "run", "fir_taps", 0);
  const long settle = schema::integer_or(config.run, "run", "settle_samples", 2);

  std::vector<double> x(static_cast<size_t>(n), 1.0);
  if (waveform == "sine") {
    const double freq = schema::number(config.run, "run", "freq_MHz") * 1e6;
    for (long k = 0; k < n; ++k)
      x[static_cast<size_t>(k)] = std::sin(two_pi * freq * static_cast<double>(k) / f_s);
  } else if (waveform != "step") {
    Error::invalid("run.waveform: expected \"step\" or \"sine\"");
  }

  const FilterCoefficients channel = distortion_filter(undershoot, tau, f_s);
  const FilterCoefficients inverse = iir_invert_exponential(undershoot, tau, f_s);
  const std::vector<double> distorted = apply_filter(x, channel);
  const std::vector<double> predistorted = apply_filter(x, inverse);
  const std::vector<double> roundtrip = apply_filter(predistorted, channel);

  auto residuals = [&](const std::vector<double>& y) {
    double rms = 0.0, peak = 0.0;
    long count = 0;
    for (size_t k = static_cast<size_t>(settle); k < y.size(); ++k) {
      const double r = y[k] - x[k];
      rms += r * r;
      peak = std::max(peak, std::abs(r));
      ++count;
    }
    return std::pair<double, double>{count ? std::sqrt(rms / count) : 0.0, peak};
  };
  const auto [raw_rms, raw_max] = residuals(distorted);
  const auto [corr_rms, corr_max] = residuals(roundtrip);

  RunOutput output;
  Emitter emit(config, options);
  Record record;
  record.add("waveform", waveform);
  record.add("undershoot", undershoot);
  record.add("tau_ns", tau / units::ns);
  record.add("raw_rms", raw_rms);
  record.add("raw_max", raw_max);
  record.add("corrected_rms", corr_rms);
  record.add("corrected_max", corr_max);

  std::vector<std::string> header{"n", "time_ns", "commanded", "distorted",
                                  "predistorted", "roundtrip"};
  std::vector<std::vector<double>> rows;
  for (long k = 0; k < n; ++k) {
    const size_t i = static_cast<size_t>(k);
    rows.push_back({static_cast<double>(k), static_cast<double>(k) / f_s / units::ns,
                    x[i], distorted[i], predistorted[i], roundtrip[i]});
  }

  if (fir_taps > 0) {
    const FilterCoefficients fir =
        fir_optimize(distorted, x, f_s, static_cast<int>(fir_taps), options.seed);
    const std::vector<double> fir_roundtrip = apply_filter(distorted, fir);
    const auto [fir_rms, fir_max] = residuals(fir_roundtrip);
    record.add("fir_taps", fir_taps);
    record.add("fir_rms", fir_rms);
    record.add("fir_max", fir_max);
    record.add("fir_improvement",
               fir_max > 0.0 ? raw_max / fir_max : std::numeric_limits<double>::infinity());
    header.push_back("fir_roundtrip");
    for (long k = 0; k < n; ++k)
      rows[static_cast<size_t>(k)].push_back(fir_roundtrip[static_cast<size_t>(k)]);
  }
  emit.write_csv(output, "_waveforms.csv", header, rows);
  emit.finish(output, config, record);
  return output;
}

// --- project -----------------------------------------------------------------------

RunOutput cmd_project(const ScenarioConfig& config, const RunOptions& options) {
  schema::allow_keys(config.run, "run",
                     {"prefix", "cases", "g_per_tone_MHz", "durations_ns",
                      "mc_realizations", "scan_halfwidth_frac", "scan_points", "ramp_ns"});
  const DeviceParams device = need_device(config).to_device();

  if (!config.run.contains("cases") || !config.run["cases"].is_array() ||
      config.run["cases"].empty())
    Error::invalid("run.cases: expected a non-empty array of target lists");
  std::vector<std::vector<int>> cases;
  for (size_t i = 0; i < config.run["cases"].size(); ++i) {
    const Json& entry = config.run["cases"][i];
    const std::string path = "run.cases[" + std::to_string(i) + "]";
    if (!entry.is_array() || entry.empty())
      Error::invalid(path + ": expected a non-empty array of qubit indices");
    std::vector<int> targets;
    for (size_t k = 0; k < entry.size(); ++k) {
      if (!entry[k].is_number_integer() && !entry[k].is_number_unsigned())
        Error::invalid(path + "[" + std::to_string(k) + "]: expected an integer");
      const long q = entry[k].get<long>();
      if (q < 1 || q >= device.n_qubits())
        Error::invalid(path + ": qubit " + std::to_string(q) + " out of range");
      targets.push_back(static_cast<int>(q));
    }
    cases.push_back(std::move(targets));
  }
  const std::vector<double> g_list =
      schema::number_list(config.run, "run", "g_per_tone_MHz");
  const std::vector<double> t_list = schema::number_list(config.run, "run", "durations_ns");
  require(g_list.size() == cases.size() && t_list.size() == cases.size(),
          "run: cases, g_per_tone_MHz and durations_ns must have equal length");
  const int mc =
      static_cast<int>(schema::integer_or(config.run, "run", "mc_realizations", 100));
  const double scan_frac =
      schema::number_or(config.run, "run", "scan_halfwidth_frac", 0.08);
  const int scan_points =
      static_cast<int>(schema::integer_or(config.run, "run", "scan_points", 33));
  const double ramp = schema::number_or(config.run, "run", "ramp_ns", 2.0) * units::ns;

  EvolveOptions evolve_options;
  evolve_options.threads = options.threads;

  RunOutput output;
  Emitter emit(config, options);
  Record record;
  record.add("cases", static_cast<long>(cases.size()));
  record.add("mc_realizations", static_cast<long>(mc));
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < cases.size(); ++i) {
    // Each case is an isolated n-qubit experiment: simulate the common
    // qubit plus that case's targets only, then locate the first fidelity
    // maximum around the scheduled share time and attribute the error
    // channels at that time.
    const DeviceParams case_device = subsystem(device, cases[i]);
    const NoiseModel noise = NoiseModel::from_device(case_device);
    std::vector<int> case_targets(cases[i].size());
    for (size_t k = 0; k < cases[i].size(); ++k)
      case_targets[k] = static_cast<int>(k) + 1;

    WStateRequest wreq;
    wreq.targets = case_targets;
    wreq.g_per_tone = g_list[i] * units::MHz;
    wreq.ramp = ramp;
    wreq.duration = t_list[i] * units::ns;
    wreq.time_scan_halfwidth = scan_frac * wreq.duration;
    wreq.time_scan_points = scan_points;
    const WStateResult wres = generate_w_state(case_device, wreq, noise, evolve_options);

    BudgetRequest breq;
    breq.scenario = BudgetScenario::w_state;
    breq.targets = case_targets;
    breq.drive = wres.drive;
    breq.drive.duration = wres.share_time;
    breq.mc_realizations = mc;
    breq.threads = options.threads;
    const ChannelBudget budget = error_budget(
        case_device, breq, options.seed + 1000003ull * static_cast<std::uint64_t>(i));

    const int participants = static_cast<int>(cases[i].size()) + 1;
    rows.push_back({static_cast<double>(participants), g_list[i],
                    wres.share_time / units::ns, 100.0 * budget.fidelity,
                    100.0 * budget.fidelity_std_err, 100.0 * budget.eps_decoherence,
                    100.0 * budget.eps_zz, 100.0 * budget.eps_flux,
                    budget.sigma_phi0 * 1e6});
    record.add("fidelity_pct_n" + std::to_string(participants), 100.0 * budget.fidelity);
    record.add("fidelity_std_err_pct_n" + std::to_string(participants),
               100.0 * budget.fidelity_std_err);
    record.add("share_time_ns_n" + std::to_string(participants),
               wres.share_time / units::ns);
  }
  emit.write_csv(output, "_cases.csv",
                 {"participants", "g_per_tone_MHz", "share_time_ns", "fidelity_pct",
                  "fidelity_std_err_pct", "eps_decoherence_pct", "eps_zz_pct",
                  "eps_flux_pct", "sigma_flux_uPhi0"},
                 rows);
  emit.finish(output, config, record);
  return output;
}

}  // namespace

RunOutput run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  require(options.threads >= 1, "thread count must be at least 1");
  config.validate();
  if (config.command == "exchange") return cmd_exchange(config, options);
  if (config.command == "budget") return cmd_budget(config, options);
  if (config.command == "tomography") return cmd_tomography(config, options);
  if (config.command == "xeb") return cmd_xeb(config, options);
  if (config.command == "cryoscope") return cmd_cryoscope(config, options);
  if (config.command == "predistort") return cmd_predistort(config, options);
  if (config.command == "project") return cmd_project(config, options);
  Error::invalid("config.command: unknown command \"" + config.command + "\"");
}

}  // namespace paragate
