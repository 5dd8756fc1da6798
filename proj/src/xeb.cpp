// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/xeb.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "paragate/optimize.hpp"

namespace paragate {

namespace {

constexpr double kProbFloor = 1e-12;

Matrix rz(double theta) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(-0.5 * iu * theta);
  m(1, 1) = std::exp(0.5 * iu * theta);
  return m;
}

Matrix xy_half_pi(double axis_angle) {
  const double c = std::cos(pi / 4.0), s = std::sin(pi / 4.0);
  Matrix m(2, 2);
  m << c, -iu * s * std::exp(-iu * axis_angle), -iu * s * std::exp(iu * axis_angle), c;
  return m;
}

std::vector<double> floored_distribution(const std::vector<double>& p_th, bool* floored) {
  std::vector<double> q = p_th;
  bool touched = false;
  double total = 0.0;
  for (double& v : q) {
    if (v < kProbFloor) {
      v = kProbFloor;
      touched = true;
    }
    total += v;
  }
  for (double& v : q) v /= total;
  if (floored != nullptr) *floored = touched;
  return q;
}

void check_distribution(const std::vector<double>& p, const char* what) {
  require(p.size() >= 2, std::string(what) + " needs at least two outcomes");
  double total = 0.0;
  for (double v : p) {
    require(v >= -1e-12, std::string(what) + " has a negative probability");
    total += v;
  }
  require(std::abs(total - 1.0) <= 1e-9, std::string(what) + " is not normalized");
}

// -sum p log2 q
double cross_entropy(const std::vector<double>& p, const std::vector<double>& q) {
  double h = 0.0;
  for (size_t x = 0; x < p.size(); ++x) h -= p[x] * std::log2(q[x]);
  return h;
}

// One cycle's two-qubit channel as a dense map on 4x4 densities:
// rho'(k,l) = sum_ij T(4k+l, 4i+j) rho(i,j).
Matrix apply_transfer(const Matrix& transfer, const Matrix& rho) {
  Matrix out = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      cxd acc = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) acc += transfer(4 * k + l, 4 * i + j) * rho(i, j);
      out(k, l) = acc;
    }
  return out;
}

// Unitary conjugation as a transfer matrix in the same row-major convention.
Matrix unitary_transfer(const Matrix& u) {
  Matrix t(16, 16);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t(4 * k + l, 4 * i + j) = u(k, i) * std::conj(u(l, j));
  return t;
}

struct CycleContext {
  const XebGateSet& gates;
  const Matrix* gate_transfer;   // nullptr = unitary entangler
  const Matrix* gate_unitary;    // ideal entangler (p_th and ideal runs)
  bool include_two_qubit_gate;
  double depolarizing;
};

// Simulate one random sequence at `depth`, returning (p_exp, p_th).
std::pair<std::vector<double>, std::vector<double>> one_sequence(const CycleContext& ctx,
                                                                 int depth, Rng& rng) {
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = 1.0;
  Vector psi = Vector::Zero(4);
  psi(0) = 1.0;
  for (int k = 0; k < depth; ++k) {
    const Matrix& ga = ctx.gates.gates[rng.uniform_int(64)];
    const Matrix& gb = ctx.gates.gates[rng.uniform_int(64)];
    const Matrix sq = kron(ga, gb);
    psi = (sq * psi).eval();
    rho = (sq * rho * sq.adjoint()).eval();
    if (ctx.include_two_qubit_gate) {
      psi = (*ctx.gate_unitary * psi).eval();
      rho = ctx.gate_transfer != nullptr ? apply_transfer(*ctx.gate_transfer, rho)
                                         : Matrix(*ctx.gate_unitary * rho *
                                                  ctx.gate_unitary->adjoint());
    }
    if (ctx.depolarizing > 0.0) {
      const double tr = rho.trace().real();
      rho = ((1.0 - ctx.depolarizing) * rho).eval();
      rho += ctx.depolarizing * tr / 4.0 * Matrix::Identity(4, 4);
    }
  }
  std::vector<double> p_exp(4), p_th(4);
  double total = 0.0;
  for (int x = 0; x < 4; ++x) {
    p_exp[static_cast<size_t>(x)] = std::max(0.0, rho(x, x).real());
    total += p_exp[static_cast<size_t>(x)];
    p_th[static_cast<size_t>(x)] = std::norm(psi(x));
  }
  require(total > 0.0, "sequence lost all computational population");
  for (double& v : p_exp) v /= total;
  return {std::move(p_exp), std::move(p_th)};
}

std::vector<double> sample_distribution(const std::vector<double>& p, int shots, Rng& rng) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (size_t x = 0; x < p.size(); ++x) {
    acc += p[x];
    cdf[x] = acc;
  }
  cdf.back() = 1.0;
  std::vector<double> freq(p.size(), 0.0);
  for (int s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    const size_t x = static_cast<size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) -
                                         cdf.begin());
    freq[std::min(x, p.size() - 1)] += 1.0;
  }
  for (double& v : freq) v /= shots;
  return freq;
}

void check_options(const XebOptions& options) {
  require(!options.depths.empty(), "XEB needs at least one depth");
  for (size_t i = 0; i < options.depths.size(); ++i) {
    require(options.depths[i] >= 1, "depths must be >= 1");
    if (i > 0)
      require(options.depths[i] > options.depths[i - 1], "depths must be strictly increasing");
  }
  require(options.n_seq >= 1, "XEB needs at least one sequence per depth");
  require(options.shots >= 0, "negative shot count");
  require(options.depolarizing >= 0.0 && options.depolarizing < 1.0,
          "depolarizing strength must be in [0, 1)");
}

// A circuit whose ideal distribution is (numerically) uniform carries no
// cross-entropy signal; the estimator is 0/0 on it.  Short circuits from
// this gate set hit that case with finite probability (every gate maps |0>
// to an equal superposition), so such draws are rejected like an
// experimenter would discard them from the circuit ensemble.
bool xeb_degenerate(const std::vector<double>& p_th) {
  const std::vector<double> q = floored_distribution(p_th, nullptr);
  const std::vector<double> uniform(q.size(), 1.0 / static_cast<double>(q.size()));
  return std::abs(cross_entropy(uniform, q) - cross_entropy(q, q)) <= 1e-9;
}

XebRun run_circuits(const CycleContext& ctx, const XebOptions& options, std::uint64_t seed) {
  XebRun run;
  run.depths = options.depths;
  run.fidelities.resize(static_cast<Eigen::Index>(options.depths.size()), options.n_seq);
  for (size_t di = 0; di < options.depths.size(); ++di)
    for (int s = 0; s < options.n_seq; ++s) {
      std::vector<double> p_exp, p_th;
      std::uint64_t salt = 0;
      while (true) {
        Rng rng = Rng(seed).spawn(static_cast<std::uint64_t>(di) * 1000003u +
                                  static_cast<std::uint64_t>(s) + 1 + salt * 537133171u);
        std::tie(p_exp, p_th) = one_sequence(ctx, options.depths[di], rng);
        if (!xeb_degenerate(p_th)) {
          if (options.shots > 0) p_exp = sample_distribution(p_exp, options.shots, rng);
          break;
        }
        require(++salt < 100, "could not draw a non-degenerate XEB circuit");
      }
      run.fidelities(static_cast<Eigen::Index>(di), s) = xeb_fidelity(p_exp, p_th);
    }
  run.mean_fidelity.resize(options.depths.size());
  for (size_t di = 0; di < options.depths.size(); ++di)
    run.mean_fidelity[di] =
        run.fidelities.row(static_cast<Eigen::Index>(di)).mean();
  if (options.depths.size() >= 3) run.fit = fit_decay(run.depths, run.mean_fidelity);
  return run;
}

}  // namespace

XebGateSet build_gate_set() {
  XebGateSet set;
  set.gates.reserve(64);
  for (int n = 0; n < 8; ++n)
    for (int m = 0; m < 8; ++m)
      set.gates.push_back(rz(m * pi / 8.0) * xy_half_pi(n * pi / 8.0));
  for (size_t a = 0; a < set.gates.size(); ++a) {
    require((set.gates[a] * set.gates[a].adjoint() - Matrix::Identity(2, 2))
                    .cwiseAbs()
                    .maxCoeff() <= 1e-12,
            "gate-set element is not unitary");
    // Global-phase-equivalent duplicates have |Tr(U† V)| = 2.
    for (size_t b = 0; b < a; ++b)
      require(std::abs((set.gates[a].adjoint() * set.gates[b]).trace()) < 2.0 - 1e-9,
              "gate set contains duplicate elements");
  }
  return set;
}

double xeb_fidelity(const std::vector<double>& p_exp, const std::vector<double>& p_th,
                    bool* floored) {
  check_distribution(p_exp, "sampled distribution");
  check_distribution(p_th, "ideal distribution");
  require(p_exp.size() == p_th.size(), "distribution sizes differ");
  const std::vector<double> q = floored_distribution(p_th, floored);
  const std::vector<double> uniform(q.size(), 1.0 / static_cast<double>(q.size()));
  const double h_uniform = cross_entropy(uniform, q);
  const double h_self = cross_entropy(q, q);
  const double denom = h_uniform - h_self;
  if (std::abs(denom) <= 1e-12)
    Error::numeric("cross-entropy denominator degenerate (ideal distribution is uniform)");
  return (h_uniform - cross_entropy(p_exp, q)) / denom;
}

DecayFit fit_decay(const std::vector<int>& depths, const std::vector<double>& mean_f) {
  require(depths.size() == mean_f.size() && depths.size() >= 3,
          "decay fit needs at least three depths");
  DecayFit fit;
  const bool positive = std::all_of(mean_f.begin(), mean_f.end(),
                                    [](double f) { return f > 0.0; });
  const Eigen::Index n = static_cast<Eigen::Index>(depths.size());
  if (positive) {
    // ln F = ln A + m ln base, ordinary least squares.
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = depths[static_cast<size_t>(i)];
      y(i) = std::log(mean_f[static_cast<size_t>(i)]);
    }
    const Eigen::Matrix2d xtx = x.transpose() * x;
    const Eigen::Vector2d beta = xtx.ldlt().solve(x.transpose() * y);
    fit.amplitude = std::exp(beta(0));
    fit.base = std::exp(beta(1));
    fit.log_space = true;
    if (n > 2) {
      const double ssr = (y - x * beta).squaredNorm();
      const double sigma2 = ssr / static_cast<double>(n - 2);
      const double var_slope = sigma2 * xtx.inverse()(1, 1);
      fit.base_std_err = fit.base * std::sqrt(std::max(0.0, var_slope));
    }
  } else {
    // Non-positive means break the log transform; fit directly.
    auto objective = [&](const Eigen::VectorXd& v) {
      double sse = 0.0;
      for (size_t i = 0; i < depths.size(); ++i) {
        const double model = v(0) * std::pow(v(1), depths[i]);
        sse += (model - mean_f[i]) * (model - mean_f[i]);
      }
      return sse;
    };
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.9;
    const SimplexResult best = nelder_mead(objective, x0);
    fit.amplitude = best.x(0);
    fit.base = best.x(1);
    fit.log_space = false;
  }
  return fit;
}

XebRun run_xeb_ideal(GateKind kind, const XebOptions& options, std::uint64_t seed) {
  check_options(options);
  const XebGateSet gates = build_gate_set();
  const Matrix u = ideal_exchange_unitary(kind);
  CycleContext ctx{gates, nullptr, &u, options.include_two_qubit_gate, options.depolarizing};
  return run_circuits(ctx, options, seed);
}

XebRun run_xeb_device(const DeviceParams& device, const DriveConfig& drive, int target,
                      GateKind kind, const NoiseModel& noise, const XebOptions& options,
                      std::uint64_t seed) {
  check_options(options);
  require(options.depolarizing == 0.0,
          "the injected depolarizing channel is an ideal-run calibration hook");
  device.validate();
  drive.validate();

  // Reconstruct the full noisy process of one entangler pulse.
  const LevelScheme scheme = LevelScheme::uniform(device.n_qubits(), device.truncation);
  EvolveOptions evolve_options;
  evolve_options.threads = options.threads;
  const std::vector<QuantumState> basis = process_basis_states(scheme, 0, target);
  const BatchResult batch = evolve_batch(device, drive, basis, noise, {0.0}, evolve_options);
  std::vector<Eigen::Ref<const Matrix>> finals;
  finals.reserve(16);
  for (int s = 0; s < 16; ++s) finals.emplace_back(batch.sector_density(s, 0));
  Matrix transfer = process_transfer(finals, batch.sector, 0, target);

  // Fold the calibrated virtual-Z frames into the process once — the
  // hardware equivalent compiles these phases into the neighbouring
  // single-qubit layers.
  const Matrix u = ideal_exchange_unitary(kind);
  const std::vector<double> z = calibrate_virtual_z(transfer, u);
  auto z_mask = [&](double z0, double z1) {
    Matrix zd = Matrix::Identity(4, 4);
    for (int b = 0; b < 4; ++b) {
      const double phase = (b >> 1 ? z0 : 0.0) + (b & 1 ? z1 : 0.0);
      zd(b, b) = std::exp(iu * phase);
    }
    return zd;
  };
  transfer = (unitary_transfer(z_mask(z[0], z[1])) * transfer *
              unitary_transfer(z_mask(z[2], z[3])))
                 .eval();

  const XebGateSet gates = build_gate_set();
  CycleContext ctx{gates, &transfer, &u, options.include_two_qubit_gate, 0.0};
  XebRun run = run_circuits(ctx, options, seed);
  run.gate_leakage = 1.0 - process_trace_retention(transfer);

  // Per-cycle drive-phase ledger: the tone must advance by Delta * t_cycle
  // each cycle to keep realizing the same process on hardware clocks.
  const double t_cycle = drive.duration + options.t_single_qubit;
  const double delta = device.detuning(target);
  const int max_depth = options.depths.back();
  run.cycle_phases.resize(static_cast<size_t>(max_depth));
  const double phi0 = drive.tones.front().phase;
  for (int k = 0; k < max_depth; ++k) {
    double phi = std::fmod(phi0 + k * delta * t_cycle, two_pi);
    if (phi < 0.0) phi += two_pi;
    run.cycle_phases[static_cast<size_t>(k)] = phi;
  }
  return run;
}

}  // namespace paragate
