// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"
#include "paragate/optimize.hpp"

namespace paragate {

namespace {

constexpr double kLeakageWarningLevel = 0.05;
constexpr double kProbFloor = 1e-15;

int dim_of(int n_qubits) { return 1 << n_qubits; }

int checked_n_qubits(const Matrix& rho) {
  const Eigen::Index d = rho.rows();
  require(d == rho.cols() && d >= 2, "density matrix must be square");
  int n = 0;
  while ((Eigen::Index{1} << n) < d) ++n;
  require((Eigen::Index{1} << n) == d, "density dimension must be a power of two");
  return n;
}

void check_density(const Matrix& rho, const char* what) {
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-8,
          std::string(what) + " must be Hermitian");
  require(std::abs(rho.trace().real() - 1.0) <= 1e-6 && std::abs(rho.trace().imag()) <= 1e-9,
          std::string(what) + " must have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-8, std::string(what) + " must be PSD");
}

// Hermitian square root with negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

// POVM elements E[s][k] = R_s† |k><k| R_s for every setting.
std::vector<std::vector<Matrix>> povm_elements(const std::vector<BasisSetting>& settings) {
  std::vector<std::vector<Matrix>> povm;
  povm.reserve(settings.size());
  for (const BasisSetting& setting : settings) {
    const Matrix r = setting_rotation(setting);
    const Eigen::Index d = r.rows();
    std::vector<Matrix> elems;
    elems.reserve(static_cast<size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
      const Vector row = r.row(k).adjoint();  // R† |k>
      elems.push_back(row * row.adjoint());
    }
    povm.push_back(std::move(elems));
  }
  return povm;
}

void check_informationally_complete(const std::vector<std::vector<Matrix>>& povm, int dim) {
  Eigen::Index rows = 0;
  for (const auto& elems : povm) rows += static_cast<Eigen::Index>(elems.size());
  Eigen::MatrixXd stacked(rows, 2 * dim * dim);
  Eigen::Index r = 0;
  for (const auto& elems : povm)
    for (const Matrix& e : elems) {
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
          stacked(r, 2 * (i * dim + j)) = e(i, j).real();
          stacked(r, 2 * (i * dim + j) + 1) = e(i, j).imag();
        }
      ++r;
    }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  require(qr.rank() >= static_cast<Eigen::Index>(dim) * dim,
          "measurement settings are not informationally complete");
}

std::vector<double> born_probabilities(const Matrix& rho, const BasisSetting& setting) {
  const Matrix r = setting_rotation(setting);
  const Vector diag = (r * rho * r.adjoint()).diagonal();
  std::vector<double> p(static_cast<size_t>(diag.size()));
  double total = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    p[static_cast<size_t>(k)] = std::max(0.0, diag(k).real());
    total += p[static_cast<size_t>(k)];
  }
  require(total > 0.0, "state has no support in the measured subspace");
  for (double& v : p) v /= total;
  return p;
}

double log_likelihood_of(const std::vector<std::vector<double>>& counts,
                         const std::vector<std::vector<double>>& probs) {
  double ll = 0.0;
  for (size_t s = 0; s < counts.size(); ++s)
    for (size_t k = 0; k < counts[s].size(); ++k)
      if (counts[s][k] > 0.0) ll += counts[s][k] * std::log(std::max(probs[s][k], kProbFloor));
  return ll;
}

}  // namespace

std::vector<BasisSetting> all_settings(int n_qubits) {
  require(n_qubits >= 1, "tomography needs at least one qubit");
  int total = 1;
  for (int q = 0; q < n_qubits; ++q) total *= 3;
  std::vector<BasisSetting> settings;
  settings.reserve(static_cast<size_t>(total));
  for (int code = 0; code < total; ++code) {
    BasisSetting setting(static_cast<size_t>(n_qubits));
    int rest = code;
    for (int q = n_qubits - 1; q >= 0; --q) {
      setting[static_cast<size_t>(q)] = static_cast<PauliBasis>(rest % 3);
      rest /= 3;
    }
    settings.push_back(std::move(setting));
  }
  return settings;
}

Matrix basis_rotation(PauliBasis basis) {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix r(2, 2);
  switch (basis) {
    case PauliBasis::x:
      r << s, s, -s, s;
      break;
    case PauliBasis::y:
      r << s, -s * iu, -s * iu, s;
      break;
    case PauliBasis::z:
      r = Matrix::Identity(2, 2);
      break;
  }
  return r;
}

Matrix setting_rotation(const BasisSetting& setting) {
  require(!setting.empty(), "empty basis setting");
  Matrix r = basis_rotation(setting.front());
  for (size_t q = 1; q < setting.size(); ++q) r = kron(r, basis_rotation(setting[q]));
  return r;
}

char basis_label(PauliBasis basis) {
  switch (basis) {
    case PauliBasis::x: return 'X';
    case PauliBasis::y: return 'Y';
    case PauliBasis::z: return 'Z';
  }
  return '?';
}

std::string setting_label(const BasisSetting& setting) {
  std::string label;
  for (PauliBasis b : setting) label.push_back(basis_label(b));
  return label;
}

BasisSetting setting_from_label(const std::string& label) {
  BasisSetting setting;
  for (char c : label) {
    switch (c) {
      case 'X': setting.push_back(PauliBasis::x); break;
      case 'Y': setting.push_back(PauliBasis::y); break;
      case 'Z': setting.push_back(PauliBasis::z); break;
      default: Error::invalid(std::string("unknown basis label '") + c + "'");
    }
  }
  require(!setting.empty(), "empty basis label");
  return setting;
}

void TomographyDataset::validate() const {
  require(n_qubits >= 1, "dataset needs at least one qubit");
  require(!settings.empty() && settings.size() == counts.size(),
          "dataset needs one count row per setting");
  const size_t d = static_cast<size_t>(dim_of(n_qubits));
  for (size_t s = 0; s < settings.size(); ++s) {
    require(settings[s].size() == static_cast<size_t>(n_qubits),
            "setting arity mismatches the qubit count");
    require(counts[s].size() == d, "count row length mismatches the outcome space");
    double total = 0.0;
    for (double c : counts[s]) {
      require(c >= 0.0, "counts must be non-negative");
      total += c;
    }
    const double expected = shots > 0.0 ? shots : 1.0;
    require(std::abs(total - expected) <= 1e-6 * expected,
            "counts per setting must sum to the shot count");
    for (size_t t = 0; t < s; ++t)
      require(settings[t] != settings[s], "duplicate measurement setting");
  }
}

QubitProjection project_to_qubits(const QuantumState& state, const std::vector<int>& modes) {
  const QuantumState reduced =
      modes.size() == state.scheme.dims.size()
          ? QuantumState::from_density(state.scheme, state.to_density())
          : partial_trace(state, modes);
  const LevelScheme& scheme = reduced.scheme;
  const int m = static_cast<int>(modes.size());
  std::vector<Eigen::Index> comp;
  comp.reserve(static_cast<size_t>(dim_of(m)));
  for (Eigen::Index idx = 0; idx < scheme.dim(); ++idx) {
    bool ok = true;
    Eigen::Index rest = idx;
    for (int q = m - 1; q >= 0; --q) {
      if (rest % scheme.dims[static_cast<size_t>(q)] > 1) ok = false;
      rest /= scheme.dims[static_cast<size_t>(q)];
    }
    if (ok) comp.push_back(idx);
  }
  // Computational indices ordered with mode 0 slowest, matching the
  // bitstring convention (qubit 0 = most significant bit).
  QubitProjection out;
  out.rho.resize(static_cast<Eigen::Index>(comp.size()), static_cast<Eigen::Index>(comp.size()));
  for (size_t i = 0; i < comp.size(); ++i)
    for (size_t j = 0; j < comp.size(); ++j)
      out.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          reduced.density(comp[i], comp[j]);
  const double kept = out.rho.trace().real();
  require(kept > 1e-12, "state has no weight in the computational subspace");
  out.leakage = std::max(0.0, 1.0 - kept);
  out.rho /= kept;
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  return out;
}

TomographyDataset simulate_measurements(const Matrix& rho,
                                        const std::vector<BasisSetting>& settings,
                                        int shots, std::uint64_t seed) {
  const int n = checked_n_qubits(rho);
  check_density(rho, "measured state");
  require(shots >= 1, "need at least one shot per setting");
  require(!settings.empty(), "need at least one setting");

  TomographyDataset data;
  data.n_qubits = n;
  data.settings = settings;
  data.shots = shots;
  data.counts.resize(settings.size());
  const size_t d = static_cast<size_t>(dim_of(n));
  for (size_t s = 0; s < settings.size(); ++s) {
    require(settings[s].size() == static_cast<size_t>(n),
            "setting arity mismatches the state");
    const std::vector<double> p = born_probabilities(rho, settings[s]);
    std::vector<double> cdf(d);
    double acc = 0.0;
    for (size_t k = 0; k < d; ++k) {
      acc += p[k];
      cdf[k] = acc;
    }
    cdf.back() = 1.0;
    Rng stream = Rng(seed).spawn(static_cast<std::uint64_t>(s) + 1);
    std::vector<double>& row = data.counts[s];
    row.assign(d, 0.0);
    for (int shot = 0; shot < shots; ++shot) {
      const double u = stream.uniform();
      const size_t k = static_cast<size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      row[std::min(k, d - 1)] += 1.0;
    }
  }
  data.validate();
  return data;
}

TomographyDataset simulate_measurements(const QuantumState& state,
                                        const std::vector<int>& modes,
                                        const std::vector<BasisSetting>& settings,
                                        int shots, std::uint64_t seed) {
  const QubitProjection proj = project_to_qubits(state, modes);
  TomographyDataset data = simulate_measurements(proj.rho, settings, shots, seed);
  data.leakage = proj.leakage;
  data.leakage_warning = proj.leakage > kLeakageWarningLevel;
  return data;
}

TomographyDataset exact_dataset(const Matrix& rho, const std::vector<BasisSetting>& settings) {
  const int n = checked_n_qubits(rho);
  check_density(rho, "measured state");
  TomographyDataset data;
  data.n_qubits = n;
  data.settings = settings;
  data.shots = 0.0;
  data.counts.reserve(settings.size());
  for (const BasisSetting& setting : settings)
    data.counts.push_back(born_probabilities(rho, setting));
  data.validate();
  return data;
}

ReconstructionResult mle_reconstruct(const TomographyDataset& data, int max_iter, double tol) {
  data.validate();
  require(max_iter >= 1 && tol > 0.0, "invalid reconstruction controls");
  const int d = dim_of(data.n_qubits);
  const std::vector<std::vector<Matrix>> povm = povm_elements(data.settings);
  check_informationally_complete(povm, d);

  double total_counts = 0.0;
  for (const auto& row : data.counts)
    for (double c : row) total_counts += c;

  auto probs_of = [&](const Matrix& rho) {
    std::vector<std::vector<double>> probs(povm.size());
    for (size_t s = 0; s < povm.size(); ++s) {
      probs[s].resize(povm[s].size());
      for (size_t k = 0; k < povm[s].size(); ++k)
        probs[s][k] = std::max(kProbFloor, (povm[s][k] * rho).trace().real());
    }
    return probs;
  };
  // R(rho) = (1/N) sum c_{s,k}/p_{s,k} E_{s,k}; the MLE is its fixed point.
  auto r_operator = [&](const std::vector<std::vector<double>>& probs) {
    Matrix r = Matrix::Zero(d, d);
    for (size_t s = 0; s < povm.size(); ++s)
      for (size_t k = 0; k < povm[s].size(); ++k)
        if (data.counts[s][k] > 0.0) r += (data.counts[s][k] / probs[s][k]) * povm[s][k];
    return Matrix(r / total_counts);
  };
  auto normalize = [&](Matrix rho) {
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return Matrix(rho / rho.trace().real());
  };

  ReconstructionResult result;
  Matrix rho = Matrix::Identity(d, d) / static_cast<double>(d);
  std::vector<std::vector<double>> probs = probs_of(rho);
  double ll = log_likelihood_of(data.counts, probs);

  for (int iter = 1; iter <= max_iter; ++iter) {
    result.iterations = iter;
    const Matrix r = r_operator(probs);
    // Full R·rho·R step first; on a likelihood decrease retreat to diluted
    // steps (I + eps R)/(1 + eps), halving eps until the step improves.
    double gain = -1.0;
    Matrix best = rho;
    std::vector<std::vector<double>> best_probs = probs;
    double best_ll = ll;
    {
      const Matrix cand = normalize(r * rho * r);
      const auto cand_probs = probs_of(cand);
      const double cand_ll = log_likelihood_of(data.counts, cand_probs);
      if (cand_ll >= ll) {
        gain = cand_ll - ll;
        best = cand;
        best_probs = cand_probs;
        best_ll = cand_ll;
      }
    }
    if (gain < 0.0) {
      for (double eps = 1.0; eps >= 1e-10; eps *= 0.5) {
        const Matrix m = (Matrix::Identity(d, d) + eps * r) / (1.0 + eps);
        const Matrix cand = normalize(m * rho * m);
        const auto cand_probs = probs_of(cand);
        const double cand_ll = log_likelihood_of(data.counts, cand_probs);
        if (cand_ll >= ll) {
          gain = cand_ll - ll;
          best = cand;
          best_probs = cand_probs;
          best_ll = cand_ll;
          break;
        }
      }
    }
    if (gain < 0.0) {
      // No ascent direction left at this scale: stationary point.
      result.converged = true;
      break;
    }
    rho = best;
    probs = std::move(best_probs);
    ll = best_ll;
    if (gain < tol) {
      result.converged = true;
      break;
    }
  }

  result.rho = normalize(rho);
  result.log_likelihood = ll;
  return result;
}

double state_fidelity(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(),
          "fidelity needs equal-dimension states");
  check_density(rho, "fidelity input");
  check_density(sigma, "fidelity input");
  const Matrix root = psd_sqrt(rho);
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      Matrix(0.5 * (root * sigma * root + (root * sigma * root).adjoint())));
  double f = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    f += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return std::min(1.0, f);
}

double state_fidelity_squared(const Matrix& rho, const Matrix& sigma) {
  const double f = state_fidelity(rho, sigma);
  return f * f;
}

Matrix apply_virtual_z(const Matrix& rho, const std::vector<double>& angles) {
  const int n = checked_n_qubits(rho);
  require(angles.size() == static_cast<size_t>(n), "one Z angle per qubit required");
  const Eigen::Index d = rho.rows();
  Vector phase(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double total = 0.0;
    for (int q = 0; q < n; ++q)
      if ((k >> (n - 1 - q)) & 1) total += angles[static_cast<size_t>(q)];
    phase(k) = std::exp(iu * total);
  }
  return phase.asDiagonal() * rho * phase.conjugate().asDiagonal();
}

VirtualZResult virtual_z_correction(const Matrix& rho, const Matrix& target) {
  const int n = checked_n_qubits(rho);
  require(rho.rows() == target.rows() && rho.cols() == target.cols(),
          "state and target dimensions differ");

  auto angles_of = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    return -state_fidelity(apply_virtual_z(rho, angles_of(v)), target);
  };

  Eigen::VectorXd angles = Eigen::VectorXd::Zero(n);
  for (int round = 0; round < 2; ++round)
    for (int q = 0; q < n; ++q) {
      auto line = [&](double a) {
        Eigen::VectorXd probe = angles;
        probe(q) = a;
        return objective(probe);
      };
      angles(q) = golden_section_min(line, -pi, pi, 1e-10);
    }
  SimplexOptions opts;
  opts.initial_step = 0.05;
  const SimplexResult polish = nelder_mead(objective, angles, opts);
  if (polish.value < objective(angles)) angles = polish.x;

  // Reject the search result when it does not beat the unrotated state
  // (already aligned, or diagonal rho making the objective flat).
  const double f_zero = -objective(Eigen::VectorXd::Zero(n));
  const double f_best = -objective(angles);
  VirtualZResult result;
  if (f_best <= f_zero + 1e-12) {
    result.angles.assign(static_cast<size_t>(n), 0.0);
    result.fidelity = f_zero;
    result.rho = rho;
  } else {
    result.angles = angles_of(angles);
    result.fidelity = f_best;
    result.rho = apply_virtual_z(rho, result.angles);
  }
  return result;
}

std::string dataset_to_json(const TomographyDataset& data) {
  data.validate();
  nlohmann::json j;
  j["n_qubits"] = data.n_qubits;
  j["shots"] = data.shots;
  j["leakage"] = data.leakage;
  j["leakage_warning"] = data.leakage_warning;
  j["settings"] = nlohmann::json::array();
  for (const BasisSetting& s : data.settings) j["settings"].push_back(setting_label(s));
  j["counts"] = data.counts;
  return j.dump(2);
}

TomographyDataset dataset_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Error::invalid(std::string("dataset JSON parse failure: ") + e.what());
  }
  TomographyDataset data;
  try {
    data.n_qubits = j.at("n_qubits").get<int>();
    data.shots = j.at("shots").get<double>();
    data.leakage = j.value("leakage", 0.0);
    data.leakage_warning = j.value("leakage_warning", false);
    for (const auto& label : j.at("settings"))
      data.settings.push_back(setting_from_label(label.get<std::string>()));
    data.counts = j.at("counts").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    Error::invalid(std::string("dataset JSON field failure: ") + e.what());
  }
  data.validate();
  return data;
}

}  // namespace paragate
