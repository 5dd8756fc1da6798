// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace paragate {

double golden_section_min(const ScalarFn& f, double a, double b, double x_tol) {
  require(b > a, "golden section needs a proper interval");
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

SimplexResult nelder_mead(const VectorFn& f, const Eigen::VectorXd& x0,
                          const SimplexOptions& opts) {
  const int n = static_cast<int>(x0.size());
  require(n >= 1, "simplex needs at least one dimension");
  std::vector<Eigen::VectorXd> xs(static_cast<size_t>(n) + 1, x0);
  std::vector<double> fs(static_cast<size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) xs[static_cast<size_t>(i)](i - 1) += opts.initial_step;
  for (int i = 0; i <= n; ++i) fs[static_cast<size_t>(i)] = f(xs[static_cast<size_t>(i)]);

  std::vector<int> order(static_cast<size_t>(n) + 1);
  int iters = 0;
  for (; iters < opts.max_iters; ++iters) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[static_cast<size_t>(a)] < fs[static_cast<size_t>(b)]; });
    const int best = order[0], worst = order[static_cast<size_t>(n)],
              second_worst = order[static_cast<size_t>(n) - 1];
    if (fs[static_cast<size_t>(worst)] - fs[static_cast<size_t>(best)] <= opts.f_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[static_cast<size_t>(i)];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[static_cast<size_t>(worst)]);
    const double fr = f(reflected);
    if (fr < fs[static_cast<size_t>(best)]) {
      const Eigen::VectorXd expanded =
          centroid + 2.0 * (centroid - xs[static_cast<size_t>(worst)]);
      const double fe = f(expanded);
      if (fe < fr) {
        xs[static_cast<size_t>(worst)] = expanded;
        fs[static_cast<size_t>(worst)] = fe;
      } else {
        xs[static_cast<size_t>(worst)] = reflected;
        fs[static_cast<size_t>(worst)] = fr;
      }
    } else if (fr < fs[static_cast<size_t>(second_worst)]) {
      xs[static_cast<size_t>(worst)] = reflected;
      fs[static_cast<size_t>(worst)] = fr;
    } else {
      const bool outside = fr < fs[static_cast<size_t>(worst)];
      const Eigen::VectorXd contracted =
          outside ? centroid + 0.5 * (reflected - centroid)
                  : centroid + 0.5 * (xs[static_cast<size_t>(worst)] - centroid);
      const double fc = f(contracted);
      if (fc < std::min(fr, fs[static_cast<size_t>(worst)])) {
        xs[static_cast<size_t>(worst)] = contracted;
        fs[static_cast<size_t>(worst)] = fc;
      } else {
        // Shrink toward the best vertex.
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[static_cast<size_t>(i)] =
              xs[static_cast<size_t>(best)] +
              0.5 * (xs[static_cast<size_t>(i)] - xs[static_cast<size_t>(best)]);
          fs[static_cast<size_t>(i)] = f(xs[static_cast<size_t>(i)]);
        }
      }
    }
  }

  size_t best = 0;
  for (size_t i = 1; i < fs.size(); ++i)
    if (fs[i] < fs[best]) best = i;
  return SimplexResult{xs[best], fs[best], iters};
}

CmaEsResult cma_es(const VectorFn& f, const Eigen::VectorXd& x0, const CmaEsOptions& opts) {
  const int n = static_cast<int>(x0.size());
  require(n >= 1, "cma-es needs at least one dimension");
  const int lambda = opts.lambda > 0
                         ? opts.lambda
                         : 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  const int mu = lambda / 2;
  require(mu >= 1, "cma-es population too small");

  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i)
    weights(i) = std::log(mu + 0.5) - std::log(static_cast<double>(i) + 1.0);
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                              ((n + 2.0) * (n + 2.0) + mu_eff));
  const double chi_n =
      std::sqrt(static_cast<double>(n)) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  Eigen::VectorXd mean = x0;
  double sigma = opts.sigma0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(n);

  Rng rng(opts.seed);
  CmaEsResult result;
  result.x = x0;
  result.value = f(x0);
  result.evals = 1;

  std::vector<Eigen::VectorXd> zs(static_cast<size_t>(lambda)),
      ys(static_cast<size_t>(lambda)), xs(static_cast<size_t>(lambda));
  std::vector<double> fvals(static_cast<size_t>(lambda));
  std::vector<int> order(static_cast<size_t>(lambda));
  long generation = 0;

  while (result.evals < opts.max_evals) {
    ++generation;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    require(es.info() == Eigen::Success, "cma-es covariance eigendecomposition failed");
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(1e-30).cwiseSqrt();
    const Eigen::MatrixXd& b = es.eigenvectors();

    if (sigma * d.maxCoeff() < opts.x_tol) break;

    for (int k = 0; k < lambda; ++k) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) z(i) = rng.normal();
      zs[static_cast<size_t>(k)] = z;
      ys[static_cast<size_t>(k)] = b * d.asDiagonal() * z;
      xs[static_cast<size_t>(k)] = mean + sigma * ys[static_cast<size_t>(k)];
      fvals[static_cast<size_t>(k)] = f(xs[static_cast<size_t>(k)]);
      ++result.evals;
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int bb) {
      return fvals[static_cast<size_t>(a)] < fvals[static_cast<size_t>(bb)];
    });
    if (fvals[static_cast<size_t>(order[0])] < result.value) {
      result.value = fvals[static_cast<size_t>(order[0])];
      result.x = xs[static_cast<size_t>(order[0])];
    }
    result.history.push_back(result.value);
    if (result.value <= opts.f_target) {
      result.reached_target = true;
      break;
    }

    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) {
      y_w += weights(i) * ys[static_cast<size_t>(order[static_cast<size_t>(i)])];
      z_w += weights(i) * zs[static_cast<size_t>(order[static_cast<size_t>(i)])];
    }
    mean += sigma * y_w;

    p_sigma = (1.0 - c_sigma) * p_sigma +
              std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (b * z_w);
    const double expected_decay =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * static_cast<double>(generation)));
    const bool h_sigma =
        p_sigma.norm() / expected_decay < (1.4 + 2.0 / (n + 1.0)) * chi_n;
    p_c = (1.0 - c_c) * p_c +
          (h_sigma ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const Eigen::VectorXd& y = ys[static_cast<size_t>(order[static_cast<size_t>(i)])];
      rank_mu += weights(i) * y * y.transpose();
    }
    cov = (1.0 - c_1 - c_mu) * cov +
          c_1 * (p_c * p_c.transpose() + (h_sigma ? 0.0 : c_c * (2.0 - c_c)) * cov) +
          c_mu * rank_mu;
    sigma *= std::exp((c_sigma / d_sigma) * (p_sigma.norm() / chi_n - 1.0));
    require(std::isfinite(sigma) && sigma > 0.0, "cma-es step size diverged");
  }
  return result;
}

}  // namespace paragate
