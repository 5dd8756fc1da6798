// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "paragate/common.hpp"

namespace paragate {

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<double(const Eigen::VectorXd&)>;

// Golden-section minimization of f on [a, b] to absolute x tolerance.
double golden_section_min(const ScalarFn& f, double a, double b, double x_tol = 1e-10);

struct SimplexOptions {
  double initial_step = 0.1;
  double f_tol = 1e-12;   // stop when the simplex f-spread falls below this
  int max_iters = 2000;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iters = 0;
};

// Nelder-Mead downhill simplex (standard reflection/expansion/contraction
// coefficients 1, 2, 0.5, 0.5).
SimplexResult nelder_mead(const VectorFn& f, const Eigen::VectorXd& x0,
                          const SimplexOptions& opts = {});

struct CmaEsOptions {
  double sigma0 = 0.3;
  int lambda = 0;          // 0 = 4 + floor(3 ln n)
  long max_evals = 20000;
  double f_target = -1e300;  // stop when best f <= this
  double x_tol = 1e-14;      // stop when sigma * max eigenvalue falls below
  std::uint64_t seed = 1;
};

struct CmaEsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  long evals = 0;
  bool reached_target = false;
  std::vector<double> history;  // best value seen, one entry per generation
};

// Covariance-matrix-adaptation evolution strategy, standard (mu/mu_w, lambda)
// form with rank-one and rank-mu updates and cumulative step-size control.
CmaEsResult cma_es(const VectorFn& f, const Eigen::VectorXd& x0,
                   const CmaEsOptions& opts = {});

}  // namespace paragate
