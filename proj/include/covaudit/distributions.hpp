// Copyright 2026 The covaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sampling and closed-form moments/densities/tail bounds for Gaussian
// vectors, Wishart, normalized Wishart, and inverse Wishart. Every sampler
// is a pure function of (params, RngStream).

#ifndef COVAUDIT_DISTRIBUTIONS_HPP_
#define COVAUDIT_DISTRIBUTIONS_HPP_

#include <Eigen/Dense>

#include "covaudit/rng.hpp"
#include "covaudit/sym.hpp"

namespace covaudit {

// Wishart W_d(D; V): G G^T with D i.i.d. N(0, V) columns.
struct WishartParams {
  Eigen::Index dim;
  int dof;
  SymMatrix scale;

  WishartParams(Eigen::Index d, int dof_, SymMatrix v)
      : dim(d), dof(dof_), scale(std::move(v)) {
    validate();
  }

  void validate() const;

  // The closed-form inverse-Wishart variance formulas need dof > dim + 3.
  bool moments_valid() const { return dof > dim + 3; }
};

// Sigma = (1/D) G G^T with standard Gaussian G; D = 2d unless overridden.
struct NormalizedWishartPrior {
  Eigen::Index dim;
  int dof;

  explicit NormalizedWishartPrior(Eigen::Index d) : dim(d), dof(2 * static_cast<int>(d)) {}
  NormalizedWishartPrior(Eigen::Index d, int dof_) : dim(d), dof(dof_) {}

  WishartParams as_wishart() const {
    return WishartParams(dim, dof,
                         SymMatrix(Eigen::MatrixXd::Identity(dim, dim) / dof));
  }
};

// n sample columns, each one observation in R^d.
struct Dataset {
  Eigen::MatrixXd columns;

  Eigen::Index dim() const { return columns.rows(); }
  Eigen::Index count() const { return columns.cols(); }
};

// Lower Cholesky factor; throws on non-positive-definite input.
Eigen::MatrixXd cholesky_factor(const SymMatrix& sigma);

// i.i.d. N(0, Sigma) columns via the Cholesky factor times standard normals.
Dataset sample_gaussian_dataset(const SymMatrix& sigma, Eigen::Index n,
                                RngStream& rng);

enum class WishartSampling {
  kExplicitG,  // draw G column by column; O(d^2 D)
  kBartlett,   // triangular factor with chi-squared diagonal; O(d^2 (d + 1))
};

SymMatrix sample_wishart(const WishartParams& params, RngStream& rng,
                         WishartSampling method = WishartSampling::kExplicitG);

SymMatrix sample_normalized_wishart(const NormalizedWishartPrior& prior,
                                    RngStream& rng);

// log Gamma_d(a) = d(d-1)/4 log(pi) + sum_j log Gamma(a + (1-j)/2).
double log_multivariate_gamma(Eigen::Index d, double a);

// Log density of W_d(D; V) at Sigma, normalizing constant included, computed
// in log space. Requires Sigma positive definite and D > d - 1.
double wishart_log_density(const SymMatrix& sigma, const WishartParams& params);

// Symmetric gradient of the Wishart log density:
// ((D - d - 1) Sigma^{-1} - V^{-1}) / 2.
SymMatrix wishart_log_density_sym_gradient(const SymMatrix& sigma,
                                           const WishartParams& params);

// Closed-form mean and entrywise variances of Sigma^{-1} for
// Sigma ~ W_d(D; V), valid for D > d + 3:
//   E[Sigma^{-1}]      = V^{-1} / (D-d-1)
//   Var[Sigma^{-1}_ii] = 2 (V^{-1}_ii)^2 / ((D-d-1)^2 (D-d-3))
//   Var[Sigma^{-1}_ij] = ((D-d+1)(V^{-1}_ij)^2 + (D-d-1) V^{-1}_ii V^{-1}_jj)
//                        / ((D-d-1)^2 (D-d-3) (D-d))
struct InvWishartMoments {
  SymMatrix mean;
  Eigen::MatrixXd variance;  // variance(i,j) = Var[Sigma^{-1}_ij]
};

InvWishartMoments inv_wishart_moments(const WishartParams& params);

// Chi-squared tail: P[Z >= sqrt(8 k^2 + 18 x^2)] <= e^{-x} for Z ~ chi2(k),
// together with the Laurent-Massart point k + 2 sqrt(kx) + 2x, which the
// threshold always dominates.
struct Chi2TailBound {
  double threshold;
  double bound;
  double laurent_massart;
};

Chi2TailBound chi2_tail_threshold(int dof, double x);

// Tail-bound values for the normalized Wishart prior at (d, t):
//   pmax_bound:          P[lambda_max >= t] <= exp(-d min(delta(t)^2, 2)),
//                        delta(t) = sqrt(t) - 1 - 1/sqrt(2); needs delta > 0
//   pmin_bound:          P[1/lambda_min >= t] <= (2e)^{d+1}/(sqrt(2 pi d) t^{d+1})
//   cond_bound:          P[kappa > t] <= 13^{d+1}/(sqrt(2 pi) t^{(d+1)/2})
//   inv_lmin_mean_bound: E[1/lambda_min] <= 6.5
// Validity flags mark parameter-regime violations (pmin needs d >= 10,
// pmax needs t above (1 + 1/sqrt 2)^2) instead of silently computing.
struct WishartEigenTailBounds {
  double pmax_bound;
  double pmin_bound;
  double cond_bound;
  double inv_lmin_mean_bound;
  bool pmax_valid;
  bool pmin_valid;
  bool cond_valid;
};

WishartEigenTailBounds wishart_eigen_tail_bounds(int d, double t);

}  // namespace covaudit

#endif  // COVAUDIT_DISTRIBUTIONS_HPP_
