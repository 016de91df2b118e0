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

// Gaussian score with respect to the covariance parameter, Fisher
// information over the vech coordinates, and the Isserlis fourth-moment
// identity.

#ifndef COVAUDIT_SCORE_FISHER_HPP_
#define COVAUDIT_SCORE_FISHER_HPP_

#include <Eigen/Dense>

#include "covaudit/sym.hpp"

namespace covaudit {

// Sigma^{-1} via Cholesky solve. Warns on stderr (once per call site regime)
// when the estimated condition number exceeds 1e12.
Eigen::MatrixXd spd_inverse(const SymMatrix& sigma);

// log N(0, Sigma) density at x.
double gaussian_log_density(const Eigen::VectorXd& x, const SymMatrix& sigma);

// Symmetric gradient of Sigma -> log p(x | Sigma):
// (Sigma^{-1} x x^T Sigma^{-1} - Sigma^{-1}) / 2.
// The vech score is halfvec_grad_from_sym_grad of this matrix.
SymMatrix score_matrix(const Eigen::VectorXd& x, const SymMatrix& sigma);

// Fisher information of N(0, .) in the vech coordinates:
// D^T (Sigma^{-1} (x) Sigma^{-1}) D / 2, a d(d+1)/2 square symmetric PSD
// matrix. Assembled via an explicit Kronecker product; capped at d <= 32.
Eigen::MatrixXd fisher_information(const SymMatrix& sigma);

// lambda_max of the Fisher matrix together with its bound
// lambda_min(Sigma)^{-2}; throws if the bound is violated beyond 1e-10.
struct FisherLambdaMaxBound {
  double lmax;
  double bound;
};

FisherLambdaMaxBound fisher_lambda_max_bound(const SymMatrix& sigma);

// E[x x^T B x x^T] for x ~ N(0, Sigma):
// Sigma (B + B^T) Sigma + Sigma tr(B Sigma).
Eigen::MatrixXd fourth_moment_rhs(const Eigen::MatrixXd& b, const SymMatrix& sigma);

}  // namespace covaudit

#endif  // COVAUDIT_SCORE_FISHER_HPP_
