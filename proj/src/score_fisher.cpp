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

#include "covaudit/score_fisher.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace covaudit {

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_llt(const SymMatrix& sigma,
                                        const char* where) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(where) +
                             ": Sigma must be positive definite");
  // diag(L) squared brackets the spectrum well enough for a rough
  // conditioning estimate.
  const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  if (ratio * ratio > 1e12)
    std::fprintf(stderr,
                 "covaudit: warning: %s: condition number estimate %.3g > 1e12\n",
                 where, ratio * ratio);
  return llt;
}

}  // namespace

Eigen::MatrixXd spd_inverse(const SymMatrix& sigma) {
  return checked_llt(sigma, "spd_inverse")
      .solve(Eigen::MatrixXd::Identity(sigma.dim(), sigma.dim()));
}

double gaussian_log_density(const Eigen::VectorXd& x, const SymMatrix& sigma) {
  if (x.size() != sigma.dim())
    throw std::invalid_argument("gaussian_log_density: dimension mismatch");
  auto llt = checked_llt(sigma, "gaussian_log_density");
  const double log_det =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double quad = x.dot(llt.solve(x));
  return -0.5 * quad - 0.5 * log_det -
         0.5 * static_cast<double>(x.size()) * std::log(2.0 * M_PI);
}

SymMatrix score_matrix(const Eigen::VectorXd& x, const SymMatrix& sigma) {
  if (x.size() != sigma.dim())
    throw std::invalid_argument("score_matrix: dimension mismatch");
  auto llt = checked_llt(sigma, "score_matrix");
  const Eigen::VectorXd u = llt.solve(x);  // Sigma^{-1} x
  const Eigen::MatrixXd sigma_inv =
      llt.solve(Eigen::MatrixXd::Identity(sigma.dim(), sigma.dim()));
  return SymMatrix((0.5 * (u * u.transpose() - sigma_inv)).eval(), 1e-9);
}

Eigen::MatrixXd fisher_information(const SymMatrix& sigma) {
  const Eigen::Index d = sigma.dim();
  if (d > 32)
    throw std::invalid_argument(
        "fisher_information: explicit Kronecker assembly is capped at d <= 32");
  const Eigen::MatrixXd psi = spd_inverse(sigma);
  Eigen::MatrixXd kron(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      kron.block(i * d, j * d, d, d) = psi(i, j) * psi;
  const Eigen::MatrixXd dup = duplication_matrix<double>(d);
  Eigen::MatrixXd fisher = 0.5 * dup.transpose() * kron * dup;
  return 0.5 * (fisher + fisher.transpose());
}

FisherLambdaMaxBound fisher_lambda_max_bound(const SymMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_fisher(
      fisher_information(sigma), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_sigma(sigma.mat(),
                                                          Eigen::EigenvaluesOnly);
  const double lmin = es_sigma.eigenvalues().minCoeff();
  if (!(lmin > 0))
    throw std::runtime_error("fisher_lambda_max_bound: Sigma must be positive definite");
  FisherLambdaMaxBound out{es_fisher.eigenvalues().maxCoeff(), 1.0 / (lmin * lmin)};
  if (out.lmax > out.bound + 1e-10)
    throw std::logic_error("fisher_lambda_max_bound: eigenvalue bound violated");
  return out;
}

Eigen::MatrixXd fourth_moment_rhs(const Eigen::MatrixXd& b, const SymMatrix& sigma) {
  if (b.rows() != sigma.dim() || b.cols() != sigma.dim())
    throw std::invalid_argument("fourth_moment_rhs: dimension mismatch");
  const Eigen::MatrixXd& s = sigma.mat();
  return s * (b + b.transpose()) * s + s * (b * s).trace();
}

}  // namespace covaudit
