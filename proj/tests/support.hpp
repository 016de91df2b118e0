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

#ifndef COVAUDIT_TESTS_SUPPORT_HPP_
#define COVAUDIT_TESTS_SUPPORT_HPP_

#include <Eigen/Dense>

#include "covaudit/rng.hpp"
#include "covaudit/sym.hpp"

namespace covaudit::testing {

inline SymMatrix random_symmetric(Eigen::Index d, RngStream& rng) {
  const Eigen::MatrixXd a = rng.gaussian_matrix(d, d);
  return SymMatrix(((a + a.transpose()) / 2).eval());
}

// Gram matrix plus a ridge; eigenvalues in roughly [ridge, ridge + O(d)].
inline SymMatrix random_spd(Eigen::Index d, RngStream& rng, double ridge = 0.5) {
  const Eigen::MatrixXd a = rng.gaussian_matrix(d, d);
  return SymMatrix(
      (a * a.transpose() / static_cast<double>(d) +
       ridge * Eigen::MatrixXd::Identity(d, d))
          .eval());
}

// Central finite differences of a scalar function of Sigma over the
// lower-triangular coordinates (the vech gradient).
template <typename F>
Eigen::VectorXd fd_vech_gradient(F&& f, const SymMatrix& sigma, double h) {
  const Eigen::Index d = sigma.dim();
  Eigen::VectorXd grad(half_dim(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Eigen::MatrixXd up = sigma.mat(), dn = sigma.mat();
      up(i, j) += h;
      dn(i, j) -= h;
      if (i != j) {
        up(j, i) += h;
        dn(j, i) -= h;
      }
      grad[pair_index(i, j)] = (f(SymMatrix(up)) - f(SymMatrix(dn))) / (2 * h);
    }
  }
  return grad;
}

}  // namespace covaudit::testing

#endif  // COVAUDIT_TESTS_SUPPORT_HPP_
