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

// Symmetric-matrix calculus: half-vectorization, duplication matrix,
// symmetric gradients, eigenvalue clamping onto a well-conditioned set, and
// finite-difference divergence over the lower-triangular parametrization.
// All functions are pure; types are dense Eigen matrices templated on scalar.

#ifndef COVAUDIT_SYM_HPP_
#define COVAUDIT_SYM_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace covaudit {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Number of free coordinates of a symmetric d x d matrix.
constexpr Eigen::Index half_dim(Eigen::Index d) { return d * (d + 1) / 2; }

// Position of the unordered pair {i,j}, i >= j, in row-major lower-triangular
// order: {0,0},{1,0},{1,1},{2,0},...
constexpr Eigen::Index pair_index(Eigen::Index i, Eigen::Index j) {
  return i * (i + 1) / 2 + j;
}

// Dense symmetric matrix. Construction symmetrizes and stores the canonical
// representative; inputs with relative asymmetry above `asym_tol` are
// rejected rather than silently averaged.
template <typename Scalar>
class SymMatrixT {
 public:
  using Matrix = MatrixX<Scalar>;

  explicit SymMatrixT(const Matrix& a, Scalar asym_tol = Scalar(1e-8))
      : mat_(a.rows(), a.cols()) {
    if (a.rows() != a.cols() || a.rows() < 1)
      throw std::invalid_argument("SymMatrix: input must be square, d >= 1");
    const Scalar asym = (a - a.transpose()).norm();
    if (asym > asym_tol * std::max(a.norm(), Scalar(1e-300)))
      throw std::invalid_argument("SymMatrix: input is not symmetric (||A - A^T||_F = " +
                                  std::to_string(static_cast<double>(asym)) + ")");
    const Eigen::Index d = a.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
      mat_(i, i) = a(i, i);
      for (Eigen::Index j = 0; j < i; ++j) {
        const Scalar v = (a(i, j) + a(j, i)) / Scalar(2);
        mat_(i, j) = v;
        mat_(j, i) = v;
      }
    }
  }

  static SymMatrixT Identity(Eigen::Index d) {
    return SymMatrixT(Matrix::Identity(d, d));
  }
  static SymMatrixT Zero(Eigen::Index d) { return SymMatrixT(Matrix::Zero(d, d)); }
  static SymMatrixT FromDiagonal(const VectorX<Scalar>& diag) {
    return SymMatrixT(Matrix(diag.asDiagonal()));
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

 private:
  Matrix mat_;
};

using SymMatrix = SymMatrixT<double>;

// Length-d(d+1)/2 vector indexed by unordered pairs {i,j}, i >= j, in
// row-major lower-triangular order.
template <typename Scalar>
class HalfVecT {
 public:
  HalfVecT(Eigen::Index dim, const VectorX<Scalar>& values)
      : dim_(dim), values_(values) {
    if (values.size() != half_dim(dim))
      throw std::invalid_argument("HalfVec: length must be d(d+1)/2");
  }

  Eigen::Index dim() const { return dim_; }
  const VectorX<Scalar>& values() const { return values_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    return i >= j ? values_[pair_index(i, j)] : values_[pair_index(j, i)];
  }

 private:
  Eigen::Index dim_;
  VectorX<Scalar> values_;
};

using HalfVec = HalfVecT<double>;

// vech: stack the lower-triangular entries. Linear bijection with unvech.
template <typename Scalar>
HalfVecT<Scalar> vech(const SymMatrixT<Scalar>& a) {
  const Eigen::Index d = a.dim();
  VectorX<Scalar> v(half_dim(d));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) v[pair_index(i, j)] = a(i, j);
  return HalfVecT<Scalar>(d, v);
}

template <typename Scalar>
SymMatrixT<Scalar> unvech(const HalfVecT<Scalar>& h) {
  const Eigen::Index d = h.dim();
  MatrixX<Scalar> m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = h(i, j);
  return SymMatrixT<Scalar>(m, Scalar(0));
}

// Duplication matrix D with D * vech(A) == vec(A) (column-major vec) for
// every symmetric A. Each row holds exactly one 1.
template <typename Scalar = double>
MatrixX<Scalar> duplication_matrix(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("duplication_matrix: d must be >= 1");
  MatrixX<Scalar> dup = MatrixX<Scalar>::Zero(d * d, half_dim(d));
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index s = 0; s < d; ++s)
      dup(s * d + r, pair_index(std::max(r, s), std::min(r, s))) = Scalar(1);
  return dup;
}

// Symmetric (Frechet) gradient over the space of symmetric matrices:
// (grad F + grad F^T)/2 for the unconstrained matrix gradient of F.
template <typename Scalar>
SymMatrixT<Scalar> sym_gradient(const MatrixX<Scalar>& full_grad) {
  if (full_grad.rows() != full_grad.cols())
    throw std::invalid_argument("sym_gradient: gradient must be square");
  return SymMatrixT<Scalar>(
      ((full_grad + full_grad.transpose()) / Scalar(2)).eval(), Scalar(0));
}

// Map the symmetric gradient S of F to the gradient of f(vech(A)) = F(A)
// over the free lower-triangular coordinates: S_ii on the diagonal and
// 2*S_ij off the diagonal, so that <B, S>_F == <vech(B), result> for every
// symmetric B.
template <typename Scalar>
HalfVecT<Scalar> halfvec_grad_from_sym_grad(const SymMatrixT<Scalar>& s) {
  const Eigen::Index d = s.dim();
  VectorX<Scalar> v(half_dim(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    v[pair_index(i, i)] = s(i, i);
    for (Eigen::Index j = 0; j < i; ++j) v[pair_index(i, j)] = Scalar(2) * s(i, j);
  }
  return HalfVecT<Scalar>(d, v);
}

// Eigenvalue interval [lower, upper] defining the well-conditioned set.
struct WellConditionedSet {
  double lower = 0.09;
  double upper = 10.0;

  void validate() const {
    if (!(0.0 < lower && lower < upper))
      throw std::invalid_argument("WellConditionedSet: need 0 < lower < upper");
  }

  bool contains(const SymMatrix& a, double tol = 0.0) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat(),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= lower - tol &&
           es.eigenvalues().maxCoeff() <= upper + tol;
  }
};

// Frobenius-norm projection onto the well-conditioned set: clamp each
// eigenvalue into [lower, upper]. Idempotent and non-expansive.
template <typename Scalar>
SymMatrixT<Scalar> project_well_conditioned(const SymMatrixT<Scalar>& a,
                                            const WellConditionedSet& w = {}) {
  w.validate();
  if (!a.mat().allFinite())
    throw std::invalid_argument("project_well_conditioned: non-finite entries");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(a.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("project_well_conditioned: eigendecomposition failed");
  VectorX<Scalar> lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    lam[i] = std::min(std::max(lam[i], Scalar(w.lower)), Scalar(w.upper));
  MatrixX<Scalar> out =
      es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  // Rounding in the similarity transform can leave ~1 ulp of asymmetry.
  return SymMatrixT<Scalar>(out, Scalar(1e-12));
}

// Divergence sum_{i >= j} d g(Sigma)_ij / d Sigma_ij by central differences
// over the lower-triangular parametrization: an off-diagonal coordinate moves
// (i,j) and (j,i) together. Sigma must satisfy lambda_min > 2h so every
// perturbed matrix stays positive definite.
template <typename G>
double fd_divergence(G&& g, const SymMatrix& sigma, double h = 1e-5) {
  if (!(h > 0)) throw std::invalid_argument("fd_divergence: h must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.mat(),
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 2.0 * h)
    throw std::invalid_argument(
        "fd_divergence: lambda_min(Sigma) <= 2h, perturbations leave the PD cone");
  const Eigen::Index d = sigma.dim();
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Eigen::MatrixXd up = sigma.mat();
      Eigen::MatrixXd dn = sigma.mat();
      up(i, j) += h;
      dn(i, j) -= h;
      if (i != j) {
        up(j, i) += h;
        dn(j, i) -= h;
      }
      const SymMatrix gp = g(SymMatrix(up));
      const SymMatrix gm = g(SymMatrix(dn));
      total += (gp(i, j) - gm(i, j)) / (2.0 * h);
    }
  }
  return total;
}

}  // namespace covaudit

#endif  // COVAUDIT_SYM_HPP_
