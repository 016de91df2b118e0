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

#include <doctest.h>

#include <cmath>

#include "covaudit/sym.hpp"
#include "support.hpp"

using namespace covaudit;
using covaudit::testing::random_spd;
using covaudit::testing::random_symmetric;

TEST_CASE("SymMatrix symmetrizes and stores exactly") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0 + 1e-10, 2.0, 3.0;
  const SymMatrix s(a);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s.dim() == 2);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 5.0, -5.0, 1.0;
  CHECK_THROWS_AS(SymMatrix{bad}, std::invalid_argument);

  CHECK_THROWS_AS(SymMatrix{Eigen::MatrixXd::Zero(2, 3)}, std::invalid_argument);
}

TEST_CASE("vech ordering and round trip") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 3;
  const HalfVec v = vech(SymMatrix(a));
  CHECK(v.values()[0] == 1.0);
  CHECK(v.values()[1] == 2.0);
  CHECK(v.values()[2] == 3.0);

  CHECK(vech(SymMatrix(Eigen::MatrixXd::Constant(1, 1, 5.0))).values()[0] == 5.0);

  // Row-major lower-triangular order: {1,1},{2,1},{2,2},{3,1},{3,2},{3,3}.
  const Eigen::VectorXd id3 = vech(SymMatrix::Identity(3)).values();
  Eigen::VectorXd expected(6);
  expected << 1, 0, 1, 0, 0, 1;
  CHECK(id3 == expected);

  RngStream rng(11, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const SymMatrix s = random_symmetric(4, rng);
    CHECK((unvech(vech(s)).mat() - s.mat()).cwiseAbs().maxCoeff() == 0.0);
  }
  // unvech . vech is the identity on HalfVec as well.
  const HalfVec h(3, Eigen::VectorXd::LinSpaced(6, 1.0, 6.0));
  CHECK((vech(unvech(h)).values() - h.values()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(HalfVec(3, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("duplication matrix definition at d=2") {
  const Eigen::MatrixXd dup = duplication_matrix<double>(2);
  REQUIRE(dup.rows() == 4);
  REQUIRE(dup.cols() == 3);
  // Column-major vec rows: (1,1),(2,1),(1,2),(2,2) map to pairs
  // {1,1},{2,1},{2,1},{2,2}.
  Eigen::MatrixXd expected(4, 3);
  expected << 1, 0, 0,
              0, 1, 0,
              0, 1, 0,
              0, 0, 1;
  CHECK(dup == expected);

  const Eigen::MatrixXd dtd = dup.transpose() * dup;
  Eigen::MatrixXd diag(3, 3);
  diag << 1, 0, 0, 0, 2, 0, 0, 0, 1;
  CHECK(dtd == diag);

  CHECK(duplication_matrix<double>(1) == Eigen::MatrixXd::Constant(1, 1, 1.0));
  CHECK_THROWS_AS(duplication_matrix<double>(0), std::invalid_argument);
}

TEST_CASE("duplication matrix maps vech to vec") {
  RngStream rng(12, 0);
  for (Eigen::Index d = 1; d <= 6; ++d) {
    const Eigen::MatrixXd dup = duplication_matrix<double>(d);
    for (Eigen::Index r = 0; r < dup.rows(); ++r)
      CHECK(dup.row(r).sum() == 1.0);  // exactly one 1 per row
    for (int rep = 0; rep < 25; ++rep) {
      const SymMatrix s = random_symmetric(d, rng);
      const Eigen::VectorXd lhs = dup * vech(s).values();
      const Eigen::Map<const Eigen::VectorXd> rhs(s.mat().data(), d * d);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("sym_gradient symmetrizes") {
  CHECK((sym_gradient<double>(Eigen::MatrixXd::Identity(3, 3)).mat() -
         Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  Eigen::MatrixXd g(2, 2);
  g << 0, 1, 0, 0;
  const SymMatrix s = sym_gradient<double>(g);
  CHECK(s(0, 1) == 0.5);
  CHECK(s(1, 0) == 0.5);
  CHECK(s(0, 0) == 0.0);

  CHECK_THROWS_AS(sym_gradient<double>(Eigen::MatrixXd::Zero(2, 3)),
                  std::invalid_argument);
}

TEST_CASE("halfvec gradient scaling") {
  // Diagonal entries pass through, off-diagonal double.
  const HalfVec hv = halfvec_grad_from_sym_grad(SymMatrix::Identity(2));
  CHECK(hv.values()[0] == 1.0);
  CHECK(hv.values()[1] == 0.0);
  CHECK(hv.values()[2] == 1.0);

  const HalfVec zero = halfvec_grad_from_sym_grad(SymMatrix::Zero(3));
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd x(2, 2);
  x << 0, 1, 1, 0;
  const HalfVec off = halfvec_grad_from_sym_grad(SymMatrix(x));
  CHECK(off.values()[1] == 2.0);
}

TEST_CASE("pairing identity over random pairs") {
  RngStream rng(13, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::Index d = 2 + rep % 4;
    const SymMatrix s = sym_gradient<double>(rng.gaussian_matrix(d, d));
    const SymMatrix b = random_symmetric(d, rng);
    const double frobenius = b.mat().cwiseProduct(s.mat()).sum();
    const double paired =
        vech(b).values().dot(halfvec_grad_from_sym_grad(s).values());
    CHECK(std::abs(frobenius - paired) <= 1e-12 * std::max(1.0, std::abs(frobenius)));
  }
}

TEST_CASE("projection clamps eigenvalues") {
  {
    Eigen::VectorXd diag(2);
    diag << 0.01, 5.0;
    const SymMatrix p = project_well_conditioned(SymMatrix::FromDiagonal(diag));
    CHECK(p(0, 0) == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(5.0).epsilon(1e-12));
  }
  {
    Eigen::VectorXd diag(2);
    diag << 20.0, 1.0;
    const SymMatrix p = project_well_conditioned(SymMatrix::FromDiagonal(diag));
    CHECK(p(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    RngStream rng(14, 0);
    const SymMatrix a = random_spd(4, rng, 0.5);  // eigenvalues in [0.09, 10]
    const SymMatrix p = project_well_conditioned(a);
    CHECK((p.mat() - a.mat()).cwiseAbs().maxCoeff() < 1e-12);
  }
  Eigen::MatrixXd nan_mat = Eigen::MatrixXd::Zero(2, 2);
  nan_mat(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(project_well_conditioned(SymMatrix(nan_mat, 1e308)));
}

TEST_CASE("projection is idempotent and non-expansive") {
  RngStream rng(15, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::Index d = 2 + rep % 3;
    const SymMatrix a(random_symmetric(d, rng).mat() * 8.0);
    const SymMatrix b(random_symmetric(d, rng).mat() * 8.0);
    const SymMatrix pa = project_well_conditioned(a);
    const SymMatrix pb = project_well_conditioned(b);
    CHECK((project_well_conditioned(pa).mat() - pa.mat()).norm() < 1e-10);
    CHECK((pa.mat() - pb.mat()).norm() <= (a.mat() - b.mat()).norm() + 1e-10);
  }
}

TEST_CASE("well-conditioned set validation") {
  CHECK_THROWS_AS(WellConditionedSet({2.0, 1.0}).validate(), std::invalid_argument);
  WellConditionedSet w;
  CHECK(w.contains(SymMatrix::Identity(3)));
  Eigen::VectorXd diag(2);
  diag << 0.05, 1.0;
  CHECK_FALSE(w.contains(SymMatrix::FromDiagonal(diag)));
}

TEST_CASE("fd_divergence of the identity map") {
  for (Eigen::Index d = 1; d <= 8; ++d) {
    const double div = fd_divergence([](const SymMatrix& s) { return s; },
                                     SymMatrix::Identity(d), 1e-5);
    CHECK(std::abs(div - 0.5 * static_cast<double>(d * (d + 1))) < 1e-8);
  }
}

TEST_CASE("fd_divergence on constants and squares") {
  const SymMatrix fixed = SymMatrix::Identity(3);
  const double div_const = fd_divergence(
      [&fixed](const SymMatrix&) { return fixed; }, SymMatrix::Identity(3), 1e-5);
  CHECK(std::abs(div_const) < 1e-9);

  // Scalar case: g(t) = t^2 at t = 2 has derivative 4.
  const SymMatrix two(Eigen::MatrixXd::Constant(1, 1, 2.0));
  const double div_square = fd_divergence(
      [](const SymMatrix& s) { return SymMatrix((s.mat() * s.mat()).eval()); },
      two, 1e-5);
  CHECK(div_square == doctest::Approx(4.0).epsilon(1e-7));

  // General d: divergence of the matrix square is (d+1) tr(Sigma).
  RngStream rng(16, 0);
  const SymMatrix sigma = random_spd(3, rng, 1.0);
  const double div3 = fd_divergence(
      [](const SymMatrix& s) { return SymMatrix((s.mat() * s.mat()).eval()); },
      sigma, 1e-6);
  CHECK(div3 == doctest::Approx(4.0 * sigma.mat().trace()).epsilon(1e-6));
}

TEST_CASE("fd_divergence rejects matrices near the cone boundary") {
  Eigen::VectorXd diag(2);
  diag << 1e-6, 1.0;
  CHECK_THROWS_AS(fd_divergence([](const SymMatrix& s) { return s; },
                                SymMatrix::FromDiagonal(diag), 1e-5),
                  std::invalid_argument);
}
