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

// The score-attack correlation statistic, Monte Carlo estimators of its
// in-sample/out-of-sample expectations, the Stein-Haff identity checker, and
// the lower/upper-bound experiments.

#ifndef COVAUDIT_ATTACK_HPP_
#define COVAUDIT_ATTACK_HPP_

#include <cstdint>
#include <vector>

#include "covaudit/mc.hpp"
#include "covaudit/mechanisms.hpp"
#include "covaudit/sym.hpp"

namespace covaudit {

enum class Direction { kLe, kGe, kEqWithin };

enum class CheckStatus { kOk, kHypothesesNotMet, kNotApplicable };

// A Monte Carlo estimate compared against a bound with 3-standard-error
// slack in the bound's direction. `satisfied` is always derived.
struct BoundReport {
  McEstimate estimate;
  double bound_value = 0.0;
  Direction direction = Direction::kEqWithin;
  CheckStatus status = CheckStatus::kOk;
  bool satisfied = false;

  static BoundReport Make(McEstimate estimate, double bound_value,
                          Direction direction,
                          CheckStatus status = CheckStatus::kOk);
};

bool check_satisfied(double estimate, double std_error, double bound,
                     Direction direction);

// A(z, M) = <M - Sigma, (Sigma^{-1} z z^T Sigma^{-1} - Sigma^{-1}) / 2>_F,
// the Frobenius pairing of the mechanism's deviation with the symmetric-
// gradient score at z.
double correlation_statistic(const Eigen::VectorXd& z, const SymMatrix& m_out,
                             const SymMatrix& sigma);

// sum_i A(x_i, M(X)) per trial, Sigma drawn from the prior.
McEstimate estimate_in_sample_sum(const MechanismSpec& spec,
                                  const NormalizedWishartPrior& prior,
                                  Eigen::Index n, std::int64_t trials,
                                  std::uint64_t master_seed);

// Same, at fixed Sigma.
McEstimate estimate_in_sample_sum_fixed(const MechanismSpec& spec,
                                        const SymMatrix& sigma, Eigen::Index n,
                                        std::int64_t trials,
                                        std::uint64_t master_seed);

// Per-trial values of the fixed-Sigma statistic sum. Trial t uses stream
// (master_seed, t), so two calls with the same seed are draw-for-draw paired
// (common random numbers for epsilon sweeps).
std::vector<double> in_sample_sum_samples(const MechanismSpec& spec,
                                          const SymMatrix& sigma,
                                          Eigen::Index n, std::int64_t trials,
                                          std::uint64_t master_seed);

// Expectation over the prior of the fixed-Sigma upper bound's right-hand
// side: 2 n eps E[alpha_Sigma / lambda_min] + (10 E[1/lambda_min] + 1) d^1.5.
// alpha_Sigma is estimated per draw from `inner_trials` datasets; the
// square root's Jensen bias only lowers the bound, tightening the check.
McEstimate estimate_prior_upper_bound_rhs(const MechanismSpec& spec,
                                          const NormalizedWishartPrior& prior,
                                          Eigen::Index n, std::int64_t trials,
                                          std::int64_t inner_trials,
                                          std::uint64_t master_seed);

// A(z, M(X)) with z ~ N(0, Sigma) drawn independently of X; the expectation
// is exactly zero for every mechanism.
McEstimate estimate_out_of_sample(const MechanismSpec& spec,
                                  const NormalizedWishartPrior& prior,
                                  Eigen::Index n, std::int64_t trials,
                                  std::uint64_t master_seed);

// Compares the direct Monte Carlo of sum_i E[A(x_i, M(X)) | Sigma] with the
// finite-difference divergence of g(S) = E[M(X) | S] at Sigma, the latter
// estimated with common random numbers across finite-difference nodes and
// replicated to obtain a standard error. Reports the difference against 0.
struct DivergenceIdentityResult {
  BoundReport report;           // difference, eq-within 0
  McEstimate direct;            // statistic-sum estimate
  McEstimate divergence;        // finite-difference estimate
};

DivergenceIdentityResult divergence_identity_check(
    const MechanismSpec& spec, const SymMatrix& sigma, Eigen::Index n,
    std::int64_t inner_trials, double h, std::int64_t replicates,
    std::uint64_t master_seed);

// Test functions with analytic divergence for the Stein-Haff check:
//   Identity    g(S) = S        divergence d(d+1)/2
//   Constant    g(S) = c I      divergence 0
//   Square      g(S) = S^2      divergence (d+1) tr(S)
enum class SteinHaffFunction { kIdentity, kConstant, kSquare };

// Paired per-draw difference between the analytic divergence of g and
// <V^{-1} - (D-d-1) Sigma^{-1}, g(Sigma)> / 2 over Wishart draws;
// agreement means |mean difference| <= 3 se.
BoundReport stein_haff_check(SteinHaffFunction g_kind, double constant_scale,
                             const WishartParams& params, std::int64_t trials,
                             std::uint64_t master_seed);

// Checks sum_i E[A] >= d(d+1)/2 - 2 d^1.5 sqrt(E[alpha_Sigma^2]) for the
// normalized Wishart prior with D = 2d (needs d >= 5; Oracle is excluded
// because its output is not a function of X alone).
struct HaffAccuracyResult {
  BoundReport report;  // statistic sum, ge the accuracy bound
  double rhs_bound = 0.0;
  McEstimate alpha_sq_all;
};

HaffAccuracyResult haff_accuracy_bound_check(const MechanismSpec& spec,
                                             const NormalizedWishartPrior& prior,
                                             Eigen::Index n, std::int64_t trials,
                                             std::uint64_t master_seed);

// Searches n (bisection on the measured alpha, which is decreasing in n)
// until alpha is close to `target_alpha`.
Eigen::Index find_n_for_alpha(const MechanismSpec& spec, Eigen::Index d,
                              double target_alpha, std::int64_t probe_trials,
                              std::uint64_t master_seed,
                              Eigen::Index n_lo = 16,
                              Eigen::Index n_hi = 1 << 20);

// Hypotheses: d >= 20, measured alpha <= sqrt(d)/15, projected output.
// When they hold, asserts the in-sample statistic sum >= d^2/4 - 3 se.
// n == 0 selects n by bisection targeting alpha = 0.9 sqrt(d)/15.
struct LowerBoundResult {
  BoundReport report;
  ErrorReport error;
  Eigen::Index n_used = 0;
  double alpha_hypothesis = 0.0;  // sqrt(d)/15
};

LowerBoundResult lower_bound_experiment(const MechanismSpec& spec,
                                        Eigen::Index d, Eigen::Index n,
                                        std::int64_t trials,
                                        std::uint64_t master_seed);

// Fixed-Sigma upper bound for a projected GaussianDP mechanism with
// delta <= 1/(3 n ln(e n)):
//   sum_i E[A | Sigma] <= 2 n eps alpha_Sigma / lambda_min
//                         + (10 / lambda_min + 1) d^1.5.
// The combined standard error folds the alpha_Sigma uncertainty into the
// right-hand side.
struct UpperBoundResult {
  BoundReport report;
  double alpha_sigma = 0.0;
  double rhs = 0.0;
  double delta_cap = 0.0;  // 1/(3 n ln(e n))
};

UpperBoundResult upper_bound_check(const MechanismSpec& spec,
                                   const SymMatrix& sigma, Eigen::Index n,
                                   std::int64_t trials,
                                   std::uint64_t master_seed);

// Empirical complementary CDF of |A(x_i, M(X))| on a grid
// t = mult * 6 gamma d^1.5 (mult >= 1), dominated pointwise by
// exp(-t / (9 gamma sqrt d)) up to 3 binomial standard errors, where
// gamma = 1 + 10 / lambda_min(Sigma). Also verifies the per-sample bound
// |A| <= sqrt(d) gamma ||z z^T - I||_F with z = Sigma^{-1/2} x.
struct TailCheckResult {
  struct Point {
    double t = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double binom_se = 0.0;
    bool dominated = false;
  };
  std::vector<Point> points;
  std::int64_t samples = 0;
  double gamma = 0.0;
  double t_min = 0.0;                // 6 gamma d^1.5
  bool all_dominated = false;
  bool per_sample_bound_ok = false;  // Cauchy-Schwarz chain, per sample
  double max_bound_ratio = 0.0;      // max |A| / (sqrt(d) gamma ||zz^T - I||)
};

TailCheckResult tail_statistic_check(const MechanismSpec& spec,
                                     const SymMatrix& sigma, Eigen::Index n,
                                     std::int64_t trials,
                                     const std::vector<double>& grid_multipliers,
                                     std::uint64_t master_seed);

}  // namespace covaudit

#endif  // COVAUDIT_ATTACK_HPP_
