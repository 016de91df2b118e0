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

#include "covaudit/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "covaudit/score_fisher.hpp"

namespace covaudit {

namespace {

// sum_i A(x_i, M) = <M - Sigma, sum_i S(x_i)> with the score sum collapsing
// to (n/2) (Sigma^{-1} Shat Sigma^{-1} - Sigma^{-1}), Shat = X X^T / n.
double statistic_sum(const SymMatrix& m, const SymMatrix& sigma,
                     const Dataset& x) {
  const Eigen::Index d = sigma.dim();
  const double n = static_cast<double>(x.count());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("statistic_sum: Sigma must be positive definite");
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd shat = x.columns * x.columns.transpose() / n;
  const Eigen::MatrixXd diff = m.mat() - sigma.mat();
  const Eigen::MatrixXd w = sigma_inv * shat * sigma_inv;
  return 0.5 * n *
         (diff.cwiseProduct(w).sum() - diff.cwiseProduct(sigma_inv).sum());
}

constexpr double kBetaUpper = 10.0;  // spectral cap enforced by projection

}  // namespace

BoundReport BoundReport::Make(McEstimate estimate, double bound_value,
                              Direction direction, CheckStatus status) {
  BoundReport report;
  report.estimate = estimate;
  report.bound_value = bound_value;
  report.direction = direction;
  report.status = status;
  report.satisfied =
      status == CheckStatus::kOk &&
      check_satisfied(estimate.mean, estimate.std_error, bound_value, direction);
  return report;
}

bool check_satisfied(double estimate, double std_error, double bound,
                     Direction direction) {
  const double slack = 3.0 * std_error;
  switch (direction) {
    case Direction::kLe: return estimate <= bound + slack;
    case Direction::kGe: return estimate >= bound - slack;
    case Direction::kEqWithin: return std::abs(estimate - bound) <= slack;
  }
  return false;
}

double correlation_statistic(const Eigen::VectorXd& z, const SymMatrix& m_out,
                             const SymMatrix& sigma) {
  const SymMatrix score = score_matrix(z, sigma);
  return (m_out.mat() - sigma.mat()).cwiseProduct(score.mat()).sum();
}

McEstimate estimate_in_sample_sum(const MechanismSpec& spec,
                                  const NormalizedWishartPrior& prior,
                                  Eigen::Index n, std::int64_t trials,
                                  std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("estimate_in_sample_sum: trials must be >= 2");
  std::vector<double> values;
  values.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const SymMatrix sigma = sample_normalized_wishart(prior, rng);
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    values.push_back(statistic_sum(m, sigma, x));
  }
  return make_estimate(values, master_seed);
}

std::vector<double> in_sample_sum_samples(const MechanismSpec& spec,
                                          const SymMatrix& sigma,
                                          Eigen::Index n, std::int64_t trials,
                                          std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("in_sample_sum_samples: trials must be >= 2");
  std::vector<double> values;
  values.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    values.push_back(statistic_sum(m, sigma, x));
  }
  return values;
}

McEstimate estimate_in_sample_sum_fixed(const MechanismSpec& spec,
                                        const SymMatrix& sigma, Eigen::Index n,
                                        std::int64_t trials,
                                        std::uint64_t master_seed) {
  return make_estimate(in_sample_sum_samples(spec, sigma, n, trials, master_seed),
                       master_seed);
}

McEstimate estimate_prior_upper_bound_rhs(const MechanismSpec& spec,
                                          const NormalizedWishartPrior& prior,
                                          Eigen::Index n, std::int64_t trials,
                                          std::int64_t inner_trials,
                                          std::uint64_t master_seed) {
  if (spec.kind != MechanismKind::kGaussianDP)
    throw std::invalid_argument(
        "estimate_prior_upper_bound_rhs: spec must be gaussian_dp");
  if (!spec.project_output)
    throw std::invalid_argument(
        "estimate_prior_upper_bound_rhs: needs project_output (beta_u = 10)");
  if (trials < 2 || inner_trials < 1)
    throw std::invalid_argument(
        "estimate_prior_upper_bound_rhs: need trials >= 2, inner_trials >= 1");
  const double d15 = std::pow(static_cast<double>(prior.dim), 1.5);
  std::vector<double> values;
  values.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const SymMatrix sigma = sample_normalized_wishart(prior, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.mat(),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    double err_sq = 0.0;
    for (std::int64_t k = 0; k < inner_trials; ++k) {
      const Dataset x = sample_gaussian_dataset(sigma, n, rng);
      const SymMatrix m = evaluate(spec, x, rng, &sigma);
      err_sq += (m.mat() - sigma.mat()).squaredNorm();
    }
    const double alpha_sigma =
        std::sqrt(err_sq / static_cast<double>(inner_trials));
    values.push_back(2.0 * static_cast<double>(n) * *spec.epsilon *
                         alpha_sigma / lmin +
                     (kBetaUpper / lmin + 1.0) * d15);
  }
  return make_estimate(values, master_seed);
}

McEstimate estimate_out_of_sample(const MechanismSpec& spec,
                                  const NormalizedWishartPrior& prior,
                                  Eigen::Index n, std::int64_t trials,
                                  std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("estimate_out_of_sample: trials must be >= 2");
  std::vector<double> values;
  values.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const SymMatrix sigma = sample_normalized_wishart(prior, rng);
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    const Eigen::VectorXd z =
        cholesky_factor(sigma) * rng.gaussian_vector(sigma.dim());
    values.push_back(correlation_statistic(z, m, sigma));
  }
  return make_estimate(values, master_seed);
}

DivergenceIdentityResult divergence_identity_check(
    const MechanismSpec& spec, const SymMatrix& sigma, Eigen::Index n,
    std::int64_t inner_trials, double h, std::int64_t replicates,
    std::uint64_t master_seed) {
  if (inner_trials < 1 || replicates < 2)
    throw std::invalid_argument(
        "divergence_identity_check: need inner_trials >= 1, replicates >= 2");
  const Eigen::Index d = sigma.dim();

  // g(S) = E[M(X) | S] estimated with frozen draws shared across all
  // finite-difference nodes (common random numbers), so the difference
  // quotient sees a smooth function of S.
  std::vector<double> divergence_values;
  divergence_values.reserve(replicates);
  for (std::int64_t r = 0; r < replicates; ++r) {
    const std::uint64_t replicate_seed = mix_seed(master_seed, 0x100 + r);
    auto g_hat = [&](const SymMatrix& s) -> SymMatrix {
      const Eigen::MatrixXd l = cholesky_factor(s);
      Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(d, d);
      for (std::int64_t k = 0; k < inner_trials; ++k) {
        RngStream data_rng(replicate_seed, 2 * static_cast<std::uint64_t>(k));
        RngStream mech_rng(replicate_seed, 2 * static_cast<std::uint64_t>(k) + 1);
        const Dataset x{l * data_rng.gaussian_matrix(d, n)};
        accum += evaluate(spec, x, mech_rng, &s).mat();
      }
      return SymMatrix((accum / static_cast<double>(inner_trials)).eval(), 1e-9);
    };
    divergence_values.push_back(fd_divergence(g_hat, sigma, h));
  }

  DivergenceIdentityResult result;
  result.divergence = make_estimate(divergence_values, master_seed);
  result.direct = estimate_in_sample_sum_fixed(
      spec, sigma, n, inner_trials * replicates, mix_seed(master_seed, 1));
  const double se = std::hypot(result.direct.std_error,
                               result.divergence.std_error);
  result.report = BoundReport::Make(
      McEstimate{result.direct.mean - result.divergence.mean, se,
                 result.direct.trials, master_seed},
      0.0, Direction::kEqWithin);
  return result;
}

BoundReport stein_haff_check(SteinHaffFunction g_kind, double constant_scale,
                             const WishartParams& params, std::int64_t trials,
                             std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("stein_haff_check: trials must be >= 2");
  if (params.dof <= params.dim + 1)
    throw std::invalid_argument(
        "stein_haff_check: need dof > dim + 1 for E[Sigma^{-1}] to be finite");
  const Eigen::Index d = params.dim;
  const double coeff = static_cast<double>(params.dof - d - 1);
  const Eigen::MatrixXd v_inv =
      Eigen::LLT<Eigen::MatrixXd>(params.scale.mat())
          .solve(Eigen::MatrixXd::Identity(d, d));

  std::vector<double> diffs;
  diffs.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const SymMatrix sigma = sample_wishart(params, rng);
    const Eigen::MatrixXd sigma_inv = spd_inverse(sigma);
    const Eigen::MatrixXd weight = v_inv - coeff * sigma_inv;

    double lhs = 0.0;
    Eigen::MatrixXd g;
    switch (g_kind) {
      case SteinHaffFunction::kIdentity:
        lhs = 0.5 * static_cast<double>(d * (d + 1));
        g = sigma.mat();
        break;
      case SteinHaffFunction::kConstant:
        lhs = 0.0;
        g = constant_scale * Eigen::MatrixXd::Identity(d, d);
        break;
      case SteinHaffFunction::kSquare:
        // sum_{i>=j} d(S^2)_ij / dS_ij = 2 tr(S) + (d-1) tr(S).
        lhs = static_cast<double>(d + 1) * sigma.mat().trace();
        g = sigma.mat() * sigma.mat();
        break;
    }
    const double rhs = 0.5 * weight.cwiseProduct(g).sum();
    diffs.push_back(lhs - rhs);
  }
  return BoundReport::Make(make_estimate(diffs, master_seed), 0.0,
                           Direction::kEqWithin);
}

HaffAccuracyResult haff_accuracy_bound_check(const MechanismSpec& spec,
                                             const NormalizedWishartPrior& prior,
                                             Eigen::Index n, std::int64_t trials,
                                             std::uint64_t master_seed) {
  HaffAccuracyResult result;
  if (prior.dof != 2 * prior.dim)
    throw std::invalid_argument(
        "haff_accuracy_bound_check: the 2 d^1.5 form needs dof = 2 dim");
  if (spec.kind == MechanismKind::kOracle) {
    // The oracle reads Sigma directly, so E[M(X) | Sigma] is not a
    // divergence of a function of the data; the identity chain does not
    // apply.
    result.report = BoundReport::Make(McEstimate{0, 0, 2, master_seed}, 0.0,
                                      Direction::kGe,
                                      CheckStatus::kNotApplicable);
    return result;
  }
  if (prior.dim < 5) {
    result.report = BoundReport::Make(McEstimate{0, 0, 2, master_seed}, 0.0,
                                      Direction::kGe,
                                      CheckStatus::kHypothesesNotMet);
    return result;
  }
  const double d = static_cast<double>(prior.dim);
  const ErrorReport error =
      measure_error(spec, prior, n, trials, mix_seed(master_seed, 2));
  result.alpha_sq_all = error.alpha_sq_all;
  // E||Sigma - g(Sigma)||^2 <= E[alpha_Sigma^2] by conditional Jensen, so
  // substituting the measured unconditional error only loosens the bound.
  const double rms = std::sqrt(std::max(error.alpha_sq_all.mean, 0.0));
  result.rhs_bound = 0.5 * d * (d + 1.0) - 2.0 * std::pow(d, 1.5) * rms;

  McEstimate lhs = estimate_in_sample_sum(spec, prior, n, trials,
                                          mix_seed(master_seed, 3));
  const double rhs_se =
      rms > 0 ? std::pow(d, 1.5) * error.alpha_sq_all.std_error / rms : 0.0;
  McEstimate comparison{lhs.mean, std::hypot(lhs.std_error, rhs_se), lhs.trials,
                        master_seed};
  result.report = BoundReport::Make(comparison, result.rhs_bound, Direction::kGe);
  return result;
}

Eigen::Index find_n_for_alpha(const MechanismSpec& spec, Eigen::Index d,
                              double target_alpha, std::int64_t probe_trials,
                              std::uint64_t master_seed, Eigen::Index n_lo,
                              Eigen::Index n_hi) {
  if (!(target_alpha > 0))
    throw std::invalid_argument("find_n_for_alpha: target_alpha must be > 0");
  const NormalizedWishartPrior prior(d);
  auto alpha_at = [&](Eigen::Index n) {
    return measure_error(spec, prior, n, probe_trials,
                         mix_seed(master_seed, static_cast<std::uint64_t>(n)))
        .alpha.mean;
  };
  Eigen::Index hi = n_lo;
  while (alpha_at(hi) > target_alpha) {
    hi *= 2;
    if (hi > n_hi)
      throw std::runtime_error(
          "find_n_for_alpha: target alpha unreachable below the n cap");
  }
  Eigen::Index lo = hi / 2 < n_lo ? n_lo : hi / 2;
  while (hi - lo > std::max<Eigen::Index>(1, lo / 64)) {
    const Eigen::Index mid = lo + (hi - lo) / 2;
    if (alpha_at(mid) > target_alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

LowerBoundResult lower_bound_experiment(const MechanismSpec& spec,
                                        Eigen::Index d, Eigen::Index n,
                                        std::int64_t trials,
                                        std::uint64_t master_seed) {
  if (!spec.project_output)
    throw std::invalid_argument(
        "lower_bound_experiment: the bound needs project_output (M(X) <= 10 I)");
  const NormalizedWishartPrior prior(d);
  LowerBoundResult result;
  result.alpha_hypothesis = std::sqrt(static_cast<double>(d)) / 15.0;

  if (n == 0) {
    // Stay inside the hypothesis with margin.
    result.n_used = find_n_for_alpha(spec, d, 0.9 * result.alpha_hypothesis,
                                     std::max<std::int64_t>(trials / 4, 100),
                                     mix_seed(master_seed, 4));
  } else {
    result.n_used = n;
  }
  result.error =
      measure_error(spec, prior, result.n_used, trials, mix_seed(master_seed, 5));

  const double bound = static_cast<double>(d) * static_cast<double>(d) / 4.0;
  const bool hypotheses_ok =
      d >= 20 && result.error.alpha.mean <= result.alpha_hypothesis;
  if (!hypotheses_ok) {
    result.report =
        BoundReport::Make(McEstimate{0, 0, 2, master_seed}, bound,
                          Direction::kGe, CheckStatus::kHypothesesNotMet);
    return result;
  }

  std::int64_t t = trials;
  McEstimate sum = estimate_in_sample_sum(spec, prior, result.n_used, t,
                                          mix_seed(master_seed, 6));
  while (sum.std_error >= 0.05 * std::abs(bound - sum.mean) && t < 4 * trials) {
    t *= 2;
    sum = estimate_in_sample_sum(spec, prior, result.n_used, t,
                                 mix_seed(master_seed, 6));
  }
  result.report = BoundReport::Make(sum, bound, Direction::kGe);
  return result;
}

UpperBoundResult upper_bound_check(const MechanismSpec& spec,
                                   const SymMatrix& sigma, Eigen::Index n,
                                   std::int64_t trials,
                                   std::uint64_t master_seed) {
  if (spec.kind != MechanismKind::kGaussianDP)
    throw std::invalid_argument("upper_bound_check: spec must be gaussian_dp");
  if (!spec.project_output)
    throw std::invalid_argument(
        "upper_bound_check: the bound needs project_output (beta_u = 10)");
  UpperBoundResult result;
  result.delta_cap =
      1.0 / (3.0 * static_cast<double>(n) *
             std::log(M_E * static_cast<double>(n)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.mat(),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0))
    throw std::invalid_argument("upper_bound_check: Sigma must be positive definite");
  const double d15 = std::pow(static_cast<double>(sigma.dim()), 1.5);

  if (*spec.delta > result.delta_cap) {
    result.report = BoundReport::Make(McEstimate{0, 0, 2, master_seed}, 0.0,
                                      Direction::kLe,
                                      CheckStatus::kHypothesesNotMet);
    return result;
  }

  const FixedErrorReport error =
      measure_error_fixed(spec, sigma, n, trials, mix_seed(master_seed, 7));
  result.alpha_sigma = error.alpha_sigma.mean;
  const double factor = 2.0 * static_cast<double>(n) * *spec.epsilon / lmin;
  result.rhs = factor * result.alpha_sigma + (kBetaUpper / lmin + 1.0) * d15;

  std::int64_t t = trials;
  McEstimate lhs = estimate_in_sample_sum_fixed(spec, sigma, n, t,
                                                mix_seed(master_seed, 8));
  while (lhs.std_error >= 0.05 * std::abs(result.rhs - lhs.mean) &&
         t < 4 * trials) {
    t *= 2;
    lhs = estimate_in_sample_sum_fixed(spec, sigma, n, t,
                                       mix_seed(master_seed, 8));
  }
  const double se =
      std::hypot(lhs.std_error, factor * error.alpha_sigma.std_error);
  result.report =
      BoundReport::Make(McEstimate{lhs.mean, se, lhs.trials, master_seed},
                        result.rhs, Direction::kLe);
  return result;
}

TailCheckResult tail_statistic_check(const MechanismSpec& spec,
                                     const SymMatrix& sigma, Eigen::Index n,
                                     std::int64_t trials,
                                     const std::vector<double>& grid_multipliers,
                                     std::uint64_t master_seed) {
  if (!spec.project_output)
    throw std::invalid_argument(
        "tail_statistic_check: the tail bound needs project_output (beta_u = 10)");
  if (trials < 1 || grid_multipliers.empty())
    throw std::invalid_argument("tail_statistic_check: empty grid or no trials");
  const Eigen::Index d = sigma.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.mat());
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0))
    throw std::invalid_argument("tail_statistic_check: Sigma must be positive definite");

  TailCheckResult result;
  result.gamma = 1.0 + kBetaUpper / lmin;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  result.t_min = 6.0 * result.gamma * sqrt_d * static_cast<double>(d);
  const double rate = 9.0 * result.gamma * sqrt_d;

  std::vector<double> grid;
  for (const double mult : grid_multipliers) {
    if (mult < 1.0)
      throw std::invalid_argument(
          "tail_statistic_check: grid point below the 6 gamma d^1.5 threshold");
    grid.push_back(mult * result.t_min);
  }

  // Whitening root for the per-sample Cauchy-Schwarz bound.
  const Eigen::MatrixXd inv_root =
      es.eigenvectors() *
      es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();

  std::vector<std::int64_t> exceed(grid.size(), 0);
  result.per_sample_bound_ok = true;
  result.max_bound_ratio = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    const Eigen::MatrixXd diff = m.mat() - sigma.mat();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
    const Eigen::MatrixXd u = llt.solve(x.columns);  // Sigma^{-1} x_i columns
    const double trace_term =
        diff.cwiseProduct(llt.solve(Eigen::MatrixXd::Identity(d, d))).sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a =
          std::abs(0.5 * (u.col(i).dot(diff * u.col(i)) - trace_term));
      for (std::size_t gpt = 0; gpt < grid.size(); ++gpt)
        if (a >= grid[gpt]) ++exceed[gpt];
      const double z_sq = (inv_root * x.columns.col(i)).squaredNorm();
      const double envelope =
          sqrt_d * result.gamma *
          std::sqrt((z_sq - 1.0) * (z_sq - 1.0) + static_cast<double>(d - 1));
      const double ratio = envelope > 0 ? a / envelope : 0.0;
      result.max_bound_ratio = std::max(result.max_bound_ratio, ratio);
      if (a > envelope * (1.0 + 1e-9)) result.per_sample_bound_ok = false;
    }
  }

  result.samples = trials * static_cast<std::int64_t>(n);
  result.all_dominated = true;
  for (std::size_t gpt = 0; gpt < grid.size(); ++gpt) {
    TailCheckResult::Point point;
    point.t = grid[gpt];
    point.empirical = static_cast<double>(exceed[gpt]) /
                      static_cast<double>(result.samples);
    point.bound = std::exp(-point.t / rate);
    point.binom_se = binomial_std_error(point.empirical, result.samples);
    point.dominated = point.empirical <= point.bound + 3.0 * point.binom_se;
    result.all_dominated = result.all_dominated && point.dominated;
    result.points.push_back(point);
  }
  return result;
}

}  // namespace covaudit
