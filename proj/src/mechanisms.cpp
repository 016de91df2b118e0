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

#include "covaudit/mechanisms.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace covaudit {

std::string mechanism_kind_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kEmpirical: return "empirical";
    case MechanismKind::kGaussianDP: return "gaussian_dp";
    case MechanismKind::kConstant: return "constant";
    case MechanismKind::kOracle: return "oracle";
  }
  return "unknown";
}

MechanismSpec MechanismSpec::Empirical(bool project) {
  MechanismSpec spec;
  spec.kind = MechanismKind::kEmpirical;
  spec.project_output = project;
  return spec;
}

MechanismSpec MechanismSpec::GaussianDP(double epsilon, double delta,
                                        bool project,
                                        std::optional<double> clip) {
  MechanismSpec spec;
  spec.kind = MechanismKind::kGaussianDP;
  spec.epsilon = epsilon;
  spec.delta = delta;
  spec.clip_radius = clip;
  spec.project_output = project;
  spec.validate();
  return spec;
}

MechanismSpec MechanismSpec::Constant(SymMatrix value, bool project) {
  MechanismSpec spec;
  spec.kind = MechanismKind::kConstant;
  spec.constant_value = std::move(value);
  spec.project_output = project;
  spec.validate();
  return spec;
}

MechanismSpec MechanismSpec::Oracle(bool project) {
  MechanismSpec spec;
  spec.kind = MechanismKind::kOracle;
  spec.project_output = project;
  return spec;
}

void MechanismSpec::validate() const {
  if (kind == MechanismKind::kGaussianDP) {
    if (!epsilon || !(*epsilon > 0))
      throw std::invalid_argument("MechanismSpec: gaussian_dp needs epsilon > 0");
    if (!delta || !(*delta > 0 && *delta < 1))
      throw std::invalid_argument("MechanismSpec: gaussian_dp needs delta in (0,1)");
    if (clip_radius && !(*clip_radius > 0))
      throw std::invalid_argument("MechanismSpec: clip_radius must be > 0");
  }
  if (kind == MechanismKind::kConstant) {
    if (!constant_value)
      throw std::invalid_argument("MechanismSpec: constant needs constant_value");
    if (project_output &&
        !WellConditionedSet{}.contains(*constant_value, 1e-12))
      throw std::invalid_argument(
          "MechanismSpec: constant_value must lie in the well-conditioned set "
          "when project_output is on");
  }
}

double MechanismSpec::resolved_clip_radius(Eigen::Index d) const {
  if (clip_radius) return *clip_radius;
  // E||x||^2 = tr(Sigma) <= 10 d on the well-conditioned set, so this radius
  // leaves clipping rarely active.
  return 2.0 * std::sqrt(10.0 * static_cast<double>(d));
}

std::string MechanismSpec::name() const { return mechanism_kind_name(kind); }

SymMatrix evaluate(const MechanismSpec& spec, const Dataset& x, RngStream& rng,
                   const SymMatrix* oracle_truth) {
  spec.validate();
  if (x.count() < 1) throw std::invalid_argument("evaluate: dataset is empty");
  const Eigen::Index d = x.dim();
  const Eigen::Index n = x.count();

  Eigen::MatrixXd out;
  switch (spec.kind) {
    case MechanismKind::kEmpirical:
      out = x.columns * x.columns.transpose() / static_cast<double>(n);
      break;
    case MechanismKind::kConstant:
      out = spec.constant_value->mat();
      break;
    case MechanismKind::kOracle:
      if (oracle_truth == nullptr)
        throw std::invalid_argument("evaluate: oracle needs the true Sigma");
      out = oracle_truth->mat();
      break;
    case MechanismKind::kGaussianDP: {
      const double c = spec.resolved_clip_radius(d);
      Eigen::MatrixXd clipped = x.columns;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double norm = clipped.col(j).norm();
        if (norm > c) clipped.col(j) *= c / norm;
      }
      out = clipped * clipped.transpose() / static_cast<double>(n);
      // Replace-one sensitivity of the clipped second moment:
      // ||x x^T - z z^T||_F / n <= 2 c^2 / n.
      const double sensitivity = 2.0 * c * c / static_cast<double>(n);
      const double sigma_noise =
          sensitivity * std::sqrt(2.0 * std::log(1.25 / *spec.delta)) /
          *spec.epsilon;
      const Eigen::MatrixXd z = sigma_noise * rng.gaussian_matrix(d, d);
      out += 0.5 * (z + z.transpose());
      break;
    }
  }
  SymMatrix result(out, 1e-8);
  if (spec.project_output) result = project_well_conditioned(result);
  return result;
}

ErrorSamples measure_error_samples(const MechanismSpec& spec,
                                   const NormalizedWishartPrior& prior,
                                   Eigen::Index n, std::int64_t trials,
                                   std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("measure_error_samples: trials must be >= 2");
  const WellConditionedSet well{};
  ErrorSamples samples;
  samples.err_sq.reserve(trials);
  samples.in_w.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const SymMatrix sigma = sample_normalized_wishart(prior, rng);
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    samples.err_sq.push_back((m.mat() - sigma.mat()).squaredNorm());
    samples.in_w.push_back(well.contains(sigma));
  }
  return samples;
}

ErrorReport measure_error(const MechanismSpec& spec,
                          const NormalizedWishartPrior& prior, Eigen::Index n,
                          std::int64_t trials, std::uint64_t master_seed) {
  const ErrorSamples samples =
      measure_error_samples(spec, prior, n, trials, master_seed);
  std::vector<double> sq_all = samples.err_sq;
  std::vector<double> sq_kept;
  std::int64_t rejected = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    if (samples.in_w[t]) {
      sq_kept.push_back(samples.err_sq[t]);
    } else {
      ++rejected;
    }
  }
  if (sq_kept.size() < 2)
    throw std::runtime_error(
        "measure_error: (almost) all prior draws fell outside the "
        "well-conditioned set");
  ErrorReport report;
  report.alpha_sq = make_estimate(sq_kept, master_seed);
  report.alpha_sq_all = make_estimate(sq_all, master_seed);
  report.reject_rate =
      static_cast<double>(rejected) / static_cast<double>(trials);
  const double alpha = std::sqrt(std::max(report.alpha_sq.mean, 0.0));
  report.alpha = McEstimate{
      alpha,
      alpha > 0 ? report.alpha_sq.std_error / (2.0 * alpha) : 0.0,
      report.alpha_sq.trials, master_seed};
  return report;
}

FixedErrorReport measure_error_fixed(const MechanismSpec& spec,
                                     const SymMatrix& sigma, Eigen::Index n,
                                     std::int64_t trials,
                                     std::uint64_t master_seed) {
  if (trials < 2)
    throw std::invalid_argument("measure_error_fixed: trials must be >= 2");
  std::vector<double> sq;
  sq.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(t));
    const Dataset x = sample_gaussian_dataset(sigma, n, rng);
    const SymMatrix m = evaluate(spec, x, rng, &sigma);
    sq.push_back((m.mat() - sigma.mat()).squaredNorm());
  }
  FixedErrorReport report;
  report.alpha_sq = make_estimate(sq, master_seed);
  const double alpha = std::sqrt(std::max(report.alpha_sq.mean, 0.0));
  report.alpha_sigma = McEstimate{
      alpha,
      alpha > 0 ? report.alpha_sq.std_error / (2.0 * alpha) : 0.0,
      report.alpha_sq.trials, master_seed};
  return report;
}

}  // namespace covaudit
