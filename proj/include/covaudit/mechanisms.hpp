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

// Reference covariance-estimation mechanisms behind one interface, plus
// error measurement against a fixed Sigma or against the normalized Wishart
// prior conditioned on the well-conditioned set.

#ifndef COVAUDIT_MECHANISMS_HPP_
#define COVAUDIT_MECHANISMS_HPP_

#include <optional>
#include <string>

#include "covaudit/distributions.hpp"
#include "covaudit/mc.hpp"
#include "covaudit/rng.hpp"
#include "covaudit/sym.hpp"

namespace covaudit {

enum class MechanismKind { kEmpirical, kGaussianDP, kConstant, kOracle };

std::string mechanism_kind_name(MechanismKind kind);

// Description of a covariance estimator. GaussianDP clips each column to
// norm <= clip_radius, forms the empirical second moment, and adds a
// symmetrized Gaussian noise matrix calibrated to replace-one Frobenius
// sensitivity 2 clip_radius^2 / n at (epsilon, delta); symmetrization and
// projection are post-processing. Oracle returns the true Sigma and exists
// only as a non-private test baseline.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kEmpirical;
  std::optional<double> epsilon;      // GaussianDP only, > 0
  std::optional<double> delta;        // GaussianDP only, in (0,1)
  std::optional<double> clip_radius;  // GaussianDP; default 2 sqrt(10 d)
  std::optional<SymMatrix> constant_value;  // Constant only
  bool project_output = false;  // clamp eigenvalues into [0.09, 10]

  static MechanismSpec Empirical(bool project = false);
  static MechanismSpec GaussianDP(double epsilon, double delta,
                                  bool project = true,
                                  std::optional<double> clip = std::nullopt);
  static MechanismSpec Constant(SymMatrix value, bool project = false);
  static MechanismSpec Oracle(bool project = false);

  void validate() const;
  double resolved_clip_radius(Eigen::Index d) const;
  std::string name() const;
};

// Run the mechanism on one dataset. `oracle_truth` supplies the true Sigma
// for the Oracle baseline and is ignored otherwise.
SymMatrix evaluate(const MechanismSpec& spec, const Dataset& x, RngStream& rng,
                   const SymMatrix* oracle_truth = nullptr);

// alpha        : sqrt(E[ ||M(X) - Sigma||_F^2 | Sigma in W ]), the std error
//                is propagated through the square root (delta method).
// alpha_sq     : E[ ||M(X) - Sigma||_F^2 | Sigma in W ].
// alpha_sq_all : unconditional E[ ||M(X) - Sigma||_F^2 ].
// reject_rate  : fraction of prior draws with Sigma outside W.
struct ErrorReport {
  McEstimate alpha;
  McEstimate alpha_sq;
  McEstimate alpha_sq_all;
  double reject_rate = 0.0;
};

// Per trial: draw Sigma from the prior, draw X | Sigma, run the mechanism,
// accumulate the squared Frobenius error; the alpha aggregate keeps only
// draws with Sigma in W. Throws if every draw is rejected.
ErrorReport measure_error(const MechanismSpec& spec,
                          const NormalizedWishartPrior& prior, Eigen::Index n,
                          std::int64_t trials, std::uint64_t master_seed);

// Per-trial squared errors under the prior; trial t uses stream
// (master_seed, t), so calls sharing a seed are paired draw for draw.
struct ErrorSamples {
  std::vector<double> err_sq;
  std::vector<bool> in_w;
};

ErrorSamples measure_error_samples(const MechanismSpec& spec,
                                   const NormalizedWishartPrior& prior,
                                   Eigen::Index n, std::int64_t trials,
                                   std::uint64_t master_seed);

// Fixed-Sigma error alpha_Sigma = sqrt(E[ ||M(X) - Sigma||_F^2 ]).
struct FixedErrorReport {
  McEstimate alpha_sigma;  // delta-method std error
  McEstimate alpha_sq;
};

FixedErrorReport measure_error_fixed(const MechanismSpec& spec,
                                     const SymMatrix& sigma, Eigen::Index n,
                                     std::int64_t trials,
                                     std::uint64_t master_seed);

}  // namespace covaudit

#endif  // COVAUDIT_MECHANISMS_HPP_
