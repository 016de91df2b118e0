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

#ifndef COVAUDIT_MC_HPP_
#define COVAUDIT_MC_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace covaudit {

// Monte Carlo point estimate with its standard error of the mean.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
};

// Order-independent deterministic reduction (pairwise summation).
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline McEstimate make_estimate(const std::vector<double>& values,
                                std::uint64_t master_seed) {
  if (values.size() < 2)
    throw std::invalid_argument("McEstimate: need at least 2 trials");
  const auto n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double c = values[i] - mean;
    sq[i] = c * c;
  }
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n), static_cast<std::int64_t>(values.size()),
          master_seed};
}

// One-sided binomial standard error for an empirical frequency.
inline double binomial_std_error(double p_hat, std::int64_t n) {
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) /
                   static_cast<double>(n));
}

}  // namespace covaudit

#endif  // COVAUDIT_MC_HPP_
