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

// Command-line experiment runner: seeded execution of the identity and tail
// checks, attack experiments, and CSV / JSON-lines report emission.
//
// Exit codes: 0 all checks satisfied, 1 some check unsatisfied (report still
// written), 2 usage or configuration error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covaudit/attack.hpp"
#include "covaudit/distributions.hpp"
#include "covaudit/mechanisms.hpp"
#include "covaudit/report.hpp"
#include "covaudit/score_fisher.hpp"
#include "covaudit/sym.hpp"

namespace {

using namespace covaudit;

constexpr std::uint64_t kDefaultSeed = 42;

struct Options {
  long long d = 5;
  long long n = 100;
  long long trials = 2000;
  std::string mechanism = "empirical";
  double epsilon = 1.0;
  double delta = 1e-6;
  double clip_radius = 0.0;  // 0 -> mechanism default 2 sqrt(10 d)
  double constant_scale = 1.0;
  bool project = false;
  std::uint64_t seed = kDefaultSeed;
  std::string output = "-";
  std::string format = "csv";
  std::string config_path;
  bool epsilon_given = false;
  bool n_given = false;
  bool delta_given = false;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t row_seed(const Options& opt, const std::string& check_id) {
  return mix_seed(opt.seed, fnv1a(check_id));
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

[[noreturn]] void usage_error(const std::string& message) {
  throw CLI::ValidationError(message);
}

void apply_config_file(const std::string& path, Options& opt) {
  std::ifstream in(path);
  if (!in) usage_error("config: cannot open " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    usage_error("config: invalid JSON in " + path + ": " + e.what());
  }
  if (!cfg.is_object()) usage_error("config: top level must be an object");
  for (const auto& [key, value] : cfg.items()) {
    try {
      if (key == "d") opt.d = value.get<long long>();
      else if (key == "n") { opt.n = value.get<long long>(); opt.n_given = true; }
      else if (key == "trials") opt.trials = value.get<long long>();
      else if (key == "mechanism") opt.mechanism = value.get<std::string>();
      else if (key == "epsilon") { opt.epsilon = value.get<double>(); opt.epsilon_given = true; }
      else if (key == "delta") { opt.delta = value.get<double>(); opt.delta_given = true; }
      else if (key == "clip_radius") opt.clip_radius = value.get<double>();
      else if (key == "constant_scale") opt.constant_scale = value.get<double>();
      else if (key == "project") opt.project = value.get<bool>();
      else if (key == "seed") opt.seed = value.get<std::uint64_t>();
      else if (key == "output") opt.output = value.get<std::string>();
      else if (key == "format") opt.format = value.get<std::string>();
      else usage_error("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      usage_error("config: wrong type for key '" + key + "'");
    }
  }
}

void validate_options(const Options& opt) {
  if (opt.d < 1) usage_error("d: must be a positive integer");
  if (opt.n < 1) usage_error("n: must be a positive integer");
  if (opt.trials < 2) usage_error("trials: must be at least 2");
  if (opt.mechanism != "empirical" && opt.mechanism != "gaussian_dp" &&
      opt.mechanism != "constant" && opt.mechanism != "oracle")
    usage_error("mechanism: must be one of empirical|gaussian_dp|constant|oracle");
  if (!(opt.epsilon > 0)) usage_error("epsilon: must be > 0");
  if (!(opt.delta > 0 && opt.delta < 1)) usage_error("delta: must lie in (0,1)");
  if (opt.clip_radius < 0) usage_error("clip_radius: must be >= 0");
  if (opt.format != "csv" && opt.format != "json")
    usage_error("format: must be csv or json");
}

MechanismSpec build_mechanism(const Options& opt) {
  if (opt.mechanism == "empirical") return MechanismSpec::Empirical(opt.project);
  if (opt.mechanism == "gaussian_dp")
    return MechanismSpec::GaussianDP(
        opt.epsilon, opt.delta, opt.project,
        opt.clip_radius > 0 ? std::optional<double>(opt.clip_radius)
                            : std::nullopt);
  if (opt.mechanism == "constant")
    return MechanismSpec::Constant(
        SymMatrix(Eigen::MatrixXd::Identity(opt.d, opt.d) * opt.constant_scale),
        opt.project);
  return MechanismSpec::Oracle();
}

// ---------------------------------------------------------------------------
// verify-identities

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<ReportRow> run_verify_identities(const Options& opt) {
  std::vector<ReportRow> rows;
  const Eigen::Index d = opt.d;

  {
    Timer timer;
    RngStream rng(row_seed(opt, "vech_roundtrip"), 0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::MatrixXd a = rng.gaussian_matrix(d, d);
      const SymMatrix s(((a + a.transpose()) / 2).eval());
      worst = std::max(worst, max_abs(unvech(vech(s)).mat() - s.mat()));
    }
    rows.push_back(make_row("identities/vech_roundtrip",
                            McEstimate{worst, 0, 100, row_seed(opt, "vech_roundtrip")},
                            0.0, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    RngStream rng(row_seed(opt, "duplication"), 0);
    double worst = 0.0;
    for (Eigen::Index dd = 1; dd <= 6; ++dd) {
      const Eigen::MatrixXd dup = duplication_matrix<double>(dd);
      for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = rng.gaussian_matrix(dd, dd);
        const SymMatrix s(((a + a.transpose()) / 2).eval());
        const Eigen::VectorXd lhs = dup * vech(s).values();
        const Eigen::VectorXd rhs =
            Eigen::Map<const Eigen::VectorXd>(s.mat().data(), dd * dd);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
      }
    }
    rows.push_back(make_row("identities/duplication_vech_vec",
                            McEstimate{worst, 0, 120, row_seed(opt, "duplication")},
                            0.0, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    RngStream rng(row_seed(opt, "pairing"), 0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::MatrixXd g = rng.gaussian_matrix(d, d);
      const Eigen::MatrixXd b_raw = rng.gaussian_matrix(d, d);
      const SymMatrix s = sym_gradient<double>(g);
      const SymMatrix b(((b_raw + b_raw.transpose()) / 2).eval());
      const double lhs = b.mat().cwiseProduct(s.mat()).sum();
      const double rhs =
          vech(b).values().dot(halfvec_grad_from_sym_grad(s).values());
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    rows.push_back(make_row("identities/halfvec_pairing",
                            McEstimate{worst, 0, 1000, row_seed(opt, "pairing")},
                            1e-12, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    RngStream rng(row_seed(opt, "projection"), 0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::MatrixXd ga = rng.gaussian_matrix(d, d);
      const Eigen::MatrixXd gb = rng.gaussian_matrix(d, d);
      const SymMatrix a(((ga + ga.transpose()) * 2.0).eval());
      const SymMatrix b(((gb + gb.transpose()) * 2.0).eval());
      const double dist_before = (a.mat() - b.mat()).norm();
      const double dist_after = (project_well_conditioned(a).mat() -
                                 project_well_conditioned(b).mat())
                                    .norm();
      worst = std::max(worst, dist_after - dist_before);
    }
    rows.push_back(make_row("identities/projection_nonexpansive",
                            McEstimate{worst, 0, 1000, row_seed(opt, "projection")},
                            1e-10, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    double worst = 0.0;
    for (Eigen::Index dd = 1; dd <= 8; ++dd) {
      const double div = fd_divergence(
          [](const SymMatrix& s) { return s; }, SymMatrix::Identity(dd), 1e-5);
      worst = std::max(worst, std::abs(div - 0.5 * dd * (dd + 1)));
    }
    rows.push_back(make_row("identities/fd_divergence_identity_map",
                            McEstimate{worst, 0, 8, row_seed(opt, "fd_div")},
                            1e-8, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    const Eigen::Index ds = std::min<Eigen::Index>(d, 6);
    RngStream rng(row_seed(opt, "score_fd"), 0);
    double worst = 0.0;
    const double h = 1e-5;
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::MatrixXd g = rng.gaussian_matrix(ds, ds);
      const SymMatrix sigma(
          (g * g.transpose() + Eigen::MatrixXd::Identity(ds, ds)).eval());
      const Eigen::VectorXd x = rng.gaussian_vector(ds);
      const HalfVec analytic = halfvec_grad_from_sym_grad(score_matrix(x, sigma));
      for (Eigen::Index i = 0; i < ds; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          Eigen::MatrixXd up = sigma.mat(), dn = sigma.mat();
          up(i, j) += h;
          dn(i, j) -= h;
          if (i != j) {
            up(j, i) += h;
            dn(j, i) -= h;
          }
          const double fd = (gaussian_log_density(x, SymMatrix(up)) -
                             gaussian_log_density(x, SymMatrix(dn))) /
                            (2 * h);
          worst = std::max(worst, std::abs(fd - analytic(i, j)));
        }
      }
    }
    rows.push_back(make_row("identities/score_finite_difference",
                            McEstimate{worst, 0, 100, row_seed(opt, "score_fd")},
                            1e-6, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    const Eigen::Index ds = 4;
    RngStream rng(row_seed(opt, "wishart_grad_fd"), 0);
    double worst = 0.0;
    const double h = 1e-5;
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::MatrixXd g = rng.gaussian_matrix(ds, ds);
      const SymMatrix sigma(
          (g * g.transpose() + Eigen::MatrixXd::Identity(ds, ds)).eval());
      const Eigen::MatrixXd gv = rng.gaussian_matrix(ds, ds);
      const WishartParams params(
          ds, 9,
          SymMatrix((gv * gv.transpose() / 4 +
                     Eigen::MatrixXd::Identity(ds, ds))
                        .eval()));
      const SymMatrix grad = wishart_log_density_sym_gradient(sigma, params);
      const HalfVec analytic = halfvec_grad_from_sym_grad(grad);
      for (Eigen::Index i = 0; i < ds; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          Eigen::MatrixXd up = sigma.mat(), dn = sigma.mat();
          up(i, j) += h;
          dn(i, j) -= h;
          if (i != j) {
            up(j, i) += h;
            dn(j, i) -= h;
          }
          const double fd = (wishart_log_density(SymMatrix(up), params) -
                             wishart_log_density(SymMatrix(dn), params)) /
                            (2 * h);
          worst = std::max(worst, std::abs(fd - analytic(i, j)));
        }
      }
    }
    rows.push_back(make_row("identities/wishart_gradient_fd",
                            McEstimate{worst, 0, 20, row_seed(opt, "wishart_grad_fd")},
                            1e-6, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    const Eigen::Index ds = std::min<Eigen::Index>(d, 4);
    RngStream rng(row_seed(opt, "fisher_mc"), 0);
    const Eigen::MatrixXd g = rng.gaussian_matrix(ds, ds);
    const SymMatrix sigma(
        (g * g.transpose() / 2 + Eigen::MatrixXd::Identity(ds, ds)).eval());
    const Eigen::MatrixXd fisher = fisher_information(sigma);
    const Eigen::MatrixXd l = cholesky_factor(sigma);
    const Eigen::Index m = half_dim(ds);
    const std::int64_t draws = std::max<std::int64_t>(opt.trials * 50, 100000);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd acc_sq = Eigen::MatrixXd::Zero(m, m);
    for (std::int64_t k = 0; k < draws; ++k) {
      const Eigen::VectorXd x = l * rng.gaussian_vector(ds);
      const Eigen::VectorXd s =
          halfvec_grad_from_sym_grad(score_matrix(x, sigma)).values();
      const Eigen::MatrixXd outer = s * s.transpose();
      acc += outer;
      acc_sq += outer.cwiseProduct(outer);
    }
    const Eigen::MatrixXd mc = acc / static_cast<double>(draws);
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const double var =
            acc_sq(i, j) / static_cast<double>(draws) - mc(i, j) * mc(i, j);
        const double se = std::sqrt(std::max(var, 1e-30) / static_cast<double>(draws));
        worst_z = std::max(worst_z, std::abs(mc(i, j) - fisher(i, j)) / se);
      }
    rows.push_back(make_row("identities/fisher_mc_max_z",
                            McEstimate{worst_z, 0, draws, row_seed(opt, "fisher_mc")},
                            5.0, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    const Eigen::Index ds = std::min<Eigen::Index>(d, 4);
    RngStream rng(row_seed(opt, "fourth_moment"), 0);
    const Eigen::MatrixXd g = rng.gaussian_matrix(ds, ds);
    const SymMatrix sigma(
        (g * g.transpose() / 2 + Eigen::MatrixXd::Identity(ds, ds)).eval());
    const Eigen::MatrixXd b = rng.gaussian_matrix(ds, ds);
    const Eigen::MatrixXd expected = fourth_moment_rhs(b, sigma);
    const Eigen::MatrixXd l = cholesky_factor(sigma);
    const std::int64_t draws = std::max<std::int64_t>(opt.trials * 50, 100000);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(ds, ds);
    Eigen::MatrixXd acc_sq = Eigen::MatrixXd::Zero(ds, ds);
    for (std::int64_t k = 0; k < draws; ++k) {
      const Eigen::VectorXd x = l * rng.gaussian_vector(ds);
      const Eigen::MatrixXd term = (x.dot(b * x)) * (x * x.transpose());
      acc += term;
      acc_sq += term.cwiseProduct(term);
    }
    const Eigen::MatrixXd mc = acc / static_cast<double>(draws);
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j) {
        const double var =
            acc_sq(i, j) / static_cast<double>(draws) - mc(i, j) * mc(i, j);
        const double se = std::sqrt(std::max(var, 1e-30) / static_cast<double>(draws));
        worst_z = std::max(worst_z, std::abs(mc(i, j) - expected(i, j)) / se);
      }
    rows.push_back(make_row("identities/fourth_moment_mc_max_z",
                            McEstimate{worst_z, 0, draws, row_seed(opt, "fourth_moment")},
                            5.0, Direction::kLe, timer.ms()));
  }

  {
    const Eigen::Index ds = std::max<Eigen::Index>(d, 2);
    const WishartParams params(
        ds, 2 * static_cast<int>(ds),
        SymMatrix((Eigen::MatrixXd::Identity(ds, ds) / (2.0 * ds)).eval()));
    const struct {
      const char* id;
      SteinHaffFunction fn;
    } kinds[] = {{"identities/stein_haff_identity", SteinHaffFunction::kIdentity},
                 {"identities/stein_haff_constant", SteinHaffFunction::kConstant},
                 {"identities/stein_haff_square", SteinHaffFunction::kSquare}};
    for (const auto& kind : kinds) {
      Timer timer;
      const BoundReport report = stein_haff_check(
          kind.fn, 1.0, params, opt.trials * 10, row_seed(opt, kind.id));
      rows.push_back(make_row(kind.id, report, row_seed(opt, kind.id), timer.ms()));
    }
  }

  {
    Timer timer;
    const Eigen::Index ds = std::min<Eigen::Index>(d, 5);
    const MechanismSpec spec = MechanismSpec::Empirical(false);
    const DivergenceIdentityResult result = divergence_identity_check(
        spec, SymMatrix::Identity(ds), opt.n, std::max<std::int64_t>(opt.trials / 10, 50),
        1e-5, 10, row_seed(opt, "divergence_identity"));
    rows.push_back(make_row("identities/divergence_identity", result.report,
                            row_seed(opt, "divergence_identity"), timer.ms()));
  }

  if (2 * d > d + 3) {
    Timer timer;
    const WishartParams params(
        d, 2 * static_cast<int>(d),
        SymMatrix((Eigen::MatrixXd::Identity(d, d) / (2.0 * d)).eval()));
    const InvWishartMoments moments = inv_wishart_moments(params);
    const std::int64_t draws = std::max<std::int64_t>(opt.trials * 10, 10000);
    RngStream rng(row_seed(opt, "inv_wishart"), 0);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d, d);
    for (std::int64_t k = 0; k < draws; ++k) {
      RngStream draw_rng(row_seed(opt, "inv_wishart"), static_cast<std::uint64_t>(k + 1));
      const SymMatrix w = sample_wishart(params, draw_rng);
      const Eigen::MatrixXd wi = spd_inverse(w);
      s1 += wi;
      s2 += wi.cwiseProduct(wi);
    }
    const Eigen::MatrixXd mean = s1 / static_cast<double>(draws);
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const double var =
            s2(i, j) / static_cast<double>(draws) - mean(i, j) * mean(i, j);
        const double se = std::sqrt(std::max(var, 1e-30) / static_cast<double>(draws));
        worst_z = std::max(worst_z,
                           std::abs(mean(i, j) - moments.mean(i, j)) / se);
      }
    rows.push_back(make_row("identities/inv_wishart_mean_max_z",
                            McEstimate{worst_z, 0, draws, row_seed(opt, "inv_wishart")},
                            5.0, Direction::kLe, timer.ms()));
  }

  {
    Timer timer;
    const std::int64_t draws = std::max<std::int64_t>(opt.trials * 10, 10000);
    const NormalizedWishartPrior prior(d);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d, d);
    for (std::int64_t k = 0; k < draws; ++k) {
      RngStream rng(row_seed(opt, "normalized_wishart_mean"),
                    static_cast<std::uint64_t>(k));
      const SymMatrix sigma = sample_normalized_wishart(prior, rng);
      s1 += sigma.mat();
      s2 += sigma.mat().cwiseProduct(sigma.mat());
    }
    const Eigen::MatrixXd mean = s1 / static_cast<double>(draws);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const double var =
            s2(i, j) / static_cast<double>(draws) - mean(i, j) * mean(i, j);
        const double se = std::sqrt(std::max(var, 1e-30) / static_cast<double>(draws));
        worst_z = std::max(worst_z, std::abs(mean(i, j) - eye(i, j)) / se);
      }
    rows.push_back(make_row(
        "identities/normalized_wishart_mean_max_z",
        McEstimate{worst_z, 0, draws, row_seed(opt, "normalized_wishart_mean")},
        5.0, Direction::kLe, timer.ms()));
  }

  return rows;
}

// ---------------------------------------------------------------------------
// verify-tails

std::vector<ReportRow> run_verify_tails(const Options& opt) {
  std::vector<ReportRow> rows;
  const int d = static_cast<int>(opt.d);
  const std::int64_t draws = std::max<std::int64_t>(opt.trials * 100, 100000);

  for (const double x : {1.0, 2.0}) {
    Timer timer;
    const std::string id = "tails/chi2[x=" + format_double(x) + "]";
    const Chi2TailBound bound = chi2_tail_threshold(d, x);
    const std::uint64_t seed = row_seed(opt, id);
    std::int64_t exceed = 0;
    RngStream rng(seed, 0);
    for (std::int64_t k = 0; k < draws; ++k) {
      double z = 0.0;
      for (int i = 0; i < d; ++i) {
        const double g = rng.next_gaussian();
        z += g * g;
      }
      if (z >= bound.threshold) ++exceed;
    }
    const double freq = static_cast<double>(exceed) / static_cast<double>(draws);
    rows.push_back(make_row(
        id, McEstimate{freq, binomial_std_error(freq, draws), draws, seed},
        bound.bound, Direction::kLe, timer.ms()));
  }

  // Eigenvalue statistics of the normalized Wishart prior, one sweep.
  {
    const NormalizedWishartPrior prior(opt.d);
    const std::uint64_t seed = row_seed(opt, "tails/eigen");
    std::int64_t lmax_exceed = 0;
    std::vector<std::int64_t> pmin_exceed(2, 0);
    std::int64_t cond_exceed = 0;
    std::vector<double> inv_lmin;
    inv_lmin.reserve(draws);
    const double pmin_ts[2] = {2.0 * M_E, 8.0};
    const double cond_t = 1e4;
    Timer timer;
    for (std::int64_t k = 0; k < draws; ++k) {
      RngStream rng(seed, static_cast<std::uint64_t>(k));
      const SymMatrix sigma = sample_normalized_wishart(prior, rng);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.mat(),
                                                        Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      const double lmax = es.eigenvalues().maxCoeff();
      if (lmax >= 10.0) ++lmax_exceed;
      for (int i = 0; i < 2; ++i)
        if (1.0 / lmin >= pmin_ts[i]) ++pmin_exceed[i];
      if (lmax / lmin > cond_t) ++cond_exceed;
      inv_lmin.push_back(1.0 / lmin);
    }
    const std::int64_t wall = timer.ms();

    {
      const double freq =
          static_cast<double>(lmax_exceed) / static_cast<double>(draws);
      rows.push_back(make_row(
          "tails/lambda_max[t=10]",
          McEstimate{freq, binomial_std_error(freq, draws), draws, seed},
          wishart_eigen_tail_bounds(d, 10.0).pmax_bound, Direction::kLe, wall));
    }
    if (d >= 10) {
      for (int i = 0; i < 2; ++i) {
        const double freq =
            static_cast<double>(pmin_exceed[i]) / static_cast<double>(draws);
        rows.push_back(make_row(
            "tails/inv_lambda_min[t=" + format_double(pmin_ts[i]) + "]",
            McEstimate{freq, binomial_std_error(freq, draws), draws, seed},
            wishart_eigen_tail_bounds(d, pmin_ts[i]).pmin_bound, Direction::kLe,
            wall));
      }
      const McEstimate mean_inv = make_estimate(inv_lmin, seed);
      rows.push_back(make_row("tails/inv_lambda_min_mean", mean_inv,
                              wishart_eigen_tail_bounds(d, 1.0).inv_lmin_mean_bound,
                              Direction::kLe, wall));
    }
    {
      const double freq =
          static_cast<double>(cond_exceed) / static_cast<double>(draws);
      rows.push_back(make_row(
          "tails/cond_number[t=" + format_double(cond_t) + "]",
          McEstimate{freq, binomial_std_error(freq, draws), draws, seed},
          wishart_eigen_tail_bounds(d, cond_t).cond_bound, Direction::kLe, wall));
    }
  }

  // Tail of the statistic needs a spectrally capped mechanism.
  {
    Timer timer;
    Options projected = opt;
    projected.project = true;
    MechanismSpec spec = build_mechanism(projected);
    const std::uint64_t seed = row_seed(opt, "tails/statistic");
    const TailCheckResult result =
        tail_statistic_check(spec, SymMatrix::Identity(opt.d), opt.n,
                             std::max<std::int64_t>(opt.trials, 100),
                             {1.0, 4.0 / 3.0, 5.0 / 3.0}, seed);
    const std::int64_t wall = timer.ms();
    for (const auto& point : result.points) {
      rows.push_back(make_row(
          "tails/statistic[t=" + format_double(point.t) + "]",
          McEstimate{point.empirical, point.binom_se, result.samples, seed},
          point.bound, Direction::kLe, wall));
    }
    rows.push_back(make_row(
        "tails/statistic_per_sample_envelope",
        McEstimate{result.max_bound_ratio, 0, result.samples, seed}, 1.0,
        Direction::kLe, wall));
  }

  return rows;
}

// ---------------------------------------------------------------------------
// run-attack

std::vector<ReportRow> run_attack(const Options& opt) {
  std::vector<ReportRow> rows;
  const MechanismSpec spec = build_mechanism(opt);
  const NormalizedWishartPrior prior(opt.d);
  const double d = static_cast<double>(opt.d);

  {
    Timer timer;
    const std::uint64_t seed = row_seed(opt, "attack/out_of_sample");
    const McEstimate est =
        estimate_out_of_sample(spec, prior, opt.n, opt.trials, seed);
    rows.push_back(
        make_row("attack/out_of_sample_mean", est, 0.0, Direction::kEqWithin,
                 timer.ms()));
  }

  {
    Timer timer;
    const std::uint64_t seed = row_seed(opt, "attack/in_sample");
    const McEstimate est =
        estimate_in_sample_sum(spec, prior, opt.n, opt.trials, seed);
    if (spec.kind == MechanismKind::kEmpirical && !spec.project_output) {
      rows.push_back(make_row("attack/in_sample_sum", est, d * (d + 1) / 2,
                              Direction::kEqWithin, timer.ms()));
    } else if (spec.kind == MechanismKind::kConstant ||
               spec.kind == MechanismKind::kOracle) {
      rows.push_back(make_row("attack/in_sample_sum", est, 0.0,
                              Direction::kEqWithin, timer.ms()));
    } else if (spec.kind == MechanismKind::kGaussianDP && spec.project_output) {
      const McEstimate rhs = estimate_prior_upper_bound_rhs(
          spec, prior, opt.n, std::max<std::int64_t>(opt.trials / 8, 50), 16,
          row_seed(opt, "attack/in_sample_rhs"));
      McEstimate comparison{est.mean, std::hypot(est.std_error, rhs.std_error),
                            est.trials, seed};
      rows.push_back(make_row("attack/in_sample_sum_le_dp_bound", comparison,
                              rhs.mean, Direction::kLe, timer.ms()));
    } else if (opt.d >= 5) {
      // No closed-form target for this combination; the accuracy-based
      // Stein-Haff lower bound still applies.
      const HaffAccuracyResult haff = haff_accuracy_bound_check(
          spec, prior, opt.n, opt.trials, row_seed(opt, "attack/haff"));
      rows.push_back(make_row("attack/in_sample_sum_ge_haff_bound", haff.report,
                              row_seed(opt, "attack/haff"), timer.ms()));
    } else {
      std::cerr << "run-attack: no in-sample target for this mechanism at d < 5\n";
    }
  }

  if (spec.project_output) {
    Timer timer;
    const std::uint64_t seed = row_seed(opt, "attack/per_sample");
    const TailCheckResult result = tail_statistic_check(
        spec, SymMatrix::Identity(opt.d), opt.n,
        std::max<std::int64_t>(opt.trials / 2, 50), {1.0}, seed);
    rows.push_back(make_row(
        "attack/per_sample_envelope",
        McEstimate{result.max_bound_ratio, 0, result.samples, seed}, 1.0,
        Direction::kLe, timer.ms()));
  }

  return rows;
}

// ---------------------------------------------------------------------------
// lower-bound

std::vector<ReportRow> run_lower_bound(const Options& opt) {
  std::vector<ReportRow> rows;
  Options projected = opt;
  projected.project = true;
  const MechanismSpec spec = build_mechanism(projected);
  const std::uint64_t seed = row_seed(opt, "lower_bound");

  Timer timer;
  // Without an explicit --n, the sample count is found by bisection on the
  // measured alpha.
  const LowerBoundResult result = lower_bound_experiment(
      spec, opt.d, opt.n_given ? opt.n : 0, opt.trials, seed);
  const std::int64_t wall = timer.ms();
  std::cerr << "lower-bound: n=" << result.n_used
            << " alpha=" << result.error.alpha.mean
            << " reject_rate=" << result.error.reject_rate << "\n";

  rows.push_back(make_row("lower_bound/alpha_hypothesis", result.error.alpha,
                          result.alpha_hypothesis, Direction::kLe, wall));
  ReportRow dims = make_row(
      "lower_bound/dim_hypothesis",
      McEstimate{static_cast<double>(opt.d), 0, result.error.alpha.trials, seed},
      20.0, Direction::kGe, wall);
  rows.push_back(dims);
  if (result.report.status == CheckStatus::kOk) {
    rows.push_back(make_row("lower_bound/sum_ge_d2_over_4", result.report, seed,
                            wall));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// upper-bound and error-curve

std::vector<double> epsilon_grid(const Options& opt) {
  if (opt.epsilon_given) return {opt.epsilon};
  return {0.1, 0.3, 1.0};
}

std::vector<ReportRow> run_upper_bound(const Options& opt) {
  std::vector<ReportRow> rows;
  const double delta_cap =
      1.0 / (3.0 * static_cast<double>(opt.n) *
             std::log(M_E * static_cast<double>(opt.n)));
  const double delta_used = opt.delta_given ? opt.delta : delta_cap;
  const SymMatrix sigma = SymMatrix::Identity(opt.d);
  const std::vector<double> grid = epsilon_grid(opt);
  const std::uint64_t paired_seed = row_seed(opt, "upper_bound/paired");

  rows.push_back(make_row(
      "upper_bound/delta_hypothesis",
      McEstimate{delta_used, 0, opt.trials, row_seed(opt, "upper_bound/delta")},
      delta_cap, Direction::kLe, 0));

  std::vector<std::vector<double>> paired_samples;
  for (const double eps : grid) {
    Timer timer;
    const MechanismSpec spec = MechanismSpec::GaussianDP(
        eps, delta_used, true,
        opt.clip_radius > 0 ? std::optional<double>(opt.clip_radius)
                            : std::nullopt);
    const UpperBoundResult result =
        upper_bound_check(spec, sigma, opt.n, opt.trials,
                          mix_seed(row_seed(opt, "upper_bound"), fnv1a(format_double(eps))));
    rows.push_back(make_row("upper_bound/sum_le_rhs[eps=" + format_double(eps) + "]",
                            result.report, result.report.estimate.master_seed,
                            timer.ms()));
    // Common random numbers across the grid for the monotonicity rows.
    paired_samples.push_back(
        in_sample_sum_samples(spec, sigma, opt.n, opt.trials, paired_seed));
  }

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    // grid ascends in epsilon: the statistic sum must not decrease with eps.
    std::vector<double> diff(paired_samples[i].size());
    for (std::size_t t = 0; t < diff.size(); ++t)
      diff[t] = paired_samples[i][t] - paired_samples[i + 1][t];
    const McEstimate est = make_estimate(diff, paired_seed);
    rows.push_back(make_row("upper_bound/monotone[eps=" + format_double(grid[i]) +
                                "<=eps=" + format_double(grid[i + 1]) + "]",
                            est, 0.0, Direction::kLe, 0));
  }
  return rows;
}

std::vector<ReportRow> run_error_curve(const Options& opt) {
  std::vector<ReportRow> rows;
  if (opt.mechanism != "gaussian_dp")
    usage_error("mechanism: error-curve requires gaussian_dp");
  const NormalizedWishartPrior prior(opt.d);
  const std::vector<double> grid = epsilon_grid(opt);
  const std::uint64_t paired_seed = row_seed(opt, "error_curve/paired");
  const double cap = 20.0 * std::sqrt(static_cast<double>(opt.d));

  std::vector<std::vector<double>> kept_sq;
  for (const double eps : grid) {
    Timer timer;
    const MechanismSpec spec = MechanismSpec::GaussianDP(
        eps, opt.delta, true,
        opt.clip_radius > 0 ? std::optional<double>(opt.clip_radius)
                            : std::nullopt);
    const ErrorSamples samples =
        measure_error_samples(spec, prior, opt.n, opt.trials, paired_seed);
    std::vector<double> kept;
    for (std::size_t t = 0; t < samples.err_sq.size(); ++t)
      if (samples.in_w[t]) kept.push_back(samples.err_sq[t]);
    const McEstimate sq = make_estimate(kept, paired_seed);
    const double alpha = std::sqrt(std::max(sq.mean, 0.0));
    const McEstimate alpha_est{
        alpha, alpha > 0 ? sq.std_error / (2 * alpha) : 0.0, sq.trials,
        paired_seed};
    rows.push_back(make_row("error_curve/alpha[eps=" + format_double(eps) + "]",
                            alpha_est, cap, Direction::kLe, timer.ms()));
    kept_sq.push_back(std::move(kept));
  }

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    // Same prior draws and noise streams: error shrinks as eps grows.
    const std::size_t m = std::min(kept_sq[i].size(), kept_sq[i + 1].size());
    std::vector<double> diff(m);
    for (std::size_t t = 0; t < m; ++t)
      diff[t] = kept_sq[i + 1][t] - kept_sq[i][t];
    const McEstimate est = make_estimate(diff, paired_seed);
    rows.push_back(make_row("error_curve/alpha_sq_step[eps=" +
                                format_double(grid[i + 1]) + "<=eps=" +
                                format_double(grid[i]) + "]",
                            est, 0.0, Direction::kLe, 0));
  }
  return rows;
}

int write_report(const Options& opt, const std::vector<ReportRow>& rows) {
  const std::string body = opt.format == "csv" ? to_csv(rows) : to_json_lines(rows);
  if (opt.output == "-") {
    std::cout << body;
  } else {
    std::ofstream out(opt.output, std::ios::binary);
    if (!out) {
      std::cerr << "covaudit: cannot write " << opt.output << "\n";
      return 2;
    }
    out << body;
  }
  return all_satisfied(rows) ? 0 : 1;
}

void add_common_options(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "JSON config file; flags override");
  sub->add_option("--d", opt.d, "matrix dimension");
  sub->add_option("--n", opt.n, "samples per dataset")
      ->each([&opt](const std::string&) { opt.n_given = true; });
  sub->add_option("--trials", opt.trials, "Monte Carlo trials");
  sub->add_option("--mechanism", opt.mechanism,
                  "empirical|gaussian_dp|constant|oracle");
  sub->add_option("--epsilon", opt.epsilon, "DP epsilon")
      ->each([&opt](const std::string&) { opt.epsilon_given = true; });
  sub->add_option("--delta", opt.delta, "DP delta")
      ->each([&opt](const std::string&) { opt.delta_given = true; });
  sub->add_option("--clip-radius", opt.clip_radius,
                  "column clip radius (0 = default 2 sqrt(10 d))");
  sub->add_option("--constant-scale", opt.constant_scale,
                  "scale c for the constant mechanism c*I");
  sub->add_flag("--project", opt.project, "project outputs onto [0.09, 10]");
  sub->add_option("--seed", opt.seed, "master seed");
  sub->add_option("--output", opt.output, "report path, or - for stdout");
  sub->add_option("--format", opt.format, "csv|json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covaudit: seeded Monte Carlo audits of covariance-release "
               "mechanisms and the matrix-variate identities behind them"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env_seed = std::getenv("COVAUDIT_SEED")) {
    try {
      opt.seed = std::stoull(env_seed);
    } catch (...) {
      std::cerr << "covaudit: COVAUDIT_SEED is not an integer\n";
      return 2;
    }
  }

  // Config file values land between the environment and explicit flags.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    try {
      if (arg == "--config" && i + 1 < argc) {
        apply_config_file(argv[i + 1], opt);
      } else if (arg.rfind("--config=", 0) == 0) {
        apply_config_file(arg.substr(9), opt);
      }
    } catch (const CLI::Error& e) {
      std::cerr << "covaudit: " << e.what() << "\n";
      return 2;
    }
  }

  auto* identities = app.add_subcommand(
      "verify-identities", "score/Fisher/Stein-Haff/moment identity checks");
  auto* tails = app.add_subcommand(
      "verify-tails", "chi-squared, eigenvalue, and statistic tail dominance");
  auto* attack = app.add_subcommand(
      "run-attack", "in-sample and out-of-sample correlation statistics");
  auto* lower = app.add_subcommand("lower-bound",
                                   "d^2/4 statistic-sum lower-bound instance");
  auto* upper = app.add_subcommand("upper-bound",
                                   "fixed-Sigma DP upper-bound instance");
  auto* curve = app.add_subcommand("error-curve",
                                   "alpha vs epsilon for the DP mechanism");
  for (CLI::App* sub : {identities, tails, attack, lower, upper, curve})
    add_common_options(sub, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    validate_options(opt);
    std::vector<ReportRow> rows;
    if (identities->parsed()) rows = run_verify_identities(opt);
    else if (tails->parsed()) rows = run_verify_tails(opt);
    else if (attack->parsed()) rows = run_attack(opt);
    else if (lower->parsed()) rows = run_lower_bound(opt);
    else if (upper->parsed()) rows = run_upper_bound(opt);
    else if (curve->parsed()) rows = run_error_curve(opt);
    return write_report(opt, rows);
  } catch (const CLI::Error& e) {
    std::cerr << "covaudit: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "covaudit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "covaudit: error: " << e.what() << "\n";
    return 1;
  }
}
