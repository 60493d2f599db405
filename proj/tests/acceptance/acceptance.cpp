// Acceptance harness: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [--known-failure N]... [--only N]...
//
// Exit status is 0 when every FAIL is listed as a known failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "helpers.hpp"
#include "nsbvar/bvar.hpp"
#include "nsbvar/data_io.hpp"
#include "nsbvar/ns_factors.hpp"
#include "nsbvar/state_space.hpp"
#include "nsbvar/structural.hpp"
#include "nsbvar/var_engine.hpp"

namespace fs = std::filesystem;
using namespace nsbvar;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// 1 --------------------------------------------------------------------------
Outcome lambda_targets() {
  const double l30 = solve_lambda(30.0), l2858 = solve_lambda(28.58);
  const bool ok30 = std::abs(l30 - 0.0598) <= 5e-4;
  const bool ok2858 = std::abs(l2858 - 0.0609) <= 5e-4;
  return pass_if(ok30 && ok2858,
                 fmt::format("solve_lambda(30) = {:.6f} (target 0.0598 {}), solve_lambda(28.58) = {:.6f} "
                             "(target 0.0609 {}); lambda 0.0609 peaks at {:.3f} months",
                             l30, ok30 ? "ok" : "MISS", l2858, ok2858 ? "ok" : "MISS",
                             curvature_peak_product() / 0.0609));
}

// 2, 3 -----------------------------------------------------------------------
const char* reference_csv() { return std::getenv("NSBVAR_REFERENCE_CSV"); }

YieldPanel reference_panel() { return load_panel(reference_csv(), PanelSchema{}); }

Outcome reference_pca() {
  if (!reference_csv()) return {Status::Skip, "NSBVAR_REFERENCE_CSV not set"};
  const YieldPanel panel = reference_panel();
  const PcaResult p = pca(panel.yields, 3);
  const auto it = std::find(panel.maturities.begin(), panel.maturities.end(), 120);
  if (it == panel.maturities.end()) return {Status::Fail, "reference data has no 120-month yield"};
  const CrossSectionFit fit = fit_cross_section(panel, 0.0609);
  const double rho = correlation(panel.yields.col(it - panel.maturities.begin()), fit.factors.values.col(0));
  return pass_if(std::abs(p.explained(0) - 0.95493) <= 0.02 && rho >= 0.95,
                 fmt::format("PC1 share {:.5f} (0.95493 +- 0.02), corr(10y, level) {:.4f} (>= 0.95)", p.explained(0), rho));
}

Outcome reference_var() {
  if (!reference_csv()) return {Status::Skip, "NSBVAR_REFERENCE_CSV not set"};
  const YieldPanel panel = reference_panel();
  const auto split = split_panel(panel, 0.85);
  const VarModel m = fit_var(fit_cross_section(split.train, 0.0609).factors, 1);
  const Eigen::Vector3d target(0.9955, 0.9095, 0.9185);
  const Eigen::Vector3d diag = m.coef.lags[0].diagonal();
  return pass_if((diag - target).cwiseAbs().maxCoeff() <= 0.05,
                 fmt::format("diag(A1) = ({:.4f}, {:.4f}, {:.4f}) vs (0.9955, 0.9095, 0.9185) +- 0.05", diag(0), diag(1),
                             diag(2)));
}

// 4 --------------------------------------------------------------------------
Outcome kalman_oracle() {
  Rng rng = make_stream(404, 0);
  double worst_ll = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 0.9 * (2.0 * std::uniform_real_distribution<>()(rng) - 1.0));
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, 0.2 + std::uniform_real_distribution<>()(rng));
    const Eigen::MatrixXd H = testing::random_matrix(rng, 2, 1);
    const Eigen::MatrixXd R = 0.5 * testing::random_spd(rng, 2);
    const Eigen::MatrixXd y = testing::random_matrix(rng, 4, 2);
    const Eigen::VectorXd m0 = testing::random_matrix(rng, 1, 1);
    const Eigen::MatrixXd P0 = Eigen::MatrixXd::Constant(1, 1, 0.5 + std::uniform_real_distribution<>()(rng));
    const auto oracle = testing::joint_gaussian_oracle(A, Q, H, R, y, m0, P0);
    const LinearGaussianSsm<double> m{A, Q, H, R};
    const auto f = kalman_filter<double>(m, y, m0, P0);
    const auto s = kalman_smoother<double>(f, A);
    worst_ll = std::max(worst_ll, std::abs(f.log_likelihood - oracle.log_density));
    for (int t = 0; t < 4; ++t) worst_mean = std::max(worst_mean, max_abs(s.state[t] - oracle.mean[t]));
  }
  return pass_if(worst_ll <= 1e-8 && worst_mean <= 1e-8,
                 fmt::format("20 systems: max |loglik - oracle| = {:.2e}, max |smoothed mean - oracle| = {:.2e} (1e-8)",
                             worst_ll, worst_mean));
}

// 5 --------------------------------------------------------------------------
Outcome minnesota_limits() {
  Eigen::Matrix2d A;
  A << 0.6, 0.15, -0.1, 0.7;
  const Eigen::MatrixXd y = testing::simulate_var(Eigen::Vector2d(0.2, -0.1), {A}, Eigen::Matrix2d::Identity(), 80, 505);
  const VarDesign d = build_design(y, 1);
  MinnesotaPrior dogmatic;
  dogmatic.d1 = dogmatic.d2 = dogmatic.d3 = 1e-14;
  const auto dp = minnesota_posterior(d, dogmatic);
  const double dog_err = max_abs(dp.a_hat - dp.a_prior);

  MinnesotaPrior flat;
  flat.d1 = flat.d2 = flat.d3 = 1e12;
  flat.sigma2 = Eigen::Vector2d(0.7, 1.3);
  // GLS with Sigma = diag(sigma2), accumulated observation by observation without a prior.
  const Eigen::Index n = d.k * d.r;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd sinv = flat.sigma2.cwiseInverse().asDiagonal();
  for (Eigen::Index t = 0; t < d.observations(); ++t) {
    Eigen::MatrixXd Xt = Eigen::MatrixXd::Zero(d.k, n);
    for (Eigen::Index i = 0; i < d.k; ++i) Xt.block(i, i * d.r, 1, d.r) = d.G.row(t);
    P += Xt.transpose() * sinv * Xt;
    b += Xt.transpose() * sinv * d.F.row(t).transpose();
  }
  const Eigen::VectorXd gls = P.ldlt().solve(b);
  const double wide_err = max_abs(minnesota_posterior(d, flat, Representation::Wide).a_hat - gls);
  const double long_err = max_abs(minnesota_posterior(d, flat, Representation::Long).a_hat - gls);
  return pass_if(dog_err <= 1e-6 && wide_err <= 1e-8 && long_err <= 1e-8,
                 fmt::format("dogmatic |a - A_mp| = {:.2e} (1e-6); diffuse |a - GLS| wide {:.2e}, long {:.2e} (1e-8)",
                             dog_err, wide_err, long_err));
}

// 6 --------------------------------------------------------------------------
Outcome quadratic_completion() {
  Rng rng = make_stream(606, 0);
  double worst = 0.0, worst_const = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(i % 3);
    const int p = 1 + (i % 2);
    const Eigen::Index r = regressor_count(k, p, true);
    const Eigen::Index T = r + 3 + (i % 5);
    const Eigen::MatrixXd F = testing::random_matrix(rng, T, k);
    Eigen::MatrixXd G = testing::random_matrix(rng, T, r);
    G.col(0).setOnes();
    const VarDesign d = design_from_matrices(F, G, p, true);
    NaturalConjugatePrior prior;
    prior.sigma2 = Eigen::VectorXd::Constant(k, 1.0);
    prior.phi0 = testing::random_matrix(rng, r, k);
    prior.sigma_phi = (testing::random_matrix(rng, r, 1).array().square() + 0.5).matrix();
    prior.S_c0 = testing::random_spd(rng, k);
    const NiwPosterior post = conjugate_posterior(d, prior);
    const Eigen::MatrixXd prec = prior.sigma_phi.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd phi = testing::random_matrix(rng, r, k);
    const Eigen::MatrixXd e0 = phi - prior.phi0, e = F - G * phi, eh = phi - post.phi_hat;
    const Eigen::MatrixXd lhs = e0.transpose() * prec * e0 + e.transpose() * e;
    const Eigen::MatrixXd rhs = eh.transpose() * post.V * eh - post.phi_hat.transpose() * post.V * post.phi_hat +
                                prior.phi0.transpose() * prec * prior.phi0 + F.transpose() * F;
    worst = std::max(worst, max_abs(lhs - rhs));
    // The completed constant is the posterior scale less the prior scale.
    worst_const = std::max(worst_const, max_abs(lhs - eh.transpose() * post.V * eh - (post.S - prior.S_c0)));
  }
  return pass_if(worst <= 1e-10 && worst_const <= 1e-10,
                 fmt::format("100 instances: max |lhs - rhs| = {:.2e}, max |constant - (S_c - S_c0)| = {:.2e} (1e-10)",
                             worst, worst_const));
}

// 7 --------------------------------------------------------------------------
Outcome indep_niw_coverage() {
  Eigen::Matrix2d A;
  A << 0.7, 0.1, 0.0, 0.5;
  Eigen::Matrix2d S;
  S << 1.0, 0.3, 0.3, 0.5;
  const Eigen::Vector2d c(0.3, -0.2);
  const Eigen::MatrixXd y = testing::simulate_var(c, {A}, S, 200, 707);
  const VarDesign d = build_design(y, 1);
  Eigen::MatrixXd truth(3, 2);
  truth << c.transpose(), A.transpose();
  IndepNiwPrior prior;
  prior.d1 = prior.d2 = prior.d3 = 1e6;
  int covered = 0;
  double worst_z = 0.0;
  for (int run = 0; run < 100; ++run) {
    ChainOptions opt;
    opt.n_total = 11000;
    opt.n_burn = 1000;
    opt.seed = 7000 + static_cast<std::uint64_t>(run);
    const PosteriorDraws draws = gibbs_indep_niw(d, prior, opt);
    const Eigen::MatrixXd mean = draws.phi_mean();
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(3, 2);
    for (const auto& phi : draws.phi) var += (phi - mean).array().square().matrix();
    var /= static_cast<double>(draws.retained() - 1);
    const double z = ((mean - truth).array().abs() / var.array().sqrt()).maxCoeff();
    worst_z = std::max(worst_z, z);
    if (z <= 3.0) ++covered;
  }
  return pass_if(covered >= 95, fmt::format("{} of 100 runs cover all 6 coefficients within 3 posterior sds "
                                            "(need 95); largest |z| = {:.2f}",
                                            covered, worst_z));
}

// 8 --------------------------------------------------------------------------
Outcome ssvs_selection() {
  Eigen::Matrix2d A;
  A << 0.5, 0.0, 0.3, 0.6;
  const Eigen::MatrixXd y = testing::simulate_var(Eigen::Vector2d::Zero(), {A}, Eigen::Matrix2d::Identity(), 500, 808);
  const VarDesign d = build_design(y, 1, false);
  ChainOptions opt;
  opt.n_total = 11000;
  opt.n_burn = 1000;
  bool ok = true;
  std::string detail;
  for (bool full : {false, true}) {
    SsvsPrior prior;
    prior.full = full;
    const Eigen::VectorXd inc = gibbs_ssvs(d, prior, opt).inclusion_probability();
    // Long order: (a00, a01, a10, a11); a01 is the zero.
    ok = ok && inc(0) > 0.5 && inc(1) < 0.5 && inc(2) > 0.5 && inc(3) > 0.5;
    detail += fmt::format("{}{}: P(incl) = ({:.3f}, {:.3f}, {:.3f}, {:.3f})", full ? "; " : "", full ? "full" : "partial",
                          inc(0), inc(1), inc(2), inc(3));
  }
  return pass_if(ok, detail + " with the zero second");
}

// 9 --------------------------------------------------------------------------
Outcome irf_oracle() {
  Rng rng = make_stream(909, 0);
  VarCoefficients c;
  c.intercept = testing::random_matrix(rng, 2, 1);
  c.lags = {0.5 * testing::random_matrix(rng, 2, 2)};
  const Eigen::MatrixXd sigma = testing::random_spd(rng, 2);
  PosteriorDraws draws;
  draws.k = 2;
  draws.p = 1;
  draws.names = {"a", "b"};
  draws.phi = {c.phi()};
  draws.sigma = {sigma};
  const int H = 20;
  const IrfResult irf = irf_recursive(draws, H);
  const Eigen::MatrixXd Z = sigma.llt().matrixL();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < 2; ++j) {
    // Shocked minus unshocked deterministic paths from the same history.
    Eigen::VectorXd base = Eigen::Vector2d(1.0, -1.0), shocked = base;
    for (int h = 0; h < H; ++h) {
      base = c.intercept + c.lags[0] * base;
      shocked = c.intercept + c.lags[0] * shocked + (h == 0 ? Eigen::VectorXd(Z.col(j)) : Eigen::VectorXd::Zero(2));
      worst = std::max(worst, max_abs(irf.responses[0][h].col(j) - (shocked - base)));
    }
  }
  VarCoefficients s;
  s.intercept = Eigen::VectorXd::Zero(1);
  s.lags = {Eigen::MatrixXd::Constant(1, 1, 0.93)};
  const auto scalar = impulse_responses(s, Eigen::MatrixXd::Identity(1, 1), H);
  double worst_scalar = 0.0;
  for (int h = 0; h < H; ++h) worst_scalar = std::max(worst_scalar, std::abs(scalar[h](0, 0) - std::pow(0.93, h)));
  return pass_if(worst <= 1e-10 && worst_scalar <= 1e-12,
                 fmt::format("k=2 VAR(1): max |irf - simulated difference| = {:.2e} (1e-10); scalar |irf - a^h| = {:.2e}",
                             worst, worst_scalar));
}

// 10 -------------------------------------------------------------------------
Outcome sign_restrictions() {
  Rng rng = make_stream(1010, 0);
  double worst_q = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index k = 2 + i % 4;
    const Eigen::MatrixXd Q = random_rotation(rng, k);
    worst_q = std::max(worst_q, max_abs(Q.transpose() * Q - Eigen::MatrixXd::Identity(k, k)));
  }

  // Omega' Omega = Sigma for accepted candidates of a k=3 system.
  PosteriorDraws draws;
  draws.k = 3;
  draws.p = 1;
  draws.names = {"a", "b", "c"};
  for (int i = 0; i < 200; ++i) {
    VarCoefficients c;
    c.intercept = Eigen::VectorXd::Zero(3);
    c.lags = {0.4 * testing::random_matrix(rng, 3, 3)};
    draws.phi.push_back(c.phi());
    draws.sigma.push_back(testing::random_spd(rng, 3));
  }
  SignRestriction r;
  r.shock = 2;
  r.signs = {1, 0, 1};
  SignOptions opt;
  opt.horizons = 4;
  const IrfResult irf = sign_restricted_irf(draws, r, opt);
  double worst_sigma = 0.0;
  std::size_t d = 0;
  for (std::size_t i = 0; i < irf.responses.size(); ++i) {
    const Eigen::MatrixXd& impact = irf.responses[i][0];  // Omega'
    // Skipped draws are not stored, so match the Sigma by reconstruction error over all draws.
    double best = 1e300;
    for (; d < draws.sigma.size(); ++d) {
      best = max_abs(impact * impact.transpose() - draws.sigma[d]);
      if (best < 1e-6) break;
    }
    ++d;
    worst_sigma = std::max(worst_sigma, best);
  }

  // "Shock 2 raises variable 2" with Sigma = I, one candidate per draw: 10,000 tries.
  PosteriorDraws white;
  white.k = 2;
  white.p = 1;
  white.names = {"x", "y"};
  VarCoefficients w;
  w.intercept = Eigen::VectorXd::Zero(2);
  w.lags = {Eigen::MatrixXd::Zero(2, 2)};
  white.phi.assign(10000, w.phi());
  white.sigma.assign(10000, Eigen::MatrixXd::Identity(2, 2));
  SignRestriction r2;
  r2.shock = 1;
  r2.signs = {0, 1};
  SignOptions o2;
  o2.horizons = 1;
  o2.max_tries = 1;
  o2.seed = 2024;
  const IrfResult half = sign_restricted_irf(white, r2, o2);
  bool all_positive = true;
  for (const auto& resp : half.responses) all_positive = all_positive && resp[0](1, 1) > 0.0;
  const double rate = half.acceptance_rate();
  return pass_if(worst_q <= 1e-12 && worst_sigma <= 1e-10 && all_positive && std::abs(rate - 0.5) <= 0.02 &&
                     half.tries == 10000,
                 fmt::format("max |Q'Q - I| = {:.2e} (1e-12); max |Omega'Omega - Sigma| = {:.2e} over {} accepted (1e-10); "
                             "acceptance {}/{} = {:.4f} (0.5 +- 0.02), omega_22 > 0 in all accepted: {}",
                             worst_q, worst_sigma, irf.responses.size(), half.accepted, half.tries, rate,
                             all_positive ? "yes" : "no"));
}

// 11 -------------------------------------------------------------------------
Outcome dummy_oracle() {
  Eigen::Matrix2d A1, A2;
  A1 << 0.6, 0.1, 0.05, 0.5;
  A2 << 0.2, 0.0, 0.0, 0.3;
  const Eigen::MatrixXd y =
      testing::simulate_var(Eigen::Vector2d(0.5, 0.3), {A1, A2}, 0.1 * Eigen::Matrix2d::Identity(), 40, 1111);
  const Eigen::VectorXd sigma = fit_ar1_residual_scales(y).cwiseSqrt();
  const Eigen::VectorXd mu = y.colwise().mean().transpose();
  const double f = 0.95, c = 0.95, theta = 12.0 * 0.95;
  const Eigen::Vector2d m(1.0, 0.8);
  double worst = 0.0;
  for (const std::vector<double>& weights : {std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}}) {
    // Blocks assembled from the Kronecker-product formulas.
    const Eigen::Matrix2d Ds = sigma.asDiagonal(), Dm = (m.cwiseProduct(sigma)).asDiagonal();
    const Eigen::Matrix2d Dmu = (m.cwiseProduct(mu)).asDiagonal();
    Eigen::MatrixXd Yd1 = Eigen::MatrixXd::Zero(7, 2), Xd1 = Eigen::MatrixXd::Zero(7, 5);
    Yd1.topRows(2) = Dm / f;
    Yd1.middleRows(4, 2) = Ds;
    Eigen::Matrix2d D = Eigen::Vector2d(1.0, 2.0).asDiagonal();
    Eigen::MatrixXd kron(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) kron.block(2 * i, 2 * j, 2, 2) = D(i, j) * Ds;
    Xd1.topLeftCorner(4, 4) = kron / f;
    Xd1(6, 4) = c;
    Eigen::MatrixXd Yd2 = Dmu / theta, Xd2 = Eigen::MatrixXd::Zero(2, 5);
    Xd2.leftCols(2) = weights[0] * Dmu / theta;
    Xd2.middleCols(2, 2) = weights[1] * Dmu / theta;
    Eigen::MatrixXd Y(38, 2), X(38, 5);
    for (int t = 0; t < 38; ++t) {
      Y.row(t) = y.row(t + 2);
      X.row(t) << y.row(t + 1), y.row(t), 1.0;
    }
    Eigen::MatrixXd Ya(47, 2), Xa(47, 5);
    Ya << Y, Yd1, Yd2;
    Xa << X, Xd1, Xd2;
    const Eigen::MatrixXd oracle = (Xa.transpose() * Xa).ldlt().solve(Xa.transpose() * Ya);

    DummyHyper h;
    h.p = 2;
    h.f = f;
    h.c = c;
    h.theta = theta;
    h.m = m;
    h.sum_weights = weights;
    const DummyPosterior post = dummy_posterior(y, build_dummy_obs(sigma, mu, h), 2);
    worst = std::max(worst, max_abs(post.theta - oracle));
  }
  return pass_if(worst <= 1e-8,
                 fmt::format("max |Theta_a - augmented OLS| = {:.2e} (1e-8), lag weights (1,1) and (1,2)", worst));
}

// 12 -------------------------------------------------------------------------
Outcome forecast_recursion() {
  Rng rng = make_stream(1212, 0);
  double worst = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index k = 2 + trial % 3;
    const int p = 1 + trial % 4;
    VarCoefficients c;
    c.intercept = testing::random_matrix(rng, k, 1);
    for (int l = 0; l < p; ++l) c.lags.push_back((0.5 / p) * testing::random_matrix(rng, k, k));
    const Eigen::MatrixXd origin = testing::random_matrix(rng, p, k);
    const PathForecast pf = forecast_path(c, Eigen::MatrixXd::Identity(k, k), origin, 24);
    const Eigen::MatrixXd C = companion_matrix(c.lags);
    Eigen::VectorXd state(k * p), shift = Eigen::VectorXd::Zero(k * p);
    for (int l = 0; l < p; ++l) state.segment(l * k, k) = origin.row(p - 1 - l).transpose();
    shift.head(k) = c.intercept;
    for (int h = 0; h < 24; ++h) {
      state = shift + C * state;
      const double err = max_abs(pf.mean.row(h).transpose() - state.head(k));
      worst = std::max(worst, err);
      worst_rel = std::max(worst_rel, err / std::max(1.0, max_abs(state.head(k))));
    }
  }
  VarCoefficients rw;
  rw.intercept = Eigen::VectorXd::Zero(3);
  rw.lags = {Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  const Eigen::MatrixXd origin = (Eigen::MatrixXd(2, 3) << 9, 9, 9, 1.25, -3.5, 7.0).finished();
  const PathForecast flat = forecast_path(rw, Eigen::MatrixXd::Identity(3, 3), origin, 36);
  bool constant = true;
  for (int h = 0; h < 36; ++h) constant = constant && flat.mean.row(h) == origin.row(1);
  return pass_if(worst_rel <= 1e-12 && constant,
                 fmt::format("50 VAR(p) systems, 24 steps: max |path - companion| = {:.2e} (relative {:.2e}, 1e-12); "
                             "A = I gives a constant path: {}",
                             worst, worst_rel, constant ? "yes" : "no"));
}

// 13 -------------------------------------------------------------------------
int run_cli(const std::string& args) {
  const std::string cmd = std::string(NSBVAR_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const std::vector<std::string> commands{"describe", "fit-two-step", "fit-pca", "fit-kalman",
                                          "bvar",     "irf",          "sign-irf", "evaluate"};
  const fs::path root = fs::path(NSBVAR_SCRATCH) / "determinism";
  fs::remove_all(root);
  const std::string config = std::string(NSBVAR_FIXTURES) + "/run.cfg";
  std::size_t files = 0;
  std::vector<std::string> problems;
  for (const auto& cmd : commands) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / fmt::format("{}_{}", cmd, rep);
      const int rc = run_cli(fmt::format("{} -c {} -o {} --seed 42", cmd, config, dir.string()));
      if (rc != 0) problems.push_back(fmt::format("{} exited {}", cmd, rc));
      dirs.push_back(dir);
    }
    if (!fs::exists(dirs[0])) continue;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      ++files;
      if (!fs::exists(dirs[1] / name) || slurp(dirs[0] / name) != slurp(dirs[1] / name)) {
        problems.push_back(fmt::format("{}/{} differs", cmd, name));
      }
    }
    std::size_t second = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dirs[1])) ++second;
    if (second != names.size()) problems.push_back(fmt::format("{} file sets differ", cmd));
  }
  std::string detail = fmt::format("{} commands, {} output files compared byte for byte", commands.size(), files);
  for (const auto& p : problems) detail += "; " + p;
  return pass_if(problems.empty() && files > 0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--known-failure" || a == "--only") && i + 1 < argc) {
      (a == "--only" ? only : known).insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-failure N]... [--only N]...\n");
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "decay rate for a given curvature peak", 1, lambda_targets},
      {2, "PCA share and level correlation on reference data", 5, reference_pca},
      {3, "two-step VAR(1) diagonal on reference data", 5, reference_var},
      {4, "Kalman filter/smoother vs stacked Gaussian", 1, kalman_oracle},
      {5, "Minnesota dogmatic and diffuse limits", 1, minnesota_limits},
      {6, "conjugate quadratic completion", 1, quadratic_completion},
      {7, "independent NIW Gibbs coverage", 120, indep_niw_coverage},
      {8, "SSVS inclusion probabilities", 60, ssvs_selection},
      {9, "recursive IRF vs simulation differencing", 1, irf_oracle},
      {10, "sign-restriction rotations", 10, sign_restrictions},
      {11, "dummy-observation posterior vs augmented OLS", 1, dummy_oracle},
      {12, "path forecast vs companion recursion", 1, forecast_recursion},
      {13, "CLI byte-for-byte determinism", 300, cli_determinism},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status != Status::Skip && secs > c.limit_seconds) {
      o.status = Status::Fail;
      o.detail += fmt::format("; runtime limit exceeded");
    }
    const char* label = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::string note;
    if (o.status == Status::Fail && known.count(c.id)) note = " [known failure]";
    else if (o.status == Status::Fail) ++unexpected;
    std::printf("%s %2d  %s: %s [%.2f s, limit %g s]%s\n", label, c.id, c.name.c_str(), o.detail.c_str(), secs,
                c.limit_seconds, note.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
