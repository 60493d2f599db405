#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "nsbvar/bvar.hpp"
#include "nsbvar/error.hpp"

using namespace nsbvar;

namespace {

Eigen::MatrixXd simulated_data(std::uint64_t seed, Eigen::Index T = 200) {
  Eigen::Matrix2d A;
  A << 0.6, 0.2, -0.1, 0.5;
  Eigen::Matrix2d S;
  S << 1.0, 0.3, 0.3, 0.5;
  return testing::simulate_var(Eigen::Vector2d(0.5, -0.2), {A}, S, T, seed);
}

// Posterior mean of the long coefficient vector under N(a0, diag(v)) with Sigma fixed,
// assembled observation by observation.
Eigen::VectorXd gls_oracle(const VarDesign& d, const Eigen::MatrixXd& sigma, const Eigen::VectorXd& a0,
                           const Eigen::VectorXd& v) {
  const Eigen::Index n = d.k * d.r;
  Eigen::MatrixXd P = v.cwiseInverse().asDiagonal();
  Eigen::VectorXd b = a0.cwiseQuotient(v);
  const Eigen::MatrixXd sinv = sigma.inverse();
  for (Eigen::Index t = 0; t < d.observations(); ++t) {
    Eigen::MatrixXd Xt = Eigen::MatrixXd::Zero(d.k, n);
    for (Eigen::Index i = 0; i < d.k; ++i) Xt.block(i, i * d.r, 1, d.r) = d.G.row(t);
    P += Xt.transpose() * sinv * Xt;
    b += Xt.transpose() * sinv * d.F.row(t).transpose();
  }
  return P.ldlt().solve(b);
}

}  // namespace

TEST_CASE("design layouts") {
  const Eigen::MatrixXd y = simulated_data(31, 20);
  const VarDesign d = build_design(y, 2, true);
  CHECK(d.observations() == 18);
  CHECK(d.r == 5);
  CHECK(d.coefficient_count() == 10);
  CHECK(d.last_observations() == y.bottomRows(2));
  // Long and wide forms describe the same regression.
  nsbvar::Rng rng = make_stream(31, 1);
  const Eigen::MatrixXd phi = testing::random_matrix(rng, d.r, d.k);
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
  const Eigen::MatrixXd wide = d.G * phi;
  const Eigen::VectorXd lng = d.omega_long() * a;
  const Eigen::MatrixXd wide_t = wide.transpose();
  CHECK((lng - Eigen::Map<const Eigen::VectorXd>(wide_t.data(), wide_t.size())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.f_long()(1) == d.F(0, 1));
  CHECK_THROWS_AS(build_design(y.topRows(2), 2), ArgumentError);
  CHECK_THROWS_AS(design_from_matrices(d.F, d.G.leftCols(3), 2, true), ArgumentError);
}

TEST_CASE("AR(1) residual scales") {
  const Eigen::MatrixXd y = simulated_data(32, 50);
  const Eigen::VectorXd s = fit_ar1_residual_scales(y);
  for (Eigen::Index j = 0; j < 2; ++j) {
    Eigen::MatrixXd X(49, 2);
    X.col(0).setOnes();
    X.col(1) = y.col(j).head(49);
    const Eigen::VectorXd b = (X.transpose() * X).inverse() * X.transpose() * y.col(j).tail(49);
    CHECK(s(j) == doctest::Approx((y.col(j).tail(49) - X * b).squaredNorm() / 47.0).epsilon(1e-10));
  }
}

TEST_CASE("Minnesota prior moments") {
  const Eigen::VectorXd s2 = Eigen::Vector2d(1.0, 4.0);
  const Eigen::VectorXd a = minnesota_prior_mean(2, 2, true, 0.95);
  const Eigen::VectorXd v = minnesota_prior_variance(2, 2, true, s2, 0.1, 0.2, 100.0);
  REQUIRE(a.size() == 10);
  // Equation 0: [c, y1(-1), y2(-1), y1(-2), y2(-2)].
  CHECK(a(1) == 0.95);
  CHECK(a(7) == 0.95);
  CHECK(a.sum() == doctest::Approx(1.9));
  CHECK(v(0) == doctest::Approx(100.0));
  CHECK(v(1) == doctest::Approx(0.1));
  CHECK(v(2) == doctest::Approx(0.2 * 1.0 / 4.0));
  CHECK(v(3) == doctest::Approx(0.1 / 4.0));
  CHECK(v(5) == doctest::Approx(400.0));
  CHECK(v(6) == doctest::Approx(0.2 * 4.0 / 1.0));
  CHECK(v(9) == doctest::Approx(0.1 / 4.0));
}

TEST_CASE("Minnesota posterior equals the GLS oracle in both representations") {
  const VarDesign d = build_design(simulated_data(33, 80), 2);
  MinnesotaPrior prior;
  prior.d1 = 0.05;
  prior.d2 = 0.01;
  const auto wide = minnesota_posterior(d, prior, Representation::Wide);
  const auto lng = minnesota_posterior(d, prior, Representation::Long);
  const Eigen::VectorXd oracle = gls_oracle(d, wide.sigma_fixed, wide.a_prior, wide.v_prior);
  CHECK((wide.a_hat - oracle).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((lng.a_hat - oracle).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((wide.precision - lng.precision).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((wide.sigma_fixed.diagonal() - fit_ar1_residual_scales(d.data)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Minnesota limits") {
  const VarDesign d = build_design(simulated_data(34, 120), 1);
  MinnesotaPrior tight;
  tight.d1 = tight.d2 = tight.d3 = 1e-14;
  const auto t = minnesota_posterior(d, tight);
  CHECK((t.a_hat - t.a_prior).cwiseAbs().maxCoeff() < 1e-6);

  MinnesotaPrior loose;
  loose.d1 = loose.d2 = loose.d3 = 1e12;
  loose.sigma2 = Eigen::Vector2d(1.0, 1.0);
  const auto l = minnesota_posterior(d, loose);
  const Eigen::MatrixXd ols = (d.G.transpose() * d.G).ldlt().solve(d.G.transpose() * d.F);
  const Eigen::VectorXd ols_long = Eigen::Map<const Eigen::VectorXd>(ols.data(), ols.size());
  CHECK((l.a_hat - ols_long).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Minnesota sampler") {
  const VarDesign d = build_design(simulated_data(35, 100), 1);
  const auto post = minnesota_posterior(d, MinnesotaPrior{});
  ChainOptions opt;
  opt.n_total = 4000;
  opt.n_burn = 0;
  opt.seed = 9;
  const auto draws = sample_minnesota(post, d, opt);
  CHECK(draws.retained() == 4000);
  CHECK(draws.analytic);
  CHECK(draws.burned == 0);
  const Eigen::MatrixXd m = draws.phi_mean();
  const Eigen::VectorXd ml = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  const Eigen::VectorXd sd = post.precision.inverse().diagonal().cwiseSqrt();
  CHECK(((ml - post.a_hat).cwiseQuotient(sd)).cwiseAbs().maxCoeff() < 0.1);
  CHECK((draws.sigma_mean() - post.sigma_fixed).cwiseAbs().maxCoeff() < 1e-12);
  const auto again = sample_minnesota(post, d, opt);
  CHECK(again.phi.back() == draws.phi.back());
}

TEST_CASE("conjugate posterior matches the closed form") {
  const VarDesign d = build_design(simulated_data(36, 60), 2);
  NaturalConjugatePrior prior;
  nsbvar::Rng rng = make_stream(36, 1);
  prior.phi0 = 0.1 * testing::random_matrix(rng, d.r, d.k);
  const auto post = conjugate_posterior(d, prior);

  const Eigen::VectorXd s2 = fit_ar1_residual_scales(d.data);
  const Eigen::VectorXd v = conjugate_prior_variance(d.k, d.p, true, s2, prior.d1, prior.d2);
  const Eigen::MatrixXd P0 = v.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd V = P0 + d.G.transpose() * d.G;
  const Eigen::MatrixXd phi_hat = V.inverse() * (P0 * prior.phi0 + d.G.transpose() * d.F);
  const Eigen::MatrixXd S = Eigen::MatrixXd(s2.asDiagonal()) + d.F.transpose() * d.F +
                            prior.phi0.transpose() * P0 * prior.phi0 - phi_hat.transpose() * V * phi_hat;
  CHECK((post.phi_hat - phi_hat).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((post.V - V).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((post.S - S).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(post.dof == static_cast<double>(d.k + d.k * d.r + d.observations()));
  CHECK(v(0) == prior.d2);
  CHECK(v(3) == doctest::Approx(prior.d1 / (4.0 * s2(0))));
}

TEST_CASE("diffuse posterior is OLS") {
  const VarDesign d = build_design(simulated_data(37, 90), 1);
  const auto post = diffuse_posterior(d);
  const VarModel m = fit_var(d.data, 1);
  CHECK((post.phi_hat - m.coef.phi()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((post.S - m.residuals.transpose() * m.residuals).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(post.dof == 89.0 - 3.0);
}

TEST_CASE("inverse-Wishart sampler mean") {
  nsbvar::Rng rng = make_stream(38, 0);
  Eigen::Matrix2d S;
  S << 2.0, 0.5, 0.5, 1.0;
  const double dof = 9.0;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 20000;
  for (int i = 0; i < n; ++i) acc += draw_inverse_wishart(rng, dof, S);
  CHECK(((acc / n) - S / (dof - 3.0)).cwiseAbs().maxCoeff() < 0.02);
  CHECK_THROWS_AS(draw_inverse_wishart(rng, 0.5, S), ArgumentError);
}

TEST_CASE("NIW sampler is centred on the posterior") {
  const VarDesign d = build_design(simulated_data(39, 150), 1);
  const auto post = conjugate_posterior(d, NaturalConjugatePrior{});
  ChainOptions opt;
  opt.n_total = 5000;
  opt.n_burn = 0;
  const auto draws = sample_niw(post, d, opt, "conjugate");
  CHECK((draws.phi_mean() - post.phi_hat).cwiseAbs().maxCoeff() < 0.02);
  CHECK((draws.sigma_mean() - post.sigma_mean()).cwiseAbs().maxCoeff() < 0.03);
  for (const auto& s : draws.sigma) CHECK(Eigen::LLT<Eigen::MatrixXd>(s).info() == Eigen::Success);
}

TEST_CASE("independent NIW Gibbs recovers the data-generating process") {
  const VarDesign d = build_design(simulated_data(40, 400), 1);
  IndepNiwPrior prior;
  prior.d1 = prior.d2 = prior.d3 = 1e4;
  ChainOptions opt;
  opt.n_total = 3000;
  opt.n_burn = 500;
  const auto draws = gibbs_indep_niw(d, prior, opt);
  CHECK(draws.retained() == 2500);
  CHECK(draws.total == 3000);
  CHECK(draws.burned == 500);
  CHECK_FALSE(draws.analytic);
  const VarModel ols = fit_var(d.data, 1);
  CHECK((draws.phi_mean() - ols.coef.phi()).cwiseAbs().maxCoeff() < 0.03);
  CHECK(draws.coefficients(0).lags.size() == 1);
}

TEST_CASE("estimate dispatch and validation") {
  const VarDesign d = build_design(simulated_data(41, 60), 1);
  ChainOptions opt;
  opt.n_total = 50;
  opt.n_burn = 10;
  CHECK(estimate(d, DiffusePrior{}, opt).prior == "diffuse");
  CHECK(estimate(d, MinnesotaPrior{}, opt).retained() == 40);
  CHECK(prior_name(SsvsPrior{}) == "ssvs_partial");
  SsvsPrior full;
  full.full = true;
  CHECK(prior_name(full) == "ssvs_full");
  opt.n_burn = 50;
  CHECK_THROWS_AS(estimate(d, MinnesotaPrior{}, opt), ArgumentError);
  opt.n_burn = 10;
  MinnesotaPrior bad;
  bad.d1 = -1.0;
  CHECK_THROWS_AS(estimate(d, bad, opt), ArgumentError);
  NaturalConjugatePrior c;
  c.s_h0 = 0.5;
  CHECK_THROWS_AS(estimate(d, c, opt), ArgumentError);
}
