#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/ns_factors.hpp"
#include "nsbvar/var_engine.hpp"

namespace nsbvar {

// The VAR(p) data in both stacked forms.
//
//   wide:  F = G Phi + U,      F (T x k), G (T x r), Phi (r x k)
//   long:  f = Omega a + eta,  f = vec(F'), a = vec(Phi), Omega_t = I_k (x) g_t'
//
// `a` is therefore ordered equation by equation: entries [i r, (i+1) r) are the
// coefficients of equation i in regressor order [1, f_{t-1}', ..., f_{t-p}'].
struct VarDesign {
  int p = 1;
  bool intercept = true;
  Eigen::Index k = 0;
  Eigen::Index r = 0;
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  Eigen::MatrixXd data;  // full T0 x k series the design was built from
  std::vector<std::string> names;

  Eigen::Index observations() const { return F.rows(); }
  Eigen::Index coefficient_count() const { return k * r; }
  Eigen::VectorXd f_long() const;        // vec(F')
  Eigen::MatrixXd omega_long() const;    // Tk x kr
  // Last p observations (oldest first), the forecast origin.
  Eigen::MatrixXd last_observations() const { return data.bottomRows(p); }
};

VarDesign build_design(const FactorSeries& data, int p, bool intercept = true);
VarDesign build_design(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept = true);
// A design over explicit F, G (e.g. no observations); `data` is left empty.
VarDesign design_from_matrices(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G, int p, bool intercept);

// Residual variance of a per-variable AR(1)-with-intercept OLS fit, SSE / (T - 3).
Eigen::VectorXd fit_ar1_residual_scales(const Eigen::Ref<const Eigen::MatrixXd>& data);

struct DiffusePrior {};

struct MinnesotaPrior {
  double persistence = 0.95;  // prior mean of own first lags
  double d1 = 0.001;          // own lags: d1 / l^2
  double d2 = 0.001;          // cross lags: d2 s_i^2 / (l^2 s_j^2)
  double d3 = 100.0;          // intercepts: d3 s_i^2
  Eigen::VectorXd sigma2;     // AR(1) residual variances; estimated when empty
};

struct NaturalConjugatePrior {
  Eigen::MatrixXd phi0;       // r x k prior mean; zero when empty
  double d1 = 0.03 * 0.03;    // lag l of variable j: d1 / (l^2 s_j^2)
  double d2 = 20.0 * 20.0;    // intercepts
  Eigen::VectorXd sigma_phi;  // diagonal of Sigma_Phi (r); built from d1, d2 when empty
  double s_h0 = -1.0;         // inverse-Wishart dof; k + k r when negative
  Eigen::MatrixXd S_c0;       // diag(s^2) when empty
  Eigen::VectorXd sigma2;
};

struct IndepNiwPrior {
  Eigen::VectorXd a0;         // kr prior mean; zero when empty
  double d1 = 0.03 * 0.03;
  double d2 = 0.04 * 0.04;
  double d3 = 20.0 * 20.0;
  double s_h0 = -1.0;
  Eigen::MatrixXd S_c0;
  Eigen::VectorXd sigma2;
};

struct SsvsPrior {
  double c0 = 0.01;           // spike sd = c0 * sd(unrestricted OLS coefficient)
  double c1 = 20.0;           // slab sd = c1 * sd(...)
  double inclusion = 0.2;     // prior P(gamma_i = 1)
  bool full = false;          // also select the off-diagonal precision factor
  double tau0 = 0.01;
  double tau1 = 10.0;
  double q = 0.2;             // prior P(delta_ij = 1)
  double gamma_shape = 0.01;  // psi_ii^2 ~ Gamma(shape, rate)
  double gamma_rate = 0.01;
  double s_h0 = -1.0;         // partial mode inverse-Wishart prior
  Eigen::MatrixXd S_c0;       // identity when empty
};

using PriorSpec = std::variant<DiffusePrior, MinnesotaPrior, NaturalConjugatePrior, IndepNiwPrior, SsvsPrior>;

std::string prior_name(const PriorSpec& prior);

struct PosteriorDraws {
  Eigen::Index k = 0;
  int p = 1;
  bool intercept = true;
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> phi;     // r x k per draw
  std::vector<Eigen::MatrixXd> sigma;   // k x k per draw
  std::vector<Eigen::VectorXi> gamma;   // SSVS coefficient indicators (kr)
  std::vector<Eigen::VectorXi> delta;   // full SSVS off-diagonal indicators (k(k-1)/2)
  std::size_t total = 0;
  std::size_t burned = 0;
  bool analytic = false;
  std::string prior;
  std::uint64_t seed = 0;

  std::size_t retained() const { return phi.size(); }
  Eigen::Index r() const { return regressor_count(k, p, intercept); }
  Eigen::MatrixXd phi_mean() const;
  Eigen::MatrixXd sigma_mean() const;
  Eigen::VectorXd inclusion_probability() const;  // mean of gamma draws
  VarCoefficients coefficients(std::size_t draw) const;
};

struct ChainOptions {
  std::size_t n_total = 11000;
  std::size_t n_burn = 1000;
  std::uint64_t seed = 1;
};

// Analytic normal posterior with Sigma fixed at diag(sigma2).
struct MinnesotaPosterior {
  Eigen::VectorXd a_prior;      // A_mp
  Eigen::VectorXd v_prior;      // diagonal of Sigma_mp
  Eigen::VectorXd a_hat;        // posterior mean (kr)
  Eigen::MatrixXd precision;    // Sigma_A (kr x kr)
  Eigen::MatrixXd sigma_fixed;  // k x k
};

enum class Representation { Wide, Long };

// kr prior variances in long-form order.
Eigen::VectorXd minnesota_prior_variance(Eigen::Index k, int p, bool intercept, const Eigen::VectorXd& sigma2,
                                         double d_own, double d_cross, double d_const);
Eigen::VectorXd minnesota_prior_mean(Eigen::Index k, int p, bool intercept, double persistence);

MinnesotaPosterior minnesota_posterior(const VarDesign& design, const MinnesotaPrior& prior,
                                       Representation rep = Representation::Wide);
PosteriorDraws sample_minnesota(const MinnesotaPosterior& post, const VarDesign& design, const ChainOptions& opt);

// (Phi, Sigma) ~ NIW^{-1}(phi_hat, V^{-1}, dof, S): Sigma ~ IW(dof, S) and
// vec(Phi) | Sigma ~ N(vec(phi_hat), Sigma (x) V^{-1}).
struct NiwPosterior {
  Eigen::MatrixXd phi_hat;  // r x k
  Eigen::MatrixXd V;        // r x r precision
  double dof = 0.0;
  Eigen::MatrixXd S;        // k x k
  // Standard inverse-Wishart mean S / (dof - k - 1).
  Eigen::MatrixXd sigma_mean() const;
};

Eigen::VectorXd conjugate_prior_variance(Eigen::Index k, int p, bool intercept, const Eigen::VectorXd& sigma2,
                                         double d_lag, double d_const);

NiwPosterior conjugate_posterior(const VarDesign& design, const NaturalConjugatePrior& prior);
NiwPosterior diffuse_posterior(const VarDesign& design);
PosteriorDraws sample_niw(const NiwPosterior& post, const VarDesign& design, const ChainOptions& opt,
                          const std::string& prior_label);

PosteriorDraws gibbs_indep_niw(const VarDesign& design, const IndepNiwPrior& prior, const ChainOptions& opt);
PosteriorDraws gibbs_ssvs(const VarDesign& design, const SsvsPrior& prior, const ChainOptions& opt);

// Dispatches on the prior; analytic priors are sampled with the same options.
PosteriorDraws estimate(const VarDesign& design, const PriorSpec& prior, const ChainOptions& opt);

struct PredictOptions {
  int horizons = 1;
  std::vector<double> quantiles = {0.05, 0.5, 0.95};
  std::uint64_t seed = 1;
  bool stable_only = false;  // drop draws with an explosive companion matrix
  bool keep_paths = false;
};

struct PredictiveDistribution {
  std::vector<std::string> names;
  Eigen::MatrixXd mean;                       // H x k
  Eigen::MatrixXd sd;                         // H x k
  std::vector<double> quantile_levels;
  std::vector<Eigen::MatrixXd> quantiles;     // per level, H x k
  std::vector<Eigen::MatrixXd> covariance;    // per horizon, k x k
  std::vector<Eigen::MatrixXd> paths;         // per used draw, H x k (keep_paths)
  std::optional<double> log_predictive_likelihood;
  std::size_t draws_used = 0;
};

// Composition sampling of H-step paths from `origin` (last p rows, oldest first).
// When `realized` is given, the log predictive likelihood of the next observation is
// log mean_d N(realized; mu_d, Sigma_d).
PredictiveDistribution predict(const PosteriorDraws& draws, const Eigen::Ref<const Eigen::MatrixXd>& origin,
                               const PredictOptions& opt,
                               const std::optional<Eigen::VectorXd>& realized = std::nullopt);

struct YieldForecast {
  std::vector<int> maturities;
  Eigen::MatrixXd mean;  // H x M
  Eigen::MatrixXd sd;    // H x M (zero when no covariance is supplied)
};

// Lambda * factor mean; variance diag(Lambda Sigma_f Lambda') when covariances are given.
YieldForecast reconstruct_yields(const Eigen::MatrixXd& factor_mean, const std::vector<Eigen::MatrixXd>& factor_cov,
                                 const NsLoadings& loadings);
YieldForecast reconstruct_yields(const PredictiveDistribution& pred, const NsLoadings& loadings);
// Transforms each stored path and summarizes.
YieldForecast reconstruct_yields_from_paths(const std::vector<Eigen::MatrixXd>& paths, const NsLoadings& loadings);

// Plain-text draw store: '#' header lines (prior, seed, counts, shape) followed by
// one CSV row per draw: index, vec(Phi) (column-major), vec(Sigma) (column-major).
void write_draws(std::ostream& out, const PosteriorDraws& draws, const std::string& config_hash = "");
PosteriorDraws read_draws(std::istream& in);

}  // namespace nsbvar
