#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/bvar.hpp"
#include "nsbvar/random.hpp"

namespace nsbvar {

// responses[d][h](i, j): response of variable i at horizon h to a unit structural
// shock j, for retained draw d. Horizon 0 is the impact matrix.
struct IrfResult {
  std::vector<std::string> names;
  int horizons = 0;
  std::vector<std::vector<Eigen::MatrixXd>> responses;
  std::vector<double> band_levels;                    // e.g. {0.05, 0.5, 0.95}
  std::vector<std::vector<Eigen::MatrixXd>> bands;    // [level][h], k x k
  int identified_shock = -1;                          // sign restrictions: the one shock that is identified
  std::size_t skipped = 0;                            // draws dropped (non-PD Sigma or no accepted rotation)
  std::size_t tries = 0;
  std::size_t accepted = 0;

  double acceptance_rate() const { return tries ? static_cast<double>(accepted) / static_cast<double>(tries) : 0.0; }
  const std::vector<Eigen::MatrixXd>& band(double level) const;
};

// Pointwise quantiles over draws.
void summarize_irf(IrfResult& irf, const std::vector<double>& levels);

// Psi_h Z for h = 0..H-1 with Z the lower Cholesky factor of Sigma.
std::vector<Eigen::MatrixXd> impulse_responses(const VarCoefficients& coef, const Eigen::MatrixXd& impact, int H);

IrfResult irf_recursive(const PosteriorDraws& draws, int H, const std::vector<double>& levels = {0.05, 0.5, 0.95});

// Dummy observations for a VAR(p) with regressors ordered [y_{t-1}', ..., y_{t-p}', 1].
struct DummyHyper {
  int p = 2;
  double f = 0.95;             // overall tightness
  double c = 0.95;             // intercept dummy
  double theta = 12.0 * 0.95;  // sum-of-coefficients weight
  Eigen::VectorXd m;           // first-lag prior means; ones when empty
  std::vector<double> sum_weights;  // lag weights of the sum-of-coefficients block; ones when empty
};

struct DummyObs {
  Eigen::MatrixXd Y_d1, X_d1, Y_d2, X_d2;
  Eigen::MatrixXd Y() const;  // [Y_d1; Y_d2]
  Eigen::MatrixXd X() const;  // [X_d1; X_d2]
};

// sigma: per-variable AR residual sds; mu: sample means.
DummyObs build_dummy_obs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& mu, const DummyHyper& hyper);
// sigma from AR(1) residual sds and mu from column means of `data`.
DummyObs build_dummy_obs(const Eigen::Ref<const Eigen::MatrixXd>& data, const DummyHyper& hyper);

struct DummyPosterior {
  Eigen::MatrixXd theta;   // Theta_a, (np + 1) x n, rows [A_1'; ...; A_p'; alpha']
  Eigen::MatrixXd sigma;   // Sigma_a
  Eigen::MatrixXd xtx;     // X_a' X_a
  double dof = 0.0;        // T_d + T
  int p = 2;
};

// Regression data with the intercept column last: Y (T-p) x n, X (T-p) x (np+1).
void dummy_regressors(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, Eigen::MatrixXd& Y, Eigen::MatrixXd& X);

DummyPosterior dummy_posterior(const Eigen::Ref<const Eigen::MatrixXd>& data, const DummyObs& dummies, int p);

// Draws Sigma ~ IW(T_d + T, Sigma_a) and vec(Theta) | Sigma ~ N(vec(Theta_a), Sigma (x) (X_a'X_a)^{-1}).
// Stored Phi uses the canonical intercept-first order.
PosteriorDraws gibbs_dummy_bvar(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<std::string>& names,
                                const DummyObs& dummies, int p, const ChainOptions& opt);

struct SignRestriction {
  int shock = 0;                  // row of the candidate Omega carrying the shock
  std::vector<int> signs;         // per variable: +1, -1 or 0 (unrestricted)
  std::vector<int> horizons{0};   // horizons the signs must hold at

  void validate(Eigen::Index k, bool require_constraint) const;
};

// "effr" and "effr:+,unrate:+,pce:-" against the variable names.
SignRestriction parse_sign_restriction(const std::string& shock, const std::string& constraints,
                                       const std::vector<std::string>& names, const std::vector<int>& horizons = {0});

// Orthonormal Q from the QR factorization of a standard-normal k x k matrix,
// columns flipped so that R has a positive diagonal.
Eigen::MatrixXd random_rotation(Rng& rng, Eigen::Index k);

struct SignOptions {
  int horizons = 24;
  int max_tries = 1000;
  std::uint64_t seed = 1;
  std::vector<double> levels = {0.16, 0.5, 0.84};
};

// Sigma = Omega0' Omega0 with Omega0 upper triangular; candidate Omega = Q Omega0,
// rows are shocks, so the impact matrix is Omega'. A draw is kept with the first
// candidate that satisfies every restriction.
IrfResult sign_restricted_irf(const PosteriorDraws& draws, const SignRestriction& restriction, const SignOptions& opt);

}  // namespace nsbvar
