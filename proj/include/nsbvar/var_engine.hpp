#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nsbvar/ns_factors.hpp"

namespace nsbvar {

// Coefficients are also handled in stacked "wide" form: an r x k matrix
// Phi = [a0'; A_1'; ...; A_p'] (the a0 row only when an intercept is present),
// so that f_t' = g_t' Phi with g_t = [1, f_{t-1}', ..., f_{t-p}'].

struct VarCoefficients {
  Eigen::VectorXd intercept;            // k (zeros when absent)
  std::vector<Eigen::MatrixXd> lags;    // A_1..A_p, each k x k
  bool has_intercept = true;

  Eigen::Index k() const { return intercept.size(); }
  int p() const { return static_cast<int>(lags.size()); }

  Eigen::MatrixXd phi() const;
  static VarCoefficients from_phi(const Eigen::Ref<const Eigen::MatrixXd>& phi, int p, bool has_intercept);
};

// Regressor count per equation.
inline Eigen::Index regressor_count(Eigen::Index k, int p, bool intercept) { return (intercept ? 1 : 0) + k * p; }

// Wide-form regression data from a T x k series: rows t = p..T-1 give
// F (T-p) x k and G (T-p) x r.
struct LaggedData {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
};
LaggedData lagged_regressors(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept);

// kp x kp companion matrix of the lag polynomial.
Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& lags);
// Psi_0..Psi_{H-1}: k x k blocks J C^h J'.
std::vector<Eigen::MatrixXd> ma_coefficients(const std::vector<Eigen::MatrixXd>& lags, int H);
Eigen::VectorXcd companion_eigenvalues(const std::vector<Eigen::MatrixXd>& lags);
double spectral_radius(const std::vector<Eigen::MatrixXd>& lags);

enum class CovarianceDenominator {
  DegreesOfFreedom,   // T_eff - r
  MaximumLikelihood,  // T_eff
};

struct VarModel {
  VarCoefficients coef;
  Eigen::MatrixXd sigma;      // k x k
  Eigen::MatrixXd residuals;  // (T - p) x k
  std::vector<std::string> names;

  int p() const { return coef.p(); }
  Eigen::Index k() const { return coef.k(); }
};

VarModel fit_var(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept = true,
                 CovarianceDenominator denom = CovarianceDenominator::DegreesOfFreedom);
VarModel fit_var(const FactorSeries& data, int p, bool intercept = true,
                 CovarianceDenominator denom = CovarianceDenominator::DegreesOfFreedom);

// AIC(p) = log det Sigma_ML(p) + 2 (k^2 p + k) / T_eff on the common sample
// rows p_max..T-1; returns the minimizing p in [1, p_max].
int select_lag_aic(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max);
std::vector<double> aic_values(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max);

struct PathForecast {
  Eigen::MatrixXd mean;                     // H x k; row h-1 is horizon h
  std::vector<Eigen::MatrixXd> covariance;  // H entries, k x k
  std::vector<double> levels;               // central coverage, e.g. 0.95
  std::vector<Eigen::MatrixXd> lower;       // per level, H x k
  std::vector<Eigen::MatrixXd> upper;

  int horizons() const { return static_cast<int>(mean.rows()); }
};

// Conditional-mean path from the last p observations (rows oldest..newest) and
// Gaussian bands mean +- z sqrt(diag Sigma_h).
PathForecast forecast_path(const VarCoefficients& coef, const Eigen::MatrixXd& sigma,
                           const Eigen::Ref<const Eigen::MatrixXd>& last_obs, int H,
                           const std::vector<double>& levels = {0.5, 0.8, 0.95});
PathForecast forecast_path(const VarModel& model, const Eigen::Ref<const Eigen::MatrixXd>& last_obs, int H,
                           const std::vector<double>& levels = {0.5, 0.8, 0.95});

// Two-sided standard normal quantile for central coverage `level`.
double normal_band_z(double level);

}  // namespace nsbvar
