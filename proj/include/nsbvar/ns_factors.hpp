#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/data_io.hpp"

namespace nsbvar {

// Slope loading (1 - e^{-x}) / x at x = lambda * tau.
template <typename Scalar>
Scalar ns_slope_loading(Scalar x) {
  using std::exp;
  using std::expm1;
  if (x < Scalar(1e-6)) return Scalar(1) - x / Scalar(2) + x * x / Scalar(6);
  return -expm1(-x) / x;
}

// Curvature loading (1 - e^{-x}) / x - e^{-x} at x = lambda * tau.
template <typename Scalar>
Scalar ns_curvature_loading(Scalar x) {
  using std::exp;
  if (x < Scalar(1e-6)) return x / Scalar(2) - x * x / Scalar(3);
  return ns_slope_loading(x) - exp(-x);
}

// M x 3 Nelson-Siegel loading matrix with columns [1, slope, curvature].
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 3> ns_loading_matrix(Scalar lambda, const Eigen::MatrixBase<Derived>& tau) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> out(tau.size(), 3);
  for (Eigen::Index m = 0; m < tau.size(); ++m) {
    const Scalar x = lambda * Scalar(tau(m));
    out(m, 0) = Scalar(1);
    out(m, 1) = ns_slope_loading(x);
    out(m, 2) = ns_curvature_loading(x);
  }
  return out;
}

struct NsLoadings {
  double lambda = 0.0;
  Eigen::VectorXd maturities;
  Eigen::MatrixXd matrix;  // M x 3
};

NsLoadings ns_loadings(double lambda, const Eigen::VectorXd& maturities);
NsLoadings ns_loadings(double lambda, const std::vector<int>& maturities);

// x* = lambda * tau at which the curvature loading peaks (~1.79328).
double curvature_peak_product();

// Decay rate whose curvature loading peaks at `target_maturity` months.
double solve_lambda(double target_maturity);

struct FactorSeries {
  std::vector<MonthStamp> dates;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // T x k

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  void validate() const;
};

// Factors `base` followed by the panel's macro columns (same dates).
FactorSeries append_macro(const FactorSeries& base, const YieldPanel& panel);

struct CrossSectionFit {
  NsLoadings loadings;
  FactorSeries factors;       // L, S, C
  Eigen::MatrixXd residuals;  // T x M, y_t - Lambda f_t
};

// Per-date least squares of the yields on the loading matrix.
CrossSectionFit fit_cross_section(const YieldPanel& panel, double lambda);

// level = y(120), slope = y(3) - y(120), curvature = 2 y(24) - y(120) - y(3).
FactorSeries empirical_proxies(const YieldPanel& panel);

struct PcaResult {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;       // all ones unless standardized
  Eigen::MatrixXd components;   // M x k, orthonormal columns
  Eigen::MatrixXd scores;       // T x k
  Eigen::VectorXd explained;    // k proportions of total variance
  Eigen::VectorXd eigenvalues;  // all M eigenvalues, descending

  // Data reconstructed from the retained components, T x M.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores) const;
};

// Eigendecomposition of the sample covariance of the demeaned columns. Each
// component is signed so that its largest-magnitude entry is positive.
PcaResult pca(const Eigen::MatrixXd& data, Eigen::Index k, bool standardize = false);

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace nsbvar
