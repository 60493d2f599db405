#include "nsbvar/var_engine.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "nsbvar/error.hpp"

namespace nsbvar {

Eigen::MatrixXd VarCoefficients::phi() const {
  const Eigen::Index kk = k();
  const int pp = p();
  const Eigen::Index off = has_intercept ? 1 : 0;
  Eigen::MatrixXd out(off + kk * pp, kk);
  if (has_intercept) out.row(0) = intercept.transpose();
  for (int l = 0; l < pp; ++l) out.middleRows(off + l * kk, kk) = lags[l].transpose();
  return out;
}

VarCoefficients VarCoefficients::from_phi(const Eigen::Ref<const Eigen::MatrixXd>& phi, int p, bool has_intercept) {
  VarCoefficients c;
  const Eigen::Index kk = phi.cols();
  const Eigen::Index off = has_intercept ? 1 : 0;
  if (phi.rows() != off + kk * p) {
    throw ArgumentError(fmt::format("coefficient matrix has {} rows, expected {}", phi.rows(), off + kk * p));
  }
  c.has_intercept = has_intercept;
  c.intercept = has_intercept ? Eigen::VectorXd(phi.row(0).transpose()) : Eigen::VectorXd::Zero(kk);
  for (int l = 0; l < p; ++l) c.lags.push_back(phi.middleRows(off + l * kk, kk).transpose());
  return c;
}

LaggedData lagged_regressors(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept) {
  const Eigen::Index T = data.rows(), k = data.cols();
  if (p < 1) throw ArgumentError("lag order must be >= 1");
  if (T <= p) throw ArgumentError(fmt::format("need more than p = {} observations, have {}", p, T));
  const Eigen::Index n = T - p;
  const Eigen::Index off = intercept ? 1 : 0;
  LaggedData d;
  d.F = data.bottomRows(n);
  d.G.resize(n, off + k * p);
  if (intercept) d.G.col(0).setOnes();
  for (int l = 1; l <= p; ++l) d.G.middleCols(off + (l - 1) * k, k) = data.middleRows(p - l, n);
  return d;
}

Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& lags) {
  const int p = static_cast<int>(lags.size());
  if (p == 0) throw ArgumentError("companion matrix needs at least one lag");
  const Eigen::Index k = lags[0].rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k * p, k * p);
  for (int l = 0; l < p; ++l) c.block(0, l * k, k, k) = lags[l];
  if (p > 1) c.bottomLeftCorner(k * (p - 1), k * (p - 1)).setIdentity();
  return c;
}

std::vector<Eigen::MatrixXd> ma_coefficients(const std::vector<Eigen::MatrixXd>& lags, int H) {
  const Eigen::MatrixXd c = companion_matrix(lags);
  const Eigen::Index k = lags[0].rows();
  std::vector<Eigen::MatrixXd> psi;
  psi.reserve(static_cast<std::size_t>(H));
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(c.rows(), c.cols());
  for (int h = 0; h < H; ++h) {
    psi.emplace_back(power.topLeftCorner(k, k));
    power = c * power;
  }
  return psi;
}

Eigen::VectorXcd companion_eigenvalues(const std::vector<Eigen::MatrixXd>& lags) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(lags), false);
  return es.eigenvalues();
}

double spectral_radius(const std::vector<Eigen::MatrixXd>& lags) {
  return companion_eigenvalues(lags).cwiseAbs().maxCoeff();
}

namespace {

VarModel fit_var_impl(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept,
                      CovarianceDenominator denom) {
  const Eigen::Index k = data.cols();
  const Eigen::Index r = regressor_count(k, p, intercept);
  if (data.rows() - p <= k * p + 1) {
    throw ArgumentError(fmt::format("VAR({}) with k = {} needs T - p > kp + 1; T = {}", p, k, data.rows()));
  }
  const LaggedData d = lagged_regressors(data, p, intercept);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.G);
  if (qr.rank() < r) throw NumericError("VAR regressor cross-product is singular");
  const Eigen::MatrixXd phi = qr.solve(d.F);
  VarModel m;
  m.coef = VarCoefficients::from_phi(phi, p, intercept);
  m.residuals = d.F - d.G * phi;
  const Eigen::Index n = d.F.rows();
  const double denom_value =
      denom == CovarianceDenominator::MaximumLikelihood ? static_cast<double>(n) : static_cast<double>(n - r);
  m.sigma = m.residuals.transpose() * m.residuals / denom_value;
  m.sigma = 0.5 * (m.sigma + m.sigma.transpose()).eval();
  return m;
}

}  // namespace

VarModel fit_var(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept, CovarianceDenominator denom) {
  VarModel m = fit_var_impl(data, p, intercept, denom);
  for (Eigen::Index j = 0; j < data.cols(); ++j) m.names.push_back("y" + std::to_string(j + 1));
  return m;
}

VarModel fit_var(const FactorSeries& data, int p, bool intercept, CovarianceDenominator denom) {
  VarModel m = fit_var_impl(data.values, p, intercept, denom);
  m.names = data.names;
  return m;
}

std::vector<double> aic_values(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max) {
  if (p_max < 1) throw ArgumentError("p_max must be >= 1");
  const Eigen::Index T = data.rows(), k = data.cols();
  const Eigen::Index t_eff = T - p_max;
  std::vector<double> aic;
  for (int p = 1; p <= p_max; ++p) {
    // Common sample: observations p_max..T-1 with p lags each.
    const Eigen::MatrixXd window = data.bottomRows(t_eff + p);
    const VarModel m = fit_var_impl(window, p, true, CovarianceDenominator::MaximumLikelihood);
    const Eigen::LLT<Eigen::MatrixXd> llt(m.sigma);
    double logdet = -std::numeric_limits<double>::infinity();
    if (llt.info() == Eigen::Success) logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    aic.push_back(logdet + 2.0 * static_cast<double>(k * k * p + k) / static_cast<double>(t_eff));
  }
  return aic;
}

int select_lag_aic(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max) {
  const auto aic = aic_values(data, p_max);
  int best = 1;
  for (int p = 2; p <= p_max; ++p) {
    if (aic[p - 1] < aic[best - 1]) best = p;
  }
  return best;
}

double normal_band_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError(fmt::format("band level must lie in (0,1), got {}", level));
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

PathForecast forecast_path(const VarCoefficients& coef, const Eigen::MatrixXd& sigma,
                           const Eigen::Ref<const Eigen::MatrixXd>& last_obs, int H,
                           const std::vector<double>& levels) {
  if (H < 1) throw ArgumentError("forecast horizon must be >= 1");
  const int p = coef.p();
  const Eigen::Index k = coef.k();
  if (last_obs.rows() != p || last_obs.cols() != k) {
    throw ArgumentError(fmt::format("forecast origin must be {} x {}", p, k));
  }
  PathForecast out;
  out.mean.resize(H, k);
  // history(0) is the most recent observation.
  std::vector<Eigen::VectorXd> history;
  for (int l = 0; l < p; ++l) history.emplace_back(last_obs.row(p - 1 - l).transpose());
  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd next = coef.intercept;
    for (int l = 0; l < p; ++l) next.noalias() += coef.lags[l] * history[l];
    out.mean.row(h) = next.transpose();
    history.insert(history.begin(), next);
    history.pop_back();
  }
  const auto psi = ma_coefficients(coef.lags, H);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  for (int h = 0; h < H; ++h) {
    acc.noalias() += psi[h] * sigma * psi[h].transpose();
    out.covariance.emplace_back(0.5 * (acc + acc.transpose()));
  }
  out.levels = levels;
  for (double level : levels) {
    const double z = normal_band_z(level);
    Eigen::MatrixXd sd(H, k);
    for (int h = 0; h < H; ++h) sd.row(h) = out.covariance[h].diagonal().cwiseMax(0.0).cwiseSqrt().transpose();
    out.lower.emplace_back(out.mean - z * sd);
    out.upper.emplace_back(out.mean + z * sd);
  }
  return out;
}

PathForecast forecast_path(const VarModel& model, const Eigen::Ref<const Eigen::MatrixXd>& last_obs, int H,
                           const std::vector<double>& levels) {
  return forecast_path(model.coef, model.sigma, last_obs, H, levels);
}

}  // namespace nsbvar
