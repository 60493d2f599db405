#include "nsbvar/ns_factors.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "nsbvar/error.hpp"

namespace nsbvar {

NsLoadings ns_loadings(double lambda, const Eigen::VectorXd& maturities) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError(fmt::format("lambda must be > 0, got {}", lambda));
  if (maturities.size() == 0 || !(maturities.array() > 0.0).all()) {
    throw ArgumentError("maturities must all be > 0");
  }
  return {lambda, maturities, ns_loading_matrix(lambda, maturities)};
}

NsLoadings ns_loadings(double lambda, const std::vector<int>& maturities) {
  Eigen::VectorXd tau(static_cast<Eigen::Index>(maturities.size()));
  for (std::size_t i = 0; i < maturities.size(); ++i) tau(static_cast<Eigen::Index>(i)) = maturities[i];
  return ns_loadings(lambda, tau);
}

namespace {

// d/dx of the curvature loading, multiplied by x^2 e^{x}: zero at the peak.
double stationarity(double x) { return (1.0 + x + x * x) - std::exp(x); }

}  // namespace

double curvature_peak_product() {
  static const double root = [] {
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2);
    auto [lo, hi] = boost::math::tools::toms748_solve(stationarity, 1.0, 3.0, tol, iters);
    if (iters >= 200) throw NumericError("curvature peak root-finder did not converge");
    const double x = 0.5 * (lo + hi);
    // Stationarity of the loading itself: g'(x) = -e^{-x} * stationarity(x) / x^2.
    if (std::abs(std::exp(-x) * stationarity(x) / (x * x)) > 1e-10) {
      throw NumericError("curvature peak residual exceeds 1e-10");
    }
    return x;
  }();
  return root;
}

double solve_lambda(double target_maturity) {
  if (!(target_maturity > 0.0) || !std::isfinite(target_maturity)) {
    throw ArgumentError(fmt::format("target maturity must be > 0, got {}", target_maturity));
  }
  return curvature_peak_product() / target_maturity;
}

void FactorSeries::validate() const {
  if (static_cast<Eigen::Index>(names.size()) != values.cols()) throw ArgumentError("factor names do not match columns");
  if (static_cast<Eigen::Index>(dates.size()) != values.rows()) throw ArgumentError("factor dates do not match rows");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) throw ArgumentError("factor dates must be strictly increasing");
  }
}

FactorSeries append_macro(const FactorSeries& base, const YieldPanel& panel) {
  if (panel.rows() != base.rows()) throw ArgumentError("append_macro: row counts differ");
  FactorSeries out = base;
  out.values.resize(base.rows(), base.cols() + panel.macro.cols());
  out.values << base.values, panel.macro;
  out.names.insert(out.names.end(), panel.macro_names.begin(), panel.macro_names.end());
  return out;
}

CrossSectionFit fit_cross_section(const YieldPanel& panel, double lambda) {
  if (panel.num_maturities() < 3) throw ArgumentError("cross-sectional fit needs at least 3 maturities");
  CrossSectionFit fit;
  fit.loadings = ns_loadings(lambda, panel.maturities);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fit.loadings.matrix);
  if (qr.rank() < 3) throw NumericError(fmt::format("loading matrix is rank deficient at lambda = {}", lambda));
  const Eigen::MatrixXd coef = qr.solve(panel.yields.transpose());  // 3 x T
  fit.factors.dates = panel.dates;
  fit.factors.names = {"L", "S", "C"};
  fit.factors.values = coef.transpose();
  fit.residuals = panel.yields - fit.factors.values * fit.loadings.matrix.transpose();
  return fit;
}

FactorSeries empirical_proxies(const YieldPanel& panel) {
  const auto i3 = panel.maturity_index(3);
  const auto i24 = panel.maturity_index(24);
  const auto i120 = panel.maturity_index(120);
  FactorSeries out;
  out.dates = panel.dates;
  out.names = {"level", "slope", "curvature"};
  out.values.resize(panel.rows(), 3);
  out.values.col(0) = panel.yields.col(i120);
  out.values.col(1) = panel.yields.col(i3) - panel.yields.col(i120);
  out.values.col(2) = 2.0 * panel.yields.col(i24) - panel.yields.col(i120) - panel.yields.col(i3);
  return out;
}

Eigen::MatrixXd PcaResult::reconstruct(const Eigen::MatrixXd& s) const {
  Eigen::MatrixXd x = s * components.transpose();
  x.array().rowwise() *= scales.transpose().array();
  x.rowwise() += means.transpose();
  return x;
}

PcaResult pca(const Eigen::MatrixXd& data, Eigen::Index k, bool standardize) {
  const Eigen::Index T = data.rows(), M = data.cols();
  if (k < 1 || k > std::min(T, M)) {
    throw ArgumentError(fmt::format("pca: component count {} outside [1, {}]", k, std::min(T, M)));
  }
  if (T < 2) throw ArgumentError("pca needs at least 2 rows");
  PcaResult r;
  r.means = data.colwise().mean();
  Eigen::MatrixXd x = data.rowwise() - r.means.transpose();
  r.scales = Eigen::VectorXd::Ones(M);
  if (standardize) {
    r.scales = (x.colwise().squaredNorm() / static_cast<double>(T - 1)).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < M; ++j) {
      if (r.scales(j) == 0.0) throw ArgumentError("pca: cannot standardize a constant column");
    }
    x.array().rowwise() /= r.scales.transpose().array();
  }
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(T - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  r.eigenvalues = es.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < M; ++j) {
    Eigen::Index imax = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&imax);
    if (vecs(imax, j) < 0.0) vecs.col(j) = -vecs.col(j);
  }
  r.components = vecs.leftCols(k);
  r.scores = x * r.components;
  const double total = r.eigenvalues.sum();
  r.explained = total > 0.0 ? Eigen::VectorXd(r.eigenvalues.head(k) / total) : Eigen::VectorXd::Zero(k);
  return r;
}

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ArgumentError("correlation: length mismatch");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

}  // namespace nsbvar
