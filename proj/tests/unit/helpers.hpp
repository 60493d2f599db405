#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/data_io.hpp"
#include "nsbvar/random.hpp"

namespace testing {

// T x k draws of y_t = a0 + sum_l A_l y_{t-l} + chol(sigma) z_t after a burn-in.
inline Eigen::MatrixXd simulate_var(const Eigen::VectorXd& a0, const std::vector<Eigen::MatrixXd>& lags,
                                    const Eigen::MatrixXd& sigma, Eigen::Index T, std::uint64_t seed,
                                    Eigen::Index burn = 200) {
  const Eigen::Index k = a0.size();
  const int p = static_cast<int>(lags.size());
  nsbvar::Rng rng = nsbvar::make_stream(seed, 0);
  const Eigen::MatrixXd L = sigma.isZero(0.0) ? Eigen::MatrixXd::Zero(k, k) : Eigen::MatrixXd(sigma.llt().matrixL());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T + burn + p, k);
  for (Eigen::Index t = p; t < y.rows(); ++t) {
    Eigen::VectorXd v = a0 + L * nsbvar::standard_normal(rng, k, 1);
    for (int l = 0; l < p; ++l) v += lags[l] * y.row(t - 1 - l).transpose();
    y.row(t) = v.transpose();
  }
  return y.bottomRows(T);
}

inline Eigen::MatrixXd random_matrix(nsbvar::Rng& rng, Eigen::Index r, Eigen::Index c) {
  return nsbvar::standard_normal(rng, r, c);
}

inline Eigen::MatrixXd random_spd(nsbvar::Rng& rng, Eigen::Index k) {
  const Eigen::MatrixXd a = nsbvar::standard_normal(rng, k, k);
  return a * a.transpose() + static_cast<double>(k) * Eigen::MatrixXd::Identity(k, k);
}

inline nsbvar::YieldPanel panel_from_csv(const std::string& text, const nsbvar::PanelSchema& schema = {}) {
  std::istringstream in(text);
  return nsbvar::read_panel(in, schema, "test");
}

inline nsbvar::YieldPanel make_panel(const Eigen::MatrixXd& yields, const std::vector<int>& maturities,
                                     nsbvar::MonthStamp start = {2000, 1}) {
  nsbvar::YieldPanel p;
  p.maturities = maturities;
  p.yields = yields;
  p.macro.resize(yields.rows(), 0);
  nsbvar::MonthStamp d = start;
  for (Eigen::Index t = 0; t < yields.rows(); ++t, d = d.next()) p.dates.push_back(d);
  return p;
}

// Exact moments of a linear Gaussian state space by stacking every primitive
// shock z = (x_0, eta_1..eta_T, eps_1..eps_T) and conditioning the joint normal.
struct JointGaussianOracle {
  double log_density = 0.0;                // log p(y_1..y_T)
  std::vector<Eigen::VectorXd> mean;       // E[x_t | y_1..y_T]
  std::vector<Eigen::MatrixXd> cov;        // Cov[x_t | y_1..y_T]
};

inline JointGaussianOracle joint_gaussian_oracle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                                 const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                                                 const Eigen::MatrixXd& y, const Eigen::VectorXd& m0,
                                                 const Eigen::MatrixXd& P0) {
  const Eigen::Index T = y.rows(), M = y.cols(), n = A.rows();
  const Eigen::Index nz = n + T * n + T * M;
  Eigen::MatrixXd cz = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::VectorXd mz = Eigen::VectorXd::Zero(nz);
  cz.topLeftCorner(n, n) = P0;
  mz.head(n) = m0;
  for (Eigen::Index t = 0; t < T; ++t) {
    cz.block(n + t * n, n + t * n, n, n) = Q;
    cz.block(n + T * n + t * M, n + T * n + t * M, M, M) = R;
  }
  // X = Bx z, Y = By z.
  Eigen::MatrixXd Bx = Eigen::MatrixXd::Zero(T * n, nz), By = Eigen::MatrixXd::Zero(T * M, nz);
  Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(n, nz);
  prev.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::MatrixXd cur = A * prev;
    cur.block(0, n + t * n, n, n) += Eigen::MatrixXd::Identity(n, n);
    Bx.middleRows(t * n, n) = cur;
    By.middleRows(t * M, M) = H * cur;
    By.block(t * M, n + T * n + t * M, M, M) += Eigen::MatrixXd::Identity(M, M);
    prev = cur;
  }
  const Eigen::VectorXd mx = Bx * mz, my = By * mz;
  const Eigen::MatrixXd syy = By * cz * By.transpose(), sxy = Bx * cz * By.transpose();
  const Eigen::MatrixXd sxx = Bx * cz * Bx.transpose();
  Eigen::VectorXd yv(T * M);
  for (Eigen::Index t = 0; t < T; ++t) yv.segment(t * M, M) = y.row(t).transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(syy);
  const Eigen::VectorXd dev = yv - my;
  JointGaussianOracle out;
  out.log_density = -0.5 * (static_cast<double>(T * M) * std::log(2.0 * 3.14159265358979323846) +
                            ldlt.vectorD().array().log().sum() + dev.dot(ldlt.solve(dev)));
  const Eigen::VectorXd cm = mx + sxy * ldlt.solve(dev);
  const Eigen::MatrixXd cc = sxx - sxy * ldlt.solve(sxy.transpose());
  for (Eigen::Index t = 0; t < T; ++t) {
    out.mean.push_back(cm.segment(t * n, n));
    out.cov.push_back(cc.block(t * n, t * n, n, n));
  }
  return out;
}

}  // namespace testing
