#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nsbvar/data_io.hpp"
#include "nsbvar/error.hpp"
#include "nsbvar/ns_factors.hpp"
#include "nsbvar/optim.hpp"

namespace nsbvar {

// x_t = A x_{t-1} + eta_t,  eta_t ~ N(0, Q)
// y_t = H x_t + eps_t,      eps_t ~ N(0, R)
template <typename Scalar>
struct LinearGaussianSsm {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix A, Q, H, R;
};

template <typename Scalar>
struct FilterOutput {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<Vector> predicted_state;       // x_{t|t-1}
  std::vector<Matrix> predicted_cov;         // P_{t|t-1}
  std::vector<Vector> filtered_state;        // x_{t|t}
  std::vector<Matrix> filtered_cov;          // P_{t|t}
  std::vector<Vector> innovation;            // e_{t|t-1}
  std::vector<Matrix> innovation_cov;        // S_{t|t-1}
  Scalar log_likelihood = Scalar(0);
};

template <typename Scalar>
struct SmootherOutput {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<Vector> state;  // x_{t|T}
  std::vector<Matrix> cov;    // P_{t|T}
};

// Predict/update recursions with a Joseph-form covariance update. `y` is T x M.
template <typename Scalar>
FilterOutput<Scalar> kalman_filter(const LinearGaussianSsm<Scalar>& m,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& p0) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using std::log;
  const Eigen::Index T = y.rows(), M = y.cols(), n = m.A.rows();
  if (m.H.rows() != M || m.H.cols() != n || m.R.rows() != M || x0.size() != n || p0.rows() != n) {
    throw ArgumentError("kalman_filter: dimension mismatch");
  }
  FilterOutput<Scalar> out;
  out.predicted_state.reserve(T);
  out.predicted_cov.reserve(T);
  out.filtered_state.reserve(T);
  out.filtered_cov.reserve(T);
  out.innovation.reserve(T);
  out.innovation_cov.reserve(T);
  const Matrix I = Matrix::Identity(n, n);
  const Scalar log2pi = Scalar(std::log(2.0 * std::numbers::pi));
  Vector x = x0;
  Matrix P = p0;
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector xp = m.A * x;
    Matrix Pp = m.A * P * m.A.transpose() + m.Q;
    Pp = (Scalar(0.5) * (Pp + Pp.transpose())).eval();
    Vector e = y.row(t).transpose() - m.H * xp;
    Matrix S = m.H * Pp * m.H.transpose() + m.R;
    S = (Scalar(0.5) * (S + S.transpose())).eval();
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
      throw NumericError(fmt::format("innovation covariance not positive definite at t = {}", t + 1));
    }
    const Matrix L = llt.matrixL();
    Scalar logdet(0);
    for (Eigen::Index i = 0; i < M; ++i) logdet += log(L(i, i));
    logdet *= Scalar(2);
    const Vector Sinv_e = llt.solve(e);
    out.log_likelihood += Scalar(-0.5) * (Scalar(M) * log2pi + logdet + e.dot(Sinv_e));
    // K = Pp H' S^{-1}
    const Matrix K = llt.solve(m.H * Pp).transpose();
    x = xp + K * e;
    const Matrix IKH = I - K * m.H;
    P = IKH * Pp * IKH.transpose() + K * m.R * K.transpose();
    P = (Scalar(0.5) * (P + P.transpose())).eval();
    out.predicted_state.push_back(std::move(xp));
    out.predicted_cov.push_back(std::move(Pp));
    out.filtered_state.push_back(x);
    out.filtered_cov.push_back(P);
    out.innovation.push_back(std::move(e));
    out.innovation_cov.push_back(std::move(S));
  }
  return out;
}

// Fixed-interval (Rauch-Tung-Striebel) smoother.
template <typename Scalar>
SmootherOutput<Scalar> kalman_smoother(const FilterOutput<Scalar>& f,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const std::size_t T = f.filtered_state.size();
  SmootherOutput<Scalar> out;
  out.state.resize(T);
  out.cov.resize(T);
  if (T == 0) return out;
  out.state[T - 1] = f.filtered_state[T - 1];
  out.cov[T - 1] = f.filtered_cov[T - 1];
  for (std::size_t t = T - 1; t-- > 0;) {
    Eigen::LLT<Matrix> llt(f.predicted_cov[t + 1]);
    if (llt.info() != Eigen::Success) {
      throw NumericError(fmt::format("predicted state covariance singular at t = {}", t + 2));
    }
    // J = P_{t|t} A' P_{t+1|t}^{-1}
    const Matrix J = llt.solve(A * f.filtered_cov[t]).transpose();
    out.state[t] = f.filtered_state[t] + J * (out.state[t + 1] - f.predicted_state[t + 1]);
    Matrix P = f.filtered_cov[t] + J * (out.cov[t + 1] - f.predicted_cov[t + 1]) * J.transpose();
    out.cov[t] = Scalar(0.5) * (P + P.transpose());
  }
  return out;
}

// Solves P = A P A' + Q; requires spectral radius of A below one.
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

// Dynamic Nelson-Siegel state space in demeaned form:
//   f_t - mu = A (f_{t-1} - mu) + eta_t,  Sigma_eta = Z Z'
//   y_t = Lambda(lambda) f_t + eps_t,      Sigma_eps = diag(w^2)
struct SsmParams {
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  double lambda = 0.0598;
  Eigen::Matrix3d Z = Eigen::Matrix3d::Identity();  // lower triangular, positive diagonal
  Eigen::VectorXd w;                                // measurement sds, one per maturity

  Eigen::Matrix3d sigma_eta() const { return Z * Z.transpose(); }
  Eigen::MatrixXd sigma_eps() const { return w.array().square().matrix().asDiagonal(); }
  // 9 + 3 + 1 + 6 + M.
  Eigen::Index free_parameter_count() const { return 19 + w.size(); }
  void validate() const;
};

// Packed layout: A row-major (9), mu (3), log lambda, Z lower triangle row-major
// with log diagonal (6), log w (M).
Eigen::VectorXd pack(const SsmParams& p);
SsmParams unpack(const Eigen::VectorXd& v, Eigen::Index num_maturities);

using DnsFilterOutput = FilterOutput<double>;
using DnsSmootherOutput = SmootherOutput<double>;

LinearGaussianSsm<double> dns_system(const SsmParams& p, const std::vector<int>& maturities);

// Default initial state: zero in demeaned space with the stationary covariance,
// or 10 I when A is not stable.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> default_initial_state(const SsmParams& p);

// Filters the intercept-adjusted yields y_t - Lambda mu.
DnsFilterOutput kalman_filter(const SsmParams& p, const YieldPanel& panel, const Eigen::VectorXd& init_state,
                              const Eigen::MatrixXd& init_cov);
DnsFilterOutput kalman_filter(const SsmParams& p, const YieldPanel& panel);
DnsSmootherOutput kalman_smoother(const DnsFilterOutput& f, const SsmParams& p);

// T x 3 smoothed factors with mu added back.
Eigen::MatrixXd smoothed_factors(const DnsSmootherOutput& s, const SsmParams& p);

double dns_log_likelihood(const SsmParams& p, const YieldPanel& panel);

struct MleResult {
  SsmParams params;
  DnsFilterOutput filter;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  QuasiNewtonResult optimizer;
};

// Maximizes the filter log-likelihood over the packed parameter vector.
MleResult fit_mle(const YieldPanel& panel, const SsmParams& init, const QuasiNewtonOptions& options = {});

// Starting values from the two-step fit: VAR(1) transition, factor means,
// Cholesky of the VAR innovation covariance, per-maturity residual sds.
SsmParams init_from_two_step(const YieldPanel& panel, double lambda0);

// Draws a panel from the model, starting from the stationary distribution.
YieldPanel simulate_panel(const SsmParams& p, const std::vector<int>& maturities, Eigen::Index T,
                          std::uint64_t seed, MonthStamp start = {2000, 1});

void write_params(std::ostream& out, const SsmParams& p);
SsmParams read_params(std::istream& in);

}  // namespace nsbvar
