#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "nsbvar/error.hpp"

namespace nsbvar {

using Rng = std::mt19937_64;

// Independent generator for (seed, stream); draw i of a parallelizable loop
// uses stream i so results do not depend on scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6e73u};
  return Rng(seq);
}

inline Eigen::MatrixXd standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = n01(rng);
  return z;
}

// Lower Cholesky factor; throws NumericError when `a` is not positive definite.
inline Eigen::MatrixXd cholesky_lower(const Eigen::Ref<const Eigen::MatrixXd>& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

// mean + L z with L L' = covariance.
inline Eigen::VectorXd draw_mvn(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& mean,
                                const Eigen::Ref<const Eigen::MatrixXd>& chol_lower) {
  return mean + chol_lower * standard_normal(rng, mean.size(), 1);
}

// N(mean, Q^{-1}) given the precision Q, via Q = L L': x = mean + L'^{-1} z.
inline Eigen::VectorXd draw_mvn_precision(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& mean,
                                          const Eigen::LLT<Eigen::MatrixXd>& precision) {
  Eigen::VectorXd z = standard_normal(rng, mean.size(), 1);
  return mean + precision.matrixU().solve(z);
}

// Inverse-Wishart with density proportional to |S|^{-(dof+k+1)/2} exp(-tr(S Sigma^{-1})/2);
// E[Sigma] = S / (dof - k - 1). Bartlett decomposition of the Wishart(dof, S^{-1}) draw.
inline Eigen::MatrixXd draw_inverse_wishart(Rng& rng, double dof, const Eigen::Ref<const Eigen::MatrixXd>& scale) {
  const Eigen::Index k = scale.rows();
  if (!(dof > static_cast<double>(k) - 1.0)) throw ArgumentError("inverse-Wishart degrees of freedom must exceed k - 1");
  const Eigen::MatrixXd c = cholesky_lower(scale, "inverse-Wishart scale");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < k; ++i) {
    std::chi_squared_distribution<double> chi(dof - static_cast<double>(i));
    a(i, i) = std::sqrt(chi(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = n01(rng);
  }
  // Sigma = (C A'^{-1})(C A'^{-1})'.
  const Eigen::MatrixXd a_inv_t =
      a.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd b = c * a_inv_t;
  Eigen::MatrixXd sigma = b * b.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success) {
    throw NumericError("inverse-Wishart draw is not positive definite");
  }
  return sigma;
}

// Matrix normal: vec(X) ~ N(vec(mean), col_cov (x) row_cov) given lower factors of
// the row (r x r) and column (k x k) covariances.
inline Eigen::MatrixXd draw_matrix_normal(Rng& rng, const Eigen::Ref<const Eigen::MatrixXd>& mean,
                                          const Eigen::Ref<const Eigen::MatrixXd>& row_chol,
                                          const Eigen::Ref<const Eigen::MatrixXd>& col_chol) {
  return mean + row_chol * standard_normal(rng, mean.rows(), mean.cols()) * col_chol.transpose();
}

}  // namespace nsbvar
