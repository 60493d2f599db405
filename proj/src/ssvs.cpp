#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "nsbvar/bvar.hpp"
#include "nsbvar/error.hpp"
#include "nsbvar/random.hpp"

namespace nsbvar {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double log_normal_density(double x, double sd) {
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * (x / sd) * (x / sd);
}

// P(indicator = 1 | x) for the spike (sd0) and slab (sd1) mixture with prior weight w.
double slab_probability(double x, double sd0, double sd1, double w) {
  const double l1 = std::log(w) + log_normal_density(x, sd1);
  const double l0 = std::log1p(-w) + log_normal_density(x, sd0);
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

void check_prior(const SsvsPrior& p) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(fmt::format("{} must be a positive finite number", what));
  };
  auto probability = [](double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ArgumentError(fmt::format("{} must lie in (0, 1)", what));
  };
  positive(p.c0, "c0");
  positive(p.c1, "c1");
  probability(p.inclusion, "inclusion probability");
  if (p.full) {
    positive(p.tau0, "tau0");
    positive(p.tau1, "tau1");
    probability(p.q, "q");
    positive(p.gamma_shape, "gamma shape");
    positive(p.gamma_rate, "gamma rate");
  }
}

// One sweep over the upper factor Psi of Sigma^{-1} = Psi Psi' (George, Sun and Ni 2008):
// diagonal from its Gamma conditional, off-diagonal columns from their normal conditionals,
// then the off-diagonal indicators.
Eigen::MatrixXd draw_precision_factor(Rng& rng, const Eigen::MatrixXd& S, double T, const SsvsPrior& prior,
                                      Eigen::VectorXi& delta) {
  const Eigen::Index k = S.rows();
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(k, k);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    double B = prior.gamma_rate + 0.5 * S(j, j);
    Eigen::MatrixXd delta_cov;
    Eigen::VectorXd s_j;
    if (j > 0) {
      s_j = S.col(j).head(j);
      Eigen::MatrixXd M = S.topLeftCorner(j, j);
      for (Eigen::Index i = 0; i < j; ++i) {
        const double h = delta(pos + i) ? prior.tau1 : prior.tau0;
        M(i, i) += 1.0 / (h * h);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      if (llt.info() != Eigen::Success) throw NumericError("SSVS precision-factor conditional is not positive definite");
      delta_cov = llt.solve(Eigen::MatrixXd::Identity(j, j));
      B = prior.gamma_rate + 0.5 * (S(j, j) - s_j.dot(delta_cov * s_j));
    }
    std::gamma_distribution<double> gamma(prior.gamma_shape + 0.5 * T, 1.0 / B);
    psi(j, j) = std::sqrt(gamma(rng));
    if (j > 0) {
      const Eigen::VectorXd mean = -psi(j, j) * delta_cov * s_j;
      psi.col(j).head(j) = draw_mvn(rng, mean, cholesky_lower(delta_cov, "SSVS off-diagonal covariance"));
      std::uniform_real_distribution<double> u01;
      for (Eigen::Index i = 0; i < j; ++i) {
        delta(pos + i) = u01(rng) < slab_probability(psi(i, j), prior.tau0, prior.tau1, prior.q) ? 1 : 0;
      }
      pos += j;
    }
  }
  return psi;
}

}  // namespace

PosteriorDraws gibbs_ssvs(const VarDesign& d, const SsvsPrior& prior, const ChainOptions& opt) {
  if (d.intercept) throw ArgumentError("SSVS runs on a design without intercepts");
  if (opt.n_total <= opt.n_burn) throw ArgumentError("n_total must exceed n_burn");
  check_prior(prior);
  const Eigen::Index T = d.observations(), k = d.k, r = d.r, n = d.coefficient_count();
  if (T <= r) throw ArgumentError(fmt::format("SSVS needs more observations ({}) than regressors ({})", T, r));

  // Unrestricted OLS supplies the coefficient scales.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.G);
  if (qr.rank() < r) throw NumericError("unrestricted VAR regressors are rank deficient");
  const Eigen::MatrixXd phi_ols = qr.solve(d.F);
  const Eigen::MatrixXd U_ols = d.F - d.G * phi_ols;
  const Eigen::MatrixXd sigma_ols = U_ols.transpose() * U_ols / static_cast<double>(T - r);
  const Eigen::MatrixXd gtg = d.G.transpose() * d.G;
  const Eigen::MatrixXd gtg_inv = gtg.llt().solve(Eigen::MatrixXd::Identity(r, r));
  Eigen::VectorXd sd0(n), sd1(n);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index l = 0; l < r; ++l) {
      const double sd = std::sqrt(std::max(sigma_ols(i, i) * gtg_inv(l, l), 1e-300));
      sd0(i * r + l) = prior.c0 * sd;
      sd1(i * r + l) = prior.c1 * sd;
    }

  const double dof = (prior.s_h0 < 0.0 ? static_cast<double>(k + k * r) : prior.s_h0) + static_cast<double>(T);
  if (!prior.full && !(dof - static_cast<double>(T) > static_cast<double>(k) - 1.0)) {
    throw ArgumentError("s_h0 must exceed k - 1");
  }
  Eigen::MatrixXd S0 = Eigen::MatrixXd::Identity(k, k);
  if (prior.S_c0.size()) {
    if (prior.S_c0.rows() != k || prior.S_c0.cols() != k) throw ArgumentError("S_c0 must be k x k");
    S0 = prior.S_c0;
  }

  PosteriorDraws out;
  out.k = k;
  out.p = d.p;
  out.intercept = false;
  out.names = d.names;
  out.prior = prior.full ? "ssvs_full" : "ssvs_partial";
  out.seed = opt.seed;
  out.total = opt.n_total;
  out.burned = opt.n_burn;

  Rng rng = make_stream(opt.seed, 0);
  std::uniform_real_distribution<double> u01;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(phi_ols.data(), n);
  Eigen::VectorXi gamma = Eigen::VectorXi::Ones(n);
  Eigen::VectorXi delta = Eigen::VectorXi::Ones(k * (k - 1) / 2);
  for (std::size_t s = 0; s < opt.n_total; ++s) {
    const Eigen::MatrixXd phi = Eigen::Map<const Eigen::MatrixXd>(a.data(), r, k);
    const Eigen::MatrixXd U = d.F - d.G * phi;
    const Eigen::MatrixXd SSE = U.transpose() * U;
    Eigen::MatrixXd sigma, sinv;
    if (prior.full) {
      const Eigen::MatrixXd psi = draw_precision_factor(rng, SSE, static_cast<double>(T), prior, delta);
      sinv = psi * psi.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(sinv);
      if (llt.info() != Eigen::Success) throw NumericError(fmt::format("precision draw not positive definite at {}", s));
      sigma = llt.solve(Eigen::MatrixXd::Identity(k, k));
      sigma = 0.5 * (sigma + sigma.transpose()).eval();
    } else {
      sigma = draw_inverse_wishart(rng, dof, S0 + SSE);
      sinv = sigma.llt().solve(Eigen::MatrixXd::Identity(k, k));
    }

    Eigen::MatrixXd P = kron(sinv, gtg);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = gamma(i) ? sd1(i) : sd0(i);
      P(i, i) += 1.0 / (v * v);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) {
      throw NumericError(fmt::format("conditional precision of A not positive definite at draw {}", s));
    }
    const Eigen::MatrixXd rhs = d.G.transpose() * d.F * sinv;
    const Eigen::VectorXd mean = llt.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n));
    a = draw_mvn_precision(rng, mean, llt);

    for (Eigen::Index i = 0; i < n; ++i) gamma(i) = u01(rng) < slab_probability(a(i), sd0(i), sd1(i), prior.inclusion);

    if (s >= opt.n_burn) {
      out.phi.push_back(Eigen::Map<const Eigen::MatrixXd>(a.data(), r, k));
      out.sigma.push_back(sigma);
      out.gamma.push_back(gamma);
      if (prior.full) out.delta.push_back(delta);
    }
  }
  return out;
}

}  // namespace nsbvar
