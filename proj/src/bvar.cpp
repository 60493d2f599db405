#include "nsbvar/bvar.hpp"

#include <cmath>

#include <fmt/format.h>

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

Eigen::VectorXd vec(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(fmt::format("{} must be a positive finite number", what));
}

Eigen::VectorXd resolve_sigma2(const VarDesign& d, const Eigen::VectorXd& given) {
  if (given.size() > 0) {
    if (given.size() != d.k) throw ArgumentError("sigma2 must have one entry per variable");
    if (!(given.array() > 0.0).all()) throw ArgumentError("sigma2 entries must be > 0");
    return given;
  }
  if (d.data.rows() == 0) throw ArgumentError("design has no source series; supply sigma2 explicitly");
  Eigen::VectorXd s = fit_ar1_residual_scales(d.data);
  if (!(s.array() > 0.0).all()) throw NumericError("AR(1) residual variance is zero for some variable");
  return s;
}

double resolve_dof(double s_h0, const VarDesign& d) {
  const double v = s_h0 < 0.0 ? static_cast<double>(d.k + d.k * d.r) : s_h0;
  if (!(v > static_cast<double>(d.k) - 1.0)) throw ArgumentError("s_h0 must exceed k - 1");
  return v;
}

Eigen::MatrixXd resolve_scale(const Eigen::MatrixXd& given, const Eigen::VectorXd& fallback_diag, Eigen::Index k) {
  if (given.size() > 0) {
    if (given.rows() != k || given.cols() != k) throw ArgumentError("S_c0 must be k x k");
    cholesky_lower(given, "S_c0");
    return given;
  }
  return fallback_diag.asDiagonal();
}

PosteriorDraws empty_draws(const VarDesign& d, const std::string& label, std::uint64_t seed) {
  PosteriorDraws out;
  out.k = d.k;
  out.p = d.p;
  out.intercept = d.intercept;
  out.names = d.names;
  out.prior = label;
  out.seed = seed;
  return out;
}

void check_chain(const ChainOptions& opt) {
  if (opt.n_total <= opt.n_burn) throw ArgumentError("n_total must exceed n_burn");
}

// Precision of A | Sigma under a N(a0, diag(v_prior)) prior.
Eigen::LLT<Eigen::MatrixXd> coefficient_precision(const Eigen::VectorXd& v_prior, const Eigen::MatrixXd& sigma_inv,
                                                  const Eigen::MatrixXd& gtg) {
  Eigen::MatrixXd P = kron(sigma_inv, gtg);
  P.diagonal() += v_prior.cwiseInverse();
  return Eigen::LLT<Eigen::MatrixXd>(P);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + " is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

Eigen::VectorXd VarDesign::f_long() const {
  const Eigen::MatrixXd Ft = F.transpose();
  return vec(Ft);
}

Eigen::MatrixXd VarDesign::omega_long() const {
  const Eigen::Index T = F.rows();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(T * k, k * r);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index i = 0; i < k; ++i) omega.block(t * k + i, i * r, 1, r) = G.row(t);
  return omega;
}

VarDesign build_design(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, bool intercept) {
  if (p < 1) throw ArgumentError("lag order must be >= 1");
  if (data.rows() <= p) throw ArgumentError(fmt::format("need more than p = {} observations, got {}", p, data.rows()));
  VarDesign d;
  d.p = p;
  d.intercept = intercept;
  d.k = data.cols();
  d.r = regressor_count(d.k, p, intercept);
  const LaggedData lagged = lagged_regressors(data, p, intercept);
  d.F = lagged.F;
  d.G = lagged.G;
  d.data = data;
  for (Eigen::Index j = 0; j < d.k; ++j) d.names.push_back(fmt::format("y{}", j + 1));
  return d;
}

VarDesign build_design(const FactorSeries& data, int p, bool intercept) {
  VarDesign d = build_design(data.values, p, intercept);
  d.names = data.names;
  return d;
}

VarDesign design_from_matrices(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G, int p, bool intercept) {
  VarDesign d;
  d.p = p;
  d.intercept = intercept;
  d.k = F.cols();
  d.r = regressor_count(d.k, p, intercept);
  if (G.cols() != d.r || G.rows() != F.rows()) throw ArgumentError("F and G shapes do not match the lag order");
  d.F = F;
  d.G = G;
  for (Eigen::Index j = 0; j < d.k; ++j) d.names.push_back(fmt::format("y{}", j + 1));
  return d;
}

Eigen::VectorXd fit_ar1_residual_scales(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::Index T = data.rows();
  if (T < 3) throw ArgumentError("AR(1) scales need at least 3 observations");
  const Eigen::Index n = T - 1;
  Eigen::VectorXd out(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    Eigen::MatrixXd X(n, 2);
    X.col(0).setOnes();
    X.col(1) = data.col(j).head(n);
    const Eigen::VectorXd y = data.col(j).tail(n);
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
    const double sse = (y - X * b).squaredNorm();
    // Degrees of freedom n - 2, kept at least one.
    out(j) = sse / static_cast<double>(std::max<Eigen::Index>(1, n - 2));
    if (out(j) < 1e-300) out(j) = 0.0;
  }
  return out;
}

std::string prior_name(const PriorSpec& prior) {
  struct Visitor {
    std::string operator()(const DiffusePrior&) const { return "diffuse"; }
    std::string operator()(const MinnesotaPrior&) const { return "minnesota"; }
    std::string operator()(const NaturalConjugatePrior&) const { return "conjugate"; }
    std::string operator()(const IndepNiwPrior&) const { return "indep_niw"; }
    std::string operator()(const SsvsPrior& s) const { return s.full ? "ssvs_full" : "ssvs_partial"; }
  };
  return std::visit(Visitor{}, prior);
}

Eigen::MatrixXd PosteriorDraws::phi_mean() const {
  if (phi.empty()) throw ResultError("no retained draws");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(phi.front().rows(), phi.front().cols());
  for (const auto& x : phi) m += x;
  return m / static_cast<double>(phi.size());
}

Eigen::MatrixXd PosteriorDraws::sigma_mean() const {
  if (sigma.empty()) throw ResultError("no retained draws");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (const auto& x : sigma) m += x;
  return m / static_cast<double>(sigma.size());
}

Eigen::VectorXd PosteriorDraws::inclusion_probability() const {
  if (gamma.empty()) return {};
  Eigen::VectorXd m = Eigen::VectorXd::Zero(gamma.front().size());
  for (const auto& g : gamma) m += g.cast<double>();
  return m / static_cast<double>(gamma.size());
}

VarCoefficients PosteriorDraws::coefficients(std::size_t draw) const {
  return VarCoefficients::from_phi(phi.at(draw), p, intercept);
}

Eigen::VectorXd minnesota_prior_variance(Eigen::Index k, int p, bool intercept, const Eigen::VectorXd& sigma2,
                                         double d_own, double d_cross, double d_const) {
  const Eigen::Index r = regressor_count(k, p, intercept);
  Eigen::VectorXd v(k * r);
  const Eigen::Index off = intercept ? 1 : 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (intercept) v(i * r) = d_const * sigma2(i);
    for (int l = 1; l <= p; ++l) {
      const double l2 = static_cast<double>(l) * l;
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index idx = i * r + off + (l - 1) * k + j;
        v(idx) = i == j ? d_own / l2 : d_cross * sigma2(i) / (l2 * sigma2(j));
      }
    }
  }
  return v;
}

Eigen::VectorXd minnesota_prior_mean(Eigen::Index k, int p, bool intercept, double persistence) {
  const Eigen::Index r = regressor_count(k, p, intercept);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(k * r);
  const Eigen::Index off = intercept ? 1 : 0;
  for (Eigen::Index i = 0; i < k; ++i) a(i * r + off + i) = persistence;
  return a;
}

MinnesotaPosterior minnesota_posterior(const VarDesign& d, const MinnesotaPrior& prior, Representation rep) {
  require_positive(prior.d1, "d1");
  require_positive(prior.d2, "d2");
  require_positive(prior.d3, "d3");
  MinnesotaPosterior post;
  const Eigen::VectorXd s2 = resolve_sigma2(d, prior.sigma2);
  post.sigma_fixed = s2.asDiagonal();
  post.a_prior = minnesota_prior_mean(d.k, d.p, d.intercept, prior.persistence);
  post.v_prior = minnesota_prior_variance(d.k, d.p, d.intercept, s2, prior.d1, prior.d2, prior.d3);
  const Eigen::MatrixXd sigma_inv = s2.cwiseInverse().asDiagonal();
  const Eigen::VectorXd prior_term = post.a_prior.cwiseQuotient(post.v_prior);
  Eigen::VectorXd data_term;
  if (rep == Representation::Long) {
    const Eigen::MatrixXd omega = d.omega_long();
    const Eigen::VectorXd f = d.f_long();
    const Eigen::Index T = d.observations();
    Eigen::MatrixXd weighted(omega.cols(), omega.rows());  // Omega' (I_T (x) Sigma^{-1})
    for (Eigen::Index t = 0; t < T; ++t)
      weighted.middleCols(t * d.k, d.k) = omega.middleRows(t * d.k, d.k).transpose() * sigma_inv;
    post.precision = weighted * omega;
    data_term = weighted * f;
  } else {
    // Omega'(I (x) S^{-1})Omega = S^{-1} (x) G'G, Omega'(I (x) S^{-1}) f = vec(G'F S^{-1}).
    post.precision = kron(sigma_inv, d.G.transpose() * d.G);
    data_term = vec(d.G.transpose() * d.F * sigma_inv);
  }
  post.precision.diagonal() += post.v_prior.cwiseInverse();
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  if (llt.info() != Eigen::Success) throw NumericError("Minnesota posterior precision is not positive definite");
  post.a_hat = llt.solve(prior_term + data_term);
  return post;
}

PosteriorDraws sample_minnesota(const MinnesotaPosterior& post, const VarDesign& d, const ChainOptions& opt) {
  check_chain(opt);
  PosteriorDraws out = empty_draws(d, "minnesota", opt.seed);
  out.analytic = true;
  const std::size_t n = opt.n_total - opt.n_burn;
  out.total = n;
  out.burned = 0;
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  if (llt.info() != Eigen::Success) throw NumericError("Minnesota posterior precision is not positive definite");
  out.phi.reserve(n);
  out.sigma.assign(n, post.sigma_fixed);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_stream(opt.seed, i);
    out.phi.push_back(unvec(draw_mvn_precision(rng, post.a_hat, llt), d.r, d.k));
  }
  return out;
}

Eigen::MatrixXd NiwPosterior::sigma_mean() const {
  const double denom = dof - static_cast<double>(S.rows()) - 1.0;
  if (!(denom > 0.0)) throw ResultError("inverse-Wishart mean undefined for dof <= k + 1");
  return S / denom;
}

Eigen::VectorXd conjugate_prior_variance(Eigen::Index k, int p, bool intercept, const Eigen::VectorXd& sigma2,
                                         double d_lag, double d_const) {
  const Eigen::Index r = regressor_count(k, p, intercept);
  Eigen::VectorXd v(r);
  Eigen::Index idx = 0;
  if (intercept) v(idx++) = d_const;
  for (int l = 1; l <= p; ++l)
    for (Eigen::Index j = 0; j < k; ++j) v(idx++) = d_lag / (static_cast<double>(l) * l * sigma2(j));
  return v;
}

NiwPosterior conjugate_posterior(const VarDesign& d, const NaturalConjugatePrior& prior) {
  require_positive(prior.d1, "d1");
  require_positive(prior.d2, "d2");
  const Eigen::VectorXd s2 = resolve_sigma2(d, prior.sigma2);
  const double dof0 = resolve_dof(prior.s_h0, d);
  const Eigen::MatrixXd S0 = resolve_scale(prior.S_c0, s2, d.k);
  Eigen::MatrixXd phi0 = prior.phi0.size() ? prior.phi0 : Eigen::MatrixXd::Zero(d.r, d.k);
  if (phi0.rows() != d.r || phi0.cols() != d.k) throw ArgumentError("phi0 must be r x k");
  const Eigen::VectorXd v_phi =
      prior.sigma_phi.size() ? prior.sigma_phi : conjugate_prior_variance(d.k, d.p, d.intercept, s2, prior.d1, prior.d2);
  if (v_phi.size() != d.r || !(v_phi.array() > 0.0).all()) throw ArgumentError("Sigma_Phi must have r positive entries");
  const Eigen::MatrixXd prec_phi = v_phi.cwiseInverse().asDiagonal();
  NiwPosterior post;
  post.V = prec_phi + d.G.transpose() * d.G;
  Eigen::LLT<Eigen::MatrixXd> llt(post.V);
  if (llt.info() != Eigen::Success) throw NumericError("V_Phi is not positive definite");
  post.phi_hat = llt.solve(prec_phi * phi0 + d.G.transpose() * d.F);
  post.S = S0 - post.phi_hat.transpose() * post.V * post.phi_hat + phi0.transpose() * prec_phi * phi0 +
           d.F.transpose() * d.F;
  post.S = 0.5 * (post.S + post.S.transpose()).eval();
  if (Eigen::LLT<Eigen::MatrixXd>(post.S).info() != Eigen::Success) {
    throw NumericError("posterior scale S_c is not positive definite");
  }
  post.dof = dof0 + static_cast<double>(d.observations());
  return post;
}

NiwPosterior diffuse_posterior(const VarDesign& d) {
  const Eigen::Index T = d.observations();
  const double dof = static_cast<double>(T - d.r);
  if (!(dof > static_cast<double>(d.k) - 1.0)) {
    throw ArgumentError(fmt::format("diffuse posterior needs T - r > k - 1 (T = {}, r = {}, k = {})", T, d.r, d.k));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.G);
  if (qr.rank() < d.r) throw NumericError("regressor matrix G is rank deficient");
  NiwPosterior post;
  post.phi_hat = qr.solve(d.F);
  const Eigen::MatrixXd U = d.F - d.G * post.phi_hat;
  post.S = U.transpose() * U;
  post.V = d.G.transpose() * d.G;
  post.dof = dof;
  return post;
}

PosteriorDraws sample_niw(const NiwPosterior& post, const VarDesign& d, const ChainOptions& opt,
                          const std::string& prior_label) {
  check_chain(opt);
  PosteriorDraws out = empty_draws(d, prior_label, opt.seed);
  out.analytic = true;
  const std::size_t n = opt.n_total - opt.n_burn;
  out.total = n;
  out.burned = 0;
  // Row factor B with B B' = V^{-1}: B = L'^{-1} for V = L L'.
  const Eigen::MatrixXd L = cholesky_lower(post.V, "V_Phi");
  const Eigen::MatrixXd B =
      L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d.r, d.r));
  out.phi.reserve(n);
  out.sigma.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_stream(opt.seed, i);
    Eigen::MatrixXd sigma = draw_inverse_wishart(rng, post.dof, post.S);
    out.phi.push_back(draw_matrix_normal(rng, post.phi_hat, B, cholesky_lower(sigma, "Sigma draw")));
    out.sigma.push_back(std::move(sigma));
  }
  return out;
}

PosteriorDraws gibbs_indep_niw(const VarDesign& d, const IndepNiwPrior& prior, const ChainOptions& opt) {
  check_chain(opt);
  require_positive(prior.d1, "d1");
  require_positive(prior.d2, "d2");
  require_positive(prior.d3, "d3");
  const Eigen::VectorXd s2 = resolve_sigma2(d, prior.sigma2);
  const double dof0 = resolve_dof(prior.s_h0, d);
  const Eigen::MatrixXd S0 = resolve_scale(prior.S_c0, s2, d.k);
  const Eigen::Index n = d.coefficient_count();
  const Eigen::VectorXd a0 = prior.a0.size() ? prior.a0 : Eigen::VectorXd::Zero(n);
  if (a0.size() != n) throw ArgumentError("a0 must have k r entries");
  const Eigen::VectorXd v_prior = minnesota_prior_variance(d.k, d.p, d.intercept, s2, prior.d1, prior.d2, prior.d3);
  const Eigen::VectorXd prior_term = a0.cwiseQuotient(v_prior);
  const Eigen::MatrixXd gtg = d.G.transpose() * d.G;
  const double dof = dof0 + static_cast<double>(d.observations());

  PosteriorDraws out = empty_draws(d, "indep_niw", opt.seed);
  out.total = opt.n_total;
  out.burned = opt.n_burn;
  Rng rng = make_stream(opt.seed, 0);
  Eigen::VectorXd a = a0;
  for (std::size_t s = 0; s < opt.n_total; ++s) {
    const Eigen::MatrixXd phi = unvec(a, d.r, d.k);
    const Eigen::MatrixXd U = d.F - d.G * phi;
    const Eigen::MatrixXd sigma = draw_inverse_wishart(rng, dof, S0 + U.transpose() * U);
    const Eigen::MatrixXd sinv = spd_inverse(sigma, "Sigma draw");
    const auto llt = coefficient_precision(v_prior, sinv, gtg);
    if (llt.info() != Eigen::Success) {
      throw NumericError(fmt::format("conditional precision of A not positive definite at draw {}", s));
    }
    const Eigen::VectorXd mean = llt.solve(prior_term + vec(d.G.transpose() * d.F * sinv));
    a = draw_mvn_precision(rng, mean, llt);
    if (s >= opt.n_burn) {
      out.phi.push_back(unvec(a, d.r, d.k));
      out.sigma.push_back(sigma);
    }
  }
  return out;
}

PosteriorDraws estimate(const VarDesign& d, const PriorSpec& prior, const ChainOptions& opt) {
  struct Visitor {
    const VarDesign& d;
    const ChainOptions& opt;
    PosteriorDraws operator()(const DiffusePrior&) const { return sample_niw(diffuse_posterior(d), d, opt, "diffuse"); }
    PosteriorDraws operator()(const MinnesotaPrior& p) const {
      return sample_minnesota(minnesota_posterior(d, p), d, opt);
    }
    PosteriorDraws operator()(const NaturalConjugatePrior& p) const {
      return sample_niw(conjugate_posterior(d, p), d, opt, "conjugate");
    }
    PosteriorDraws operator()(const IndepNiwPrior& p) const { return gibbs_indep_niw(d, p, opt); }
    PosteriorDraws operator()(const SsvsPrior& p) const { return gibbs_ssvs(d, p, opt); }
  };
  return std::visit(Visitor{d, opt}, prior);
}

}  // namespace nsbvar
