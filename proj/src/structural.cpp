#include "nsbvar/structural.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nsbvar/config.hpp"
#include "nsbvar/error.hpp"

namespace nsbvar {

namespace {

double sorted_quantile(const std::vector<double>& v, double q) {
  if (v.size() == 1) return v.front();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

const std::vector<Eigen::MatrixXd>& IrfResult::band(double level) const {
  for (std::size_t i = 0; i < band_levels.size(); ++i)
    if (std::abs(band_levels[i] - level) < 1e-12) return bands[i];
  throw ArgumentError(fmt::format("no IRF band at level {}", level));
}

void summarize_irf(IrfResult& irf, const std::vector<double>& levels) {
  std::vector<double> sorted_levels = levels;
  std::sort(sorted_levels.begin(), sorted_levels.end());
  irf.band_levels = sorted_levels;
  irf.bands.clear();
  if (irf.responses.empty()) return;
  const Eigen::Index k = irf.responses.front().front().rows(), s = irf.responses.front().front().cols();
  irf.bands.assign(sorted_levels.size(), std::vector<Eigen::MatrixXd>(irf.horizons, Eigen::MatrixXd(k, s)));
  std::vector<double> column(irf.responses.size());
  for (int h = 0; h < irf.horizons; ++h)
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < s; ++j) {
        for (std::size_t d = 0; d < irf.responses.size(); ++d) column[d] = irf.responses[d][h](i, j);
        std::sort(column.begin(), column.end());
        for (std::size_t q = 0; q < sorted_levels.size(); ++q) irf.bands[q][h](i, j) = sorted_quantile(column, sorted_levels[q]);
      }
}

std::vector<Eigen::MatrixXd> impulse_responses(const VarCoefficients& coef, const Eigen::MatrixXd& impact, int H) {
  std::vector<Eigen::MatrixXd> out = ma_coefficients(coef.lags, H);
  for (auto& psi : out) psi = psi * impact;
  return out;
}

IrfResult irf_recursive(const PosteriorDraws& draws, int H, const std::vector<double>& levels) {
  if (H < 1) throw ArgumentError("IRF horizon must be >= 1");
  if (draws.phi.empty()) throw ArgumentError("IRFs need at least one posterior draw");
  IrfResult irf;
  irf.names = draws.names;
  irf.horizons = H;
  for (std::size_t d = 0; d < draws.retained(); ++d) {
    Eigen::LLT<Eigen::MatrixXd> llt(draws.sigma[d]);
    if (llt.info() != Eigen::Success) {
      ++irf.skipped;
      continue;
    }
    irf.responses.push_back(impulse_responses(draws.coefficients(d), llt.matrixL(), H));
  }
  irf.tries = irf.accepted = irf.responses.size();
  if (irf.responses.empty()) throw ResultError("no posterior draw has a positive definite Sigma");
  summarize_irf(irf, levels);
  return irf;
}

Eigen::MatrixXd DummyObs::Y() const {
  Eigen::MatrixXd out(Y_d1.rows() + Y_d2.rows(), Y_d1.cols());
  out << Y_d1, Y_d2;
  return out;
}

Eigen::MatrixXd DummyObs::X() const {
  Eigen::MatrixXd out(X_d1.rows() + X_d2.rows(), X_d1.cols());
  out << X_d1, X_d2;
  return out;
}

DummyObs build_dummy_obs(const Eigen::VectorXd& sigma, const Eigen::VectorXd& mu, const DummyHyper& h) {
  const Eigen::Index n = sigma.size();
  const int p = h.p;
  if (p < 1) throw ArgumentError("dummy-observation lag order must be >= 1");
  if (mu.size() != n) throw ArgumentError("sample means and sds differ in length");
  if (!(sigma.array() > 0.0).all()) throw ArgumentError("AR residual sds must be > 0 for dummy observations");
  if (!(h.f > 0.0) || !(h.theta > 0.0)) throw ArgumentError("f and theta must be > 0");
  const Eigen::VectorXd m = h.m.size() ? h.m : Eigen::VectorXd::Ones(n);
  if (m.size() != n) throw ArgumentError("prior first-lag means have the wrong length");
  std::vector<double> w = h.sum_weights;
  if (w.empty()) w.assign(p, 1.0);
  if (static_cast<int>(w.size()) != p) throw ArgumentError("sum-of-coefficients weights need one entry per lag");

  const Eigen::Index np = n * p, cols = np + 1;
  DummyObs d;
  // Coefficient block (np rows), covariance block (n rows), intercept row.
  d.Y_d1 = Eigen::MatrixXd::Zero(np + n + 1, n);
  d.X_d1 = Eigen::MatrixXd::Zero(np + n + 1, cols);
  for (Eigen::Index i = 0; i < n; ++i) d.Y_d1(i, i) = m(i) * sigma(i) / h.f;
  for (int l = 0; l < p; ++l)
    for (Eigen::Index i = 0; i < n; ++i) d.X_d1(l * n + i, l * n + i) = static_cast<double>(l + 1) * sigma(i) / h.f;
  for (Eigen::Index i = 0; i < n; ++i) d.Y_d1(np + i, i) = sigma(i);
  d.X_d1(np + n, np) = h.c;

  d.Y_d2 = Eigen::MatrixXd::Zero(n, n);
  d.X_d2 = Eigen::MatrixXd::Zero(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = m(i) * mu(i) / h.theta;
    d.Y_d2(i, i) = v;
    for (int l = 0; l < p; ++l) d.X_d2(i, l * n + i) = w[l] * v;
  }
  return d;
}

DummyObs build_dummy_obs(const Eigen::Ref<const Eigen::MatrixXd>& data, const DummyHyper& hyper) {
  const Eigen::VectorXd sigma = fit_ar1_residual_scales(data).cwiseSqrt();
  const Eigen::VectorXd mu = data.colwise().mean().transpose();
  return build_dummy_obs(sigma, mu, hyper);
}

void dummy_regressors(const Eigen::Ref<const Eigen::MatrixXd>& data, int p, Eigen::MatrixXd& Y, Eigen::MatrixXd& X) {
  const Eigen::Index T0 = data.rows(), n = data.cols();
  if (T0 <= p) throw ArgumentError("not enough observations for the lag order");
  const Eigen::Index T = T0 - p;
  Y = data.bottomRows(T);
  X.resize(T, n * p + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int l = 1; l <= p; ++l) X.block(t, (l - 1) * n, 1, n) = data.row(p + t - l);
    X(t, n * p) = 1.0;
  }
}

DummyPosterior dummy_posterior(const Eigen::Ref<const Eigen::MatrixXd>& data, const DummyObs& dummies, int p) {
  Eigen::MatrixXd Y, X;
  dummy_regressors(data, p, Y, X);
  const Eigen::MatrixXd Yd = dummies.Y(), Xd = dummies.X();
  if (Yd.cols() != Y.cols() || Xd.cols() != X.cols()) throw ArgumentError("dummy blocks do not match the data shape");
  Eigen::MatrixXd Ya(Y.rows() + Yd.rows(), Y.cols()), Xa(X.rows() + Xd.rows(), X.cols());
  Ya << Y, Yd;
  Xa << X, Xd;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xa);
  if (qr.rank() < Xa.cols()) throw NumericError("augmented regressor matrix is rank deficient");
  DummyPosterior post;
  post.p = p;
  post.theta = qr.solve(Ya);
  const Eigen::MatrixXd E = Ya - Xa * post.theta;
  post.sigma = E.transpose() * E;
  post.xtx = Xa.transpose() * Xa;
  post.dof = static_cast<double>(Yd.rows() + Y.rows());
  return post;
}

PosteriorDraws gibbs_dummy_bvar(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<std::string>& names,
                                const DummyObs& dummies, int p, const ChainOptions& opt) {
  if (opt.n_total <= opt.n_burn) throw ArgumentError("n_total must exceed n_burn");
  const DummyPosterior post = dummy_posterior(data, dummies, p);
  const Eigen::Index n = data.cols(), r = n * p + 1;
  const Eigen::MatrixXd L = cholesky_lower(post.xtx, "X_a'X_a");
  const Eigen::MatrixXd B = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r, r));

  PosteriorDraws out;
  out.k = n;
  out.p = p;
  out.intercept = true;
  out.names = names;
  if (out.names.empty())
    for (Eigen::Index j = 0; j < n; ++j) out.names.push_back(fmt::format("y{}", j + 1));
  out.prior = "dummy";
  out.seed = opt.seed;
  out.total = opt.n_total;
  out.burned = opt.n_burn;
  // Draws are independent given the data; iteration s uses stream s, so only retained ones are generated.
  for (std::size_t s = opt.n_burn; s < opt.n_total; ++s) {
    Rng rng = make_stream(opt.seed, s);
    Eigen::MatrixXd sigma = draw_inverse_wishart(rng, post.dof, post.sigma);
    const Eigen::MatrixXd theta = draw_matrix_normal(rng, post.theta, B, cholesky_lower(sigma, "Sigma draw"));
    Eigen::MatrixXd phi(r, n);
    phi.row(0) = theta.row(r - 1);
    phi.bottomRows(r - 1) = theta.topRows(r - 1);
    out.phi.push_back(std::move(phi));
    out.sigma.push_back(std::move(sigma));
  }
  return out;
}

void SignRestriction::validate(Eigen::Index k, bool require_constraint) const {
  if (shock < 0 || shock >= k) throw ArgumentError("sign restriction shock index out of range");
  if (static_cast<Eigen::Index>(signs.size()) != k) throw ArgumentError("sign restriction needs one entry per variable");
  bool any = false;
  for (int s : signs) {
    if (s != -1 && s != 0 && s != 1) throw ArgumentError("sign constraints must be +1, -1 or 0");
    any = any || s != 0;
  }
  if (require_constraint && !any) throw ArgumentError("sign restriction has no constrained entry");
  if (horizons.empty()) throw ArgumentError("sign restriction needs at least one horizon");
  for (int h : horizons)
    if (h < 0) throw ArgumentError("sign restriction horizons must be >= 0");
}

SignRestriction parse_sign_restriction(const std::string& shock, const std::string& constraints,
                                       const std::vector<std::string>& names, const std::vector<int>& horizons) {
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ArgumentError(fmt::format("unknown variable '{}' in sign restriction", name));
    return static_cast<int>(it - names.begin());
  };
  SignRestriction r;
  r.shock = index_of(trim(shock));
  r.signs.assign(names.size(), 0);
  r.horizons = horizons;
  for (const auto& item : split_list(constraints)) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ArgumentError(fmt::format("sign constraint '{}' must be name:+ or name:-", item));
    const std::string sign = trim(item.substr(colon + 1));
    const int idx = index_of(trim(item.substr(0, colon)));
    if (sign == "+") r.signs[idx] = 1;
    else if (sign == "-") r.signs[idx] = -1;
    else if (sign == "0" || sign == "?") r.signs[idx] = 0;
    else throw ArgumentError(fmt::format("sign constraint '{}' must end in + or -", item));
  }
  r.validate(static_cast<Eigen::Index>(names.size()), true);
  return r;
}

Eigen::MatrixXd random_rotation(Rng& rng, Eigen::Index k) {
  const Eigen::MatrixXd M = standard_normal(rng, k, k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i)
    if (R(i, i) < 0.0) Q.col(i) *= -1.0;
  return Q;
}

IrfResult sign_restricted_irf(const PosteriorDraws& draws, const SignRestriction& restriction, const SignOptions& opt) {
  if (opt.horizons < 1) throw ArgumentError("IRF horizon must be >= 1");
  if (opt.max_tries < 1) throw ArgumentError("max_tries must be >= 1");
  if (draws.phi.empty()) throw ArgumentError("IRFs need at least one posterior draw");
  restriction.validate(draws.k, false);
  int needed = opt.horizons;
  for (int h : restriction.horizons) needed = std::max(needed, h + 1);

  IrfResult irf;
  irf.names = draws.names;
  irf.horizons = opt.horizons;
  irf.identified_shock = restriction.shock;
  const Eigen::Index k = draws.k;
  for (std::size_t d = 0; d < draws.retained(); ++d) {
    Eigen::LLT<Eigen::MatrixXd> llt(draws.sigma[d]);
    if (llt.info() != Eigen::Success) {
      ++irf.skipped;
      continue;
    }
    const Eigen::MatrixXd omega0 = llt.matrixU();  // Sigma = Omega0' Omega0
    const auto psi = ma_coefficients(draws.coefficients(d).lags, needed);
    Rng rng = make_stream(opt.seed, d);
    bool found = false;
    for (int t = 0; t < opt.max_tries && !found; ++t) {
      ++irf.tries;
      const Eigen::MatrixXd omega = random_rotation(rng, k) * omega0;
      const Eigen::MatrixXd impact = omega.transpose();
      bool ok = true;
      for (int h : restriction.horizons) {
        const Eigen::VectorXd resp = psi[h] * impact.col(restriction.shock);
        for (Eigen::Index i = 0; i < k && ok; ++i)
          if (restriction.signs[i] != 0 && !(restriction.signs[i] * resp(i) > 0.0)) ok = false;
        if (!ok) break;
      }
      if (!ok) continue;
      found = true;
      ++irf.accepted;
      std::vector<Eigen::MatrixXd> resp(opt.horizons);
      for (int h = 0; h < opt.horizons; ++h) resp[h] = psi[h] * impact;
      irf.responses.push_back(std::move(resp));
    }
    if (!found) ++irf.skipped;
  }
  if (irf.responses.empty()) {
    throw ResultError(fmt::format("no rotation satisfied the sign restrictions ({} tries, acceptance rate 0)", irf.tries));
  }
  summarize_irf(irf, opt.levels);
  return irf;
}

}  // namespace nsbvar
