#include "nsbvar/state_space.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nsbvar/random.hpp"
#include "nsbvar/var_engine.hpp"

namespace nsbvar {

Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  if (Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff() >= 1.0) {
    throw NumericError("stationary covariance requires a stable transition matrix");
  }
  // vec(P) = (I - A (x) A)^{-1} vec(Q)
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = A(i, j) * A;
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) - kron;
  const Eigen::VectorXd vq = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::VectorXd vp = lhs.partialPivLu().solve(vq);
  Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(vp.data(), n, n);
  return 0.5 * (P + P.transpose());
}

void SsmParams::validate() const {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (!(Z(i, i) > 0.0)) throw ArgumentError("Z must have a positive diagonal");
    for (int j = i + 1; j < 3; ++j)
      if (Z(i, j) != 0.0) throw ArgumentError("Z must be lower triangular");
  }
  if (w.size() == 0 || !(w.array() > 0.0).all()) throw ArgumentError("measurement sds must be > 0");
}

Eigen::VectorXd pack(const SsmParams& p) {
  p.validate();
  Eigen::VectorXd v(p.free_parameter_count());
  Eigen::Index i = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v(i++) = p.A(r, c);
  for (int r = 0; r < 3; ++r) v(i++) = p.mu(r);
  v(i++) = std::log(p.lambda);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c <= r; ++c) v(i++) = r == c ? std::log(p.Z(r, c)) : p.Z(r, c);
  for (Eigen::Index m = 0; m < p.w.size(); ++m) v(i++) = std::log(p.w(m));
  return v;
}

SsmParams unpack(const Eigen::VectorXd& v, Eigen::Index num_maturities) {
  if (num_maturities < 1 || v.size() != 19 + num_maturities) {
    throw ArgumentError(fmt::format("packed parameter vector has length {}, expected {}", v.size(), 19 + num_maturities));
  }
  SsmParams p;
  Eigen::Index i = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.A(r, c) = v(i++);
  for (int r = 0; r < 3; ++r) p.mu(r) = v(i++);
  p.lambda = std::exp(v(i++));
  p.Z.setZero();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c <= r; ++c) p.Z(r, c) = r == c ? std::exp(v(i++)) : v(i++);
  p.w.resize(num_maturities);
  for (Eigen::Index m = 0; m < num_maturities; ++m) p.w(m) = std::exp(v(i++));
  return p;
}

LinearGaussianSsm<double> dns_system(const SsmParams& p, const std::vector<int>& maturities) {
  if (static_cast<Eigen::Index>(maturities.size()) != p.w.size()) {
    throw ArgumentError("measurement sd count does not match the panel maturities");
  }
  LinearGaussianSsm<double> m;
  m.A = p.A;
  m.Q = p.sigma_eta();
  m.H = ns_loadings(p.lambda, maturities).matrix;
  m.R = p.sigma_eps();
  return m;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> default_initial_state(const SsmParams& p) {
  const Eigen::MatrixXd A = p.A;
  const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  Eigen::MatrixXd P0 = 10.0 * Eigen::MatrixXd::Identity(3, 3);
  if (rho < 1.0) P0 = stationary_covariance(A, p.sigma_eta());
  return {Eigen::VectorXd::Zero(3), P0};
}

namespace {

Eigen::MatrixXd intercept_adjusted(const SsmParams& p, const YieldPanel& panel, const Eigen::MatrixXd& loadings) {
  const Eigen::VectorXd level = loadings * p.mu;
  return panel.yields.rowwise() - level.transpose();
}

}  // namespace

DnsFilterOutput kalman_filter(const SsmParams& p, const YieldPanel& panel, const Eigen::VectorXd& init_state,
                              const Eigen::MatrixXd& init_cov) {
  const auto sys = dns_system(p, panel.maturities);
  return kalman_filter<double>(sys, intercept_adjusted(p, panel, sys.H), init_state, init_cov);
}

DnsFilterOutput kalman_filter(const SsmParams& p, const YieldPanel& panel) {
  const auto [x0, P0] = default_initial_state(p);
  return kalman_filter(p, panel, x0, P0);
}

DnsSmootherOutput kalman_smoother(const DnsFilterOutput& f, const SsmParams& p) {
  return kalman_smoother<double>(f, Eigen::MatrixXd(p.A));
}

Eigen::MatrixXd smoothed_factors(const DnsSmootherOutput& s, const SsmParams& p) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.state.size()), 3);
  for (std::size_t t = 0; t < s.state.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = (s.state[t] + p.mu).transpose();
  return out;
}

double dns_log_likelihood(const SsmParams& p, const YieldPanel& panel) {
  try {
    return kalman_filter(p, panel).log_likelihood;
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

MleResult fit_mle(const YieldPanel& panel, const SsmParams& init, const QuasiNewtonOptions& options) {
  init.validate();
  const Eigen::Index M = panel.num_maturities();
  const double ll0 = dns_log_likelihood(init, panel);
  if (!std::isfinite(ll0)) throw ArgumentError("log-likelihood is not finite at the initial parameters");
  auto negloglik = [&](const Eigen::VectorXd& v) {
    const SsmParams p = unpack(v, M);
    return -dns_log_likelihood(p, panel);
  };
  MleResult r;
  r.initial_log_likelihood = ll0;
  r.optimizer = minimize_bfgs(negloglik, pack(init), options);
  r.params = unpack(r.optimizer.x, M);
  r.filter = kalman_filter(r.params, panel);
  r.log_likelihood = r.filter.log_likelihood;
  return r;
}

SsmParams init_from_two_step(const YieldPanel& panel, double lambda0) {
  const CrossSectionFit cs = fit_cross_section(panel, lambda0);
  const VarModel var = fit_var(cs.factors, 1, true);
  SsmParams p;
  p.lambda = lambda0;
  p.A = var.coef.lags[0];
  p.mu = cs.factors.values.colwise().mean().transpose();
  // Small jitter keeps the factor defined for (near) noiseless factor paths.
  const double jitter = 1e-12 * std::max(1.0, var.sigma.trace());
  p.Z = cholesky_lower(var.sigma + jitter * Eigen::MatrixXd::Identity(3, 3), "VAR innovation covariance");
  for (int i = 0; i < 3; ++i) p.Z(i, i) = std::max(p.Z(i, i), 1e-6);
  const Eigen::Index M = panel.num_maturities();
  p.w.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const auto res = cs.residuals.col(m);
    const double mean = res.mean();
    const double var_m = (res.array() - mean).square().sum() / static_cast<double>(std::max<Eigen::Index>(1, res.size() - 1));
    p.w(m) = std::max(std::sqrt(var_m), 1e-4);
  }
  return p;
}

YieldPanel simulate_panel(const SsmParams& p, const std::vector<int>& maturities, Eigen::Index T,
                          std::uint64_t seed, MonthStamp start) {
  const auto sys = dns_system(p, maturities);
  const auto [x0, P0] = default_initial_state(p);
  Rng rng = make_stream(seed, 0);
  const Eigen::MatrixXd Lq = cholesky_lower(sys.Q, "Sigma_eta");
  Eigen::VectorXd x = draw_mvn(rng, x0, cholesky_lower(P0, "initial covariance"));
  YieldPanel panel;
  panel.maturities = maturities;
  panel.yields.resize(T, static_cast<Eigen::Index>(maturities.size()));
  panel.macro.resize(T, 0);
  MonthStamp d = start;
  for (Eigen::Index t = 0; t < T; ++t) {
    x = p.A * x + Lq * standard_normal(rng, 3, 1);
    const Eigen::VectorXd noise = p.w.cwiseProduct(Eigen::VectorXd(standard_normal(rng, p.w.size(), 1)));
    panel.yields.row(t) = (sys.H * (x + p.mu) + noise).transpose();
    panel.dates.push_back(d);
    d = d.next();
  }
  return panel;
}

void write_params(std::ostream& out, const SsmParams& p) {
  out << "# dynamic Nelson-Siegel state-space parameters\n";
  out << fmt::format("lambda = {:.17g}\n", p.lambda);
  auto row = [](const auto& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += fmt::format("{}{:.17g}", i ? "," : "", v(i));
    return s;
  };
  out << "mu = " << row(p.mu) << '\n';
  for (int r = 0; r < 3; ++r) out << "A." << r << " = " << row(Eigen::RowVector3d(p.A.row(r))) << '\n';
  for (int r = 0; r < 3; ++r) out << "Z." << r << " = " << row(Eigen::RowVector3d(p.Z.row(r))) << '\n';
  out << "w = " << row(p.w) << '\n';
}

SsmParams read_params(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const auto cfg = KeyValueConfig::parse(ss.str(), "params");
  SsmParams p;
  p.lambda = parse_double(cfg.require("lambda"), "lambda");
  auto vec3 = [&](const std::string& key) {
    const auto v = cfg.get_doubles(key, {});
    if (v.size() != 3) throw ArgumentError(fmt::format("params: '{}' needs 3 values", key));
    return Eigen::Vector3d(v[0], v[1], v[2]);
  };
  p.mu = vec3("mu");
  for (int r = 0; r < 3; ++r) {
    p.A.row(r) = vec3("A." + std::to_string(r)).transpose();
    p.Z.row(r) = vec3("Z." + std::to_string(r)).transpose();
  }
  const auto w = cfg.get_doubles("w", {});
  p.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  p.validate();
  return p;
}

}  // namespace nsbvar
