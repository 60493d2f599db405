#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nsbvar/bvar.hpp"
#include "nsbvar/config.hpp"
#include "nsbvar/error.hpp"
#include "nsbvar/random.hpp"

namespace nsbvar {

namespace {

// Any B with B B' = sigma; zero for a zero matrix, eigen square root for singular PSD input.
Eigen::MatrixXd innovation_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

// Linear interpolation between order statistics of a sorted sample.
double sorted_quantile(const std::vector<double>& v, double q) {
  if (v.size() == 1) return v.front();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] + w * (v[hi] - v[lo]);
}

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, bool& ok) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  ok = llt.info() == Eigen::Success;
  if (!ok) return 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(x - mean);
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

}  // namespace

PredictiveDistribution predict(const PosteriorDraws& draws, const Eigen::Ref<const Eigen::MatrixXd>& origin,
                               const PredictOptions& opt, const std::optional<Eigen::VectorXd>& realized) {
  if (draws.phi.empty()) throw ArgumentError("predict needs at least one posterior draw");
  if (opt.horizons < 1) throw ArgumentError("forecast horizon must be >= 1");
  const Eigen::Index k = draws.k;
  const int p = draws.p, H = opt.horizons;
  if (origin.rows() != p || origin.cols() != k) {
    throw ArgumentError(fmt::format("forecast origin must be {} x {}", p, k));
  }
  if (realized && realized->size() != k) throw ArgumentError("realized vector has the wrong length");
  for (double q : opt.quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile levels must lie in [0, 1]");

  std::vector<double> levels = opt.quantiles;
  std::sort(levels.begin(), levels.end());

  const std::size_t D = draws.retained();
  std::vector<Eigen::MatrixXd> paths;
  paths.reserve(D);
  std::vector<double> log_dens;
  for (std::size_t d = 0; d < D; ++d) {
    const VarCoefficients c = draws.coefficients(d);
    if (opt.stable_only && spectral_radius(c.lags) >= 1.0) continue;
    const Eigen::MatrixXd B = innovation_factor(draws.sigma[d]);
    Rng rng = make_stream(opt.seed, d);
    // hist row 0 is the newest observation.
    std::vector<Eigen::VectorXd> hist(p);
    for (int l = 0; l < p; ++l) hist[l] = origin.row(p - 1 - l).transpose();
    Eigen::MatrixXd path(H, k);
    for (int h = 0; h < H; ++h) {
      Eigen::VectorXd m = c.intercept;
      for (int l = 0; l < p; ++l) m += c.lags[l] * hist[l];
      if (h == 0 && realized) {
        bool ok = false;
        const double ld = log_gaussian(*realized, m, draws.sigma[d], ok);
        if (ok) log_dens.push_back(ld);
      }
      Eigen::VectorXd y = m + B * standard_normal(rng, k, 1);
      path.row(h) = y.transpose();
      for (int l = p - 1; l > 0; --l) hist[l] = hist[l - 1];
      if (p > 0) hist[0] = y;
    }
    paths.push_back(std::move(path));
  }
  if (paths.empty()) throw ResultError("no draws left after the stability filter");

  PredictiveDistribution out;
  out.names = draws.names;
  out.draws_used = paths.size();
  out.quantile_levels = levels;
  const double n = static_cast<double>(paths.size());
  out.mean = Eigen::MatrixXd::Zero(H, k);
  for (const auto& x : paths) out.mean += x;
  out.mean /= n;
  out.sd = Eigen::MatrixXd::Zero(H, k);
  out.covariance.assign(H, Eigen::MatrixXd::Zero(k, k));
  for (const auto& x : paths) {
    const Eigen::MatrixXd dev = x - out.mean;
    for (int h = 0; h < H; ++h) out.covariance[h] += dev.row(h).transpose() * dev.row(h);
  }
  const double denom = paths.size() > 1 ? n - 1.0 : 1.0;
  for (int h = 0; h < H; ++h) {
    out.covariance[h] /= denom;
    out.sd.row(h) = out.covariance[h].diagonal().cwiseMax(0.0).cwiseSqrt().transpose();
  }
  out.quantiles.assign(levels.size(), Eigen::MatrixXd(H, k));
  std::vector<double> column(paths.size());
  for (int h = 0; h < H; ++h)
    for (Eigen::Index j = 0; j < k; ++j) {
      for (std::size_t d = 0; d < paths.size(); ++d) column[d] = paths[d](h, j);
      std::sort(column.begin(), column.end());
      for (std::size_t q = 0; q < levels.size(); ++q) out.quantiles[q](h, j) = sorted_quantile(column, levels[q]);
    }
  if (realized && !log_dens.empty()) {
    // log mean_d exp(log_dens_d), over all used draws.
    const double mx = *std::max_element(log_dens.begin(), log_dens.end());
    double acc = 0.0;
    for (double v : log_dens) acc += std::exp(v - mx);
    out.log_predictive_likelihood = mx + std::log(acc / static_cast<double>(log_dens.size()));
  }
  if (opt.keep_paths) out.paths = std::move(paths);
  return out;
}

YieldForecast reconstruct_yields(const Eigen::MatrixXd& factor_mean, const std::vector<Eigen::MatrixXd>& factor_cov,
                                 const NsLoadings& loadings) {
  if (factor_mean.cols() < 3) throw ArgumentError("yield reconstruction needs level, slope and curvature columns");
  if (loadings.matrix.cols() != 3) throw ArgumentError("loadings must have three columns");
  const Eigen::Index H = factor_mean.rows();
  if (!factor_cov.empty() && static_cast<Eigen::Index>(factor_cov.size()) != H) {
    throw ArgumentError("one factor covariance per horizon is required");
  }
  const Eigen::MatrixXd& Lam = loadings.matrix;
  YieldForecast out;
  for (Eigen::Index m = 0; m < loadings.maturities.size(); ++m) out.maturities.push_back(static_cast<int>(loadings.maturities(m)));
  out.mean = factor_mean.leftCols(3) * Lam.transpose();
  out.sd = Eigen::MatrixXd::Zero(H, Lam.rows());
  for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(factor_cov.size()); ++h) {
    const Eigen::MatrixXd& c = factor_cov[h];
    if (c.rows() < 3 || c.cols() != c.rows()) throw ArgumentError("factor covariance has the wrong shape");
    const Eigen::MatrixXd yc = Lam * c.topLeftCorner(3, 3) * Lam.transpose();
    out.sd.row(h) = yc.diagonal().cwiseMax(0.0).cwiseSqrt().transpose();
  }
  return out;
}

YieldForecast reconstruct_yields(const PredictiveDistribution& pred, const NsLoadings& loadings) {
  return reconstruct_yields(pred.mean, pred.covariance, loadings);
}

YieldForecast reconstruct_yields_from_paths(const std::vector<Eigen::MatrixXd>& paths, const NsLoadings& loadings) {
  if (paths.empty()) throw ArgumentError("no paths to transform");
  if (paths.front().cols() < 3) throw ArgumentError("yield reconstruction needs level, slope and curvature columns");
  const Eigen::MatrixXd& Lam = loadings.matrix;
  const Eigen::Index H = paths.front().rows(), M = Lam.rows();
  YieldForecast out;
  for (Eigen::Index m = 0; m < loadings.maturities.size(); ++m) out.maturities.push_back(static_cast<int>(loadings.maturities(m)));
  out.mean = Eigen::MatrixXd::Zero(H, M);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(H, M);
  for (const auto& x : paths) {
    if (x.rows() != H) throw ArgumentError("paths have inconsistent horizons");
    out.mean += x.leftCols(3) * Lam.transpose();
  }
  const double n = static_cast<double>(paths.size());
  out.mean /= n;
  for (const auto& x : paths) sq += (x.leftCols(3) * Lam.transpose() - out.mean).array().square().matrix();
  out.sd = (sq / std::max(1.0, n - 1.0)).cwiseSqrt();
  return out;
}

void write_draws(std::ostream& out, const PosteriorDraws& d, const std::string& config_hash) {
  std::string names;
  for (std::size_t i = 0; i < d.names.size(); ++i) names += (i ? "," : "") + d.names[i];
  out << "# nsbvar posterior draws\n";
  out << "# prior = " << d.prior << '\n';
  out << "# seed = " << d.seed << '\n';
  out << "# total = " << d.total << '\n';
  out << "# burned = " << d.burned << '\n';
  out << "# retained = " << d.retained() << '\n';
  out << "# analytic = " << (d.analytic ? "true" : "false") << '\n';
  out << "# k = " << d.k << '\n';
  out << "# p = " << d.p << '\n';
  out << "# intercept = " << (d.intercept ? "true" : "false") << '\n';
  out << "# names = " << names << '\n';
  if (!config_hash.empty()) out << "# config_hash = " << config_hash << '\n';
  const Eigen::Index r = d.r(), k = d.k;
  const Eigen::Index ng = d.gamma.empty() ? 0 : d.gamma.front().size();
  const Eigen::Index nd = d.delta.empty() ? 0 : d.delta.front().size();
  out << "draw";
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < r; ++i) out << ",phi_" << i << '_' << j;
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) out << ",sigma_" << i << '_' << j;
  for (Eigen::Index i = 0; i < ng; ++i) out << ",gamma_" << i;
  for (Eigen::Index i = 0; i < nd; ++i) out << ",delta_" << i;
  out << '\n';
  for (std::size_t s = 0; s < d.retained(); ++s) {
    std::string line = std::to_string(s);
    const Eigen::MatrixXd& phi = d.phi[s];
    const Eigen::MatrixXd& sig = d.sigma[s];
    for (Eigen::Index i = 0; i < phi.size(); ++i) line += fmt::format(",{:.17g}", phi.data()[i]);
    for (Eigen::Index i = 0; i < sig.size(); ++i) line += fmt::format(",{:.17g}", sig.data()[i]);
    for (Eigen::Index i = 0; i < ng; ++i) line += fmt::format(",{}", d.gamma[s](i));
    for (Eigen::Index i = 0; i < nd; ++i) line += fmt::format(",{}", d.delta[s](i));
    out << line << '\n';
  }
}

PosteriorDraws read_draws(std::istream& in) {
  std::string line, header_text;
  std::vector<std::string> rows;
  std::string columns;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Free-text title lines carry no fields.
      if (line.find('=') != std::string::npos) header_text += line.substr(1) + '\n';
    } else if (columns.empty()) {
      columns = line;
    } else {
      rows.push_back(line);
    }
  }
  const auto cfg = KeyValueConfig::parse(header_text, "draws header");
  PosteriorDraws d;
  d.prior = cfg.get_string("prior", "");
  d.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  d.total = static_cast<std::size_t>(cfg.get_int("total", 0));
  d.burned = static_cast<std::size_t>(cfg.get_int("burned", 0));
  d.analytic = cfg.get_bool("analytic", false);
  d.k = cfg.get_int("k", 0);
  d.p = static_cast<int>(cfg.get_int("p", 0));
  d.intercept = cfg.get_bool("intercept", true);
  d.names = cfg.get_strings("names", {});
  if (d.k < 1 || d.p < 1) throw SchemaError("draws header is missing k or p");
  const Eigen::Index r = d.r(), k = d.k;
  const auto col_names = split_list(columns);
  Eigen::Index ng = 0, nd = 0;
  for (const auto& c : col_names) {
    if (c.rfind("gamma_", 0) == 0) ++ng;
    if (c.rfind("delta_", 0) == 0) ++nd;
  }
  const std::size_t expected = 1 + static_cast<std::size_t>(r * k + k * k + ng + nd);
  if (col_names.size() != expected) throw SchemaError("draws column count does not match the header shape");
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto cells = split_list(rows[s]);
    if (cells.size() != expected) throw SchemaError(fmt::format("draws row {} has {} cells", s + 1, cells.size()));
    std::size_t c = 1;
    Eigen::MatrixXd phi(r, k), sig(k, k);
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = parse_double(cells[c++], "phi");
    for (Eigen::Index i = 0; i < sig.size(); ++i) sig.data()[i] = parse_double(cells[c++], "sigma");
    d.phi.push_back(std::move(phi));
    d.sigma.push_back(std::move(sig));
    if (ng) {
      Eigen::VectorXi g(ng);
      for (Eigen::Index i = 0; i < ng; ++i) g(i) = static_cast<int>(parse_int(cells[c++], "gamma"));
      d.gamma.push_back(std::move(g));
    }
    if (nd) {
      Eigen::VectorXi g(nd);
      for (Eigen::Index i = 0; i < nd; ++i) g(i) = static_cast<int>(parse_int(cells[c++], "delta"));
      d.delta.push_back(std::move(g));
    }
  }
  return d;
}

}  // namespace nsbvar
