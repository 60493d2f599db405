#include "nsbvar/io_tables.hpp"

#include <ostream>

#include <fmt/format.h>

#include "nsbvar/error.hpp"

namespace nsbvar {

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string level_label(double q) { return fmt::format("q{:g}", 100.0 * q); }

}  // namespace

void write_header(std::ostream& out, const TableHeader& h) {
  if (!h.title.empty()) out << "# " << h.title << '\n';
  if (!h.config_hash.empty()) out << "# config_hash = " << h.config_hash << '\n';
}

void write_factors(std::ostream& out, const FactorSeries& f, const TableHeader& h) {
  write_header(out, h);
  out << "date";
  for (const auto& n : f.names) out << ',' << n;
  out << '\n';
  for (Eigen::Index t = 0; t < f.values.rows(); ++t) {
    out << (static_cast<std::size_t>(t) < f.dates.size() ? f.dates[t].str() : std::to_string(t + 1));
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) out << ',' << fmt::format("{:.17g}", f.values(t, j));
    out << '\n';
  }
}

void write_loadings(std::ostream& out, const NsLoadings& l, const TableHeader& h) {
  write_header(out, h);
  out << "# lambda = " << fmt::format("{:.17g}", l.lambda) << '\n';
  out << "maturity,level,slope,curvature\n";
  for (Eigen::Index m = 0; m < l.matrix.rows(); ++m) {
    out << fmt::format("{:g}", l.maturities(m));
    for (int c = 0; c < 3; ++c) out << ',' << fmt::format("{:.17g}", l.matrix(m, c));
    out << '\n';
  }
}

void write_pca_explained(std::ostream& out, const PcaResult& p, const TableHeader& h) {
  write_header(out, h);
  out << "component,eigenvalue,proportion,cumulative\n";
  const double total = p.eigenvalues.cwiseMax(0.0).sum();
  double cum = 0.0;
  for (Eigen::Index i = 0; i < p.eigenvalues.size(); ++i) {
    const double prop = total > 0.0 ? std::max(p.eigenvalues(i), 0.0) / total : 0.0;
    cum += prop;
    out << "PC" << i + 1 << ',' << num(p.eigenvalues(i)) << ',' << num(prop) << ',' << num(cum) << '\n';
  }
}

void write_pca_components(std::ostream& out, const PcaResult& p, const std::vector<std::string>& columns,
                          const TableHeader& h) {
  write_header(out, h);
  out << "column";
  for (Eigen::Index c = 0; c < p.components.cols(); ++c) out << ",PC" << c + 1;
  out << '\n';
  for (Eigen::Index r = 0; r < p.components.rows(); ++r) {
    out << (static_cast<std::size_t>(r) < columns.size() ? columns[r] : std::to_string(r + 1));
    for (Eigen::Index c = 0; c < p.components.cols(); ++c) out << ',' << num(p.components(r, c));
    out << '\n';
  }
}

void write_var_model(std::ostream& out, const VarModel& m, const TableHeader& h) {
  write_header(out, h);
  const Eigen::Index k = m.k();
  out << "# p = " << m.p() << '\n';
  out << "block,equation";
  for (Eigen::Index j = 0; j < k; ++j) out << ',' << (static_cast<std::size_t>(j) < m.names.size() ? m.names[j] : std::to_string(j));
  out << '\n';
  auto name = [&](Eigen::Index i) { return static_cast<std::size_t>(i) < m.names.size() ? m.names[i] : std::to_string(i); };
  if (m.coef.has_intercept) {
    for (Eigen::Index i = 0; i < k; ++i) out << "intercept," << name(i) << ',' << num(m.coef.intercept(i)) << std::string(static_cast<std::size_t>(k - 1), ',') << '\n';
  }
  for (int l = 0; l < m.p(); ++l)
    for (Eigen::Index i = 0; i < k; ++i) {
      out << 'A' << l + 1 << ',' << name(i);
      for (Eigen::Index j = 0; j < k; ++j) out << ',' << num(m.coef.lags[l](i, j));
      out << '\n';
    }
  for (Eigen::Index i = 0; i < k; ++i) {
    out << "sigma," << name(i);
    for (Eigen::Index j = 0; j < k; ++j) out << ',' << num(m.sigma(i, j));
    out << '\n';
  }
}

void write_path_forecast(std::ostream& out, const PathForecast& f, const std::vector<std::string>& names,
                         const TableHeader& h) {
  write_header(out, h);
  out << "h";
  for (const auto& n : names) {
    out << ',' << n << ":mean";
    for (double lv : f.levels) out << ',' << n << fmt::format(":lo{:g},", 100 * lv) << n << fmt::format(":hi{:g}", 100 * lv);
  }
  out << '\n';
  for (Eigen::Index t = 0; t < f.mean.rows(); ++t) {
    out << t + 1;
    for (Eigen::Index j = 0; j < f.mean.cols(); ++j) {
      out << ',' << num(f.mean(t, j));
      for (std::size_t l = 0; l < f.levels.size(); ++l) out << ',' << num(f.lower[l](t, j)) << ',' << num(f.upper[l](t, j));
    }
    out << '\n';
  }
}

void write_states(std::ostream& out, const std::vector<MonthStamp>& dates, const Eigen::MatrixXd& states,
                  const std::vector<std::string>& names, const TableHeader& h) {
  write_header(out, h);
  out << "date";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index t = 0; t < states.rows(); ++t) {
    out << (static_cast<std::size_t>(t) < dates.size() ? dates[t].str() : std::to_string(t + 1));
    for (Eigen::Index j = 0; j < states.cols(); ++j) out << ',' << num(states(t, j));
    out << '\n';
  }
}

void write_optimizer_trace(std::ostream& out, const QuasiNewtonResult& r, const TableHeader& h) {
  write_header(out, h);
  out << "# converged = " << (r.converged ? "true" : "false") << '\n';
  out << "# stop_reason = " << to_string(r.reason) << '\n';
  out << "# evaluations = " << r.evals << '\n';
  out << "iteration,objective,first_order_optimality,evaluations,step\n";
  for (const auto& row : r.trace) {
    out << row.iteration << ',' << fmt::format("{:.15g}", row.objective) << ',' << num(row.first_order_optimality) << ','
        << row.evals << ',' << num(row.step) << '\n';
  }
}

void write_predictive(std::ostream& out, const PredictiveDistribution& p, const TableHeader& h) {
  write_header(out, h);
  out << "# draws_used = " << p.draws_used << '\n';
  if (p.log_predictive_likelihood) out << "# log_predictive_likelihood = " << num(*p.log_predictive_likelihood) << '\n';
  out << "h,variable,mean,sd";
  for (double q : p.quantile_levels) out << ',' << level_label(q);
  out << '\n';
  for (Eigen::Index t = 0; t < p.mean.rows(); ++t)
    for (Eigen::Index j = 0; j < p.mean.cols(); ++j) {
      out << t + 1 << ',' << (static_cast<std::size_t>(j) < p.names.size() ? p.names[j] : std::to_string(j)) << ','
          << num(p.mean(t, j)) << ',' << num(p.sd(t, j));
      for (const auto& q : p.quantiles) out << ',' << num(q(t, j));
      out << '\n';
    }
}

void write_yield_forecast(std::ostream& out, const YieldForecast& y, const std::vector<int>& horizons,
                          const TableHeader& h) {
  write_header(out, h);
  for (int hz : horizons)
    if (hz < 1 || hz > y.mean.rows()) throw ArgumentError(fmt::format("horizon {} is outside the forecast path", hz));
  out << "maturity";
  for (int hz : horizons) out << ",h" << hz << ":mean,h" << hz << ":sd";
  out << '\n';
  for (std::size_t m = 0; m < y.maturities.size(); ++m) {
    out << y.maturities[m];
    for (int hz : horizons) {
      out << ',' << num(y.mean(hz - 1, static_cast<Eigen::Index>(m))) << ',' << num(y.sd(hz - 1, static_cast<Eigen::Index>(m)));
    }
    out << '\n';
  }
}

void write_irf(std::ostream& out, const IrfResult& irf, const TableHeader& h) {
  write_header(out, h);
  out << "# retained = " << irf.responses.size() << '\n';
  out << "# skipped = " << irf.skipped << '\n';
  if (irf.identified_shock >= 0) {
    out << "# tries = " << irf.tries << '\n';
    out << "# acceptance_rate = " << num(irf.acceptance_rate()) << '\n';
  }
  out << "h,response,shock";
  for (double q : irf.band_levels) out << ',' << level_label(q);
  out << '\n';
  if (irf.bands.empty()) return;
  const Eigen::Index k = irf.bands.front().front().rows();
  auto name = [&](Eigen::Index i) { return static_cast<std::size_t>(i) < irf.names.size() ? irf.names[i] : std::to_string(i); };
  for (int t = 0; t < irf.horizons; ++t)
    for (Eigen::Index j = 0; j < k; ++j) {
      if (irf.identified_shock >= 0 && j != irf.identified_shock) continue;
      for (Eigen::Index i = 0; i < k; ++i) {
        out << t << ',' << name(i) << ',' << name(j);
        for (const auto& b : irf.bands) out << ',' << num(b[t](i, j));
        out << '\n';
      }
    }
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& columns,
                  const TableHeader& h) {
  write_header(out, h);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  if (!columns.empty()) out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << num(m(r, c));
    out << '\n';
  }
}

}  // namespace nsbvar
