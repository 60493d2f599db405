#include "nsbvar/evaluation.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "nsbvar/error.hpp"

namespace nsbvar {

Eigen::VectorXd msfe(const Eigen::Ref<const Eigen::MatrixXd>& forecast, const Eigen::Ref<const Eigen::MatrixXd>& actual) {
  if (forecast.rows() != actual.rows() || forecast.cols() != actual.cols()) {
    throw ArgumentError(fmt::format("forecast is {}x{} but actual is {}x{}", forecast.rows(), forecast.cols(),
                                    actual.rows(), actual.cols()));
  }
  if (forecast.rows() == 0) throw ArgumentError("MSFE needs at least one evaluation point");
  return (forecast - actual).array().square().colwise().mean().transpose();
}

const Eigen::MatrixXd& EvalReport::method_msfe(const std::string& method) const {
  const auto it = std::find(methods.begin(), methods.end(), method);
  if (it == methods.end()) throw ArgumentError(fmt::format("no method '{}' in report", method));
  return msfe[static_cast<std::size_t>(it - methods.begin())];
}

namespace {

void check_horizons(const std::vector<int>& horizons) {
  if (horizons.empty()) throw ArgumentError("at least one horizon is required");
  for (int h : horizons)
    if (h < 1) throw ArgumentError("horizons must be >= 1");
}

}  // namespace

EvalReport evaluate_horizons(const std::vector<MethodForecast>& forecasts, const YieldPanel& test,
                             const std::vector<int>& horizons, HorizonMode mode) {
  check_horizons(horizons);
  const Eigen::Index M = test.num_maturities();
  const int h_max = *std::max_element(horizons.begin(), horizons.end());
  if (h_max > test.rows()) {
    throw ArgumentError(fmt::format("horizon {} exceeds the {} test observations", h_max, test.rows()));
  }
  EvalReport rep;
  rep.maturities = test.maturities;
  rep.horizons = horizons;
  rep.mode = mode;
  for (const auto& f : forecasts) {
    if (f.path.cols() != M) throw ArgumentError(fmt::format("method '{}' forecasts {} maturities, test has {}", f.method, f.path.cols(), M));
    if (f.path.rows() < h_max) throw ArgumentError(fmt::format("method '{}' forecast path is shorter than horizon {}", f.method, h_max));
    Eigen::MatrixXd table(static_cast<Eigen::Index>(horizons.size()), M);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      const int h = horizons[i];
      if (mode == HorizonMode::Point) {
        table.row(static_cast<Eigen::Index>(i)) = msfe(f.path.row(h - 1), test.yields.row(h - 1)).transpose();
      } else {
        table.row(static_cast<Eigen::Index>(i)) = msfe(f.path.topRows(h), test.yields.topRows(h)).transpose();
      }
    }
    rep.methods.push_back(f.method);
    rep.msfe.push_back(std::move(table));
  }
  return rep;
}

EvalReport evaluate_rolling(const std::string& method, const Forecaster& forecaster, const YieldPanel& panel,
                            Eigen::Index train_size, const std::vector<int>& horizons) {
  check_horizons(horizons);
  const int h_max = *std::max_element(horizons.begin(), horizons.end());
  const Eigen::Index T = panel.rows(), M = panel.num_maturities();
  if (train_size < 2 || train_size + h_max > T) throw ArgumentError("rolling window leaves no evaluation origin");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(horizons.size()), M);
  Eigen::Index origins = 0;
  for (Eigen::Index o = train_size; o + h_max <= T; ++o) {
    const YieldPanel train = panel.slice(0, o);
    const Eigen::MatrixXd path = forecaster(train, h_max);
    if (path.rows() < h_max || path.cols() != M) throw ArgumentError("forecaster returned a path of the wrong shape");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      const int h = horizons[i];
      sum.row(static_cast<Eigen::Index>(i)) += (path.row(h - 1) - panel.yields.row(o + h - 1)).array().square().matrix();
    }
    ++origins;
  }
  EvalReport rep;
  rep.maturities = panel.maturities;
  rep.horizons = horizons;
  rep.methods = {method};
  rep.msfe = {sum / static_cast<double>(origins)};
  rep.mode = HorizonMode::Point;
  return rep;
}

ResidualSummary summarize_residuals(const std::string& method, const Eigen::Ref<const Eigen::MatrixXd>& residuals) {
  if (residuals.rows() < 2) throw ArgumentError("residual summary needs at least two rows");
  ResidualSummary s;
  s.method = method;
  s.mean = residuals.colwise().mean().transpose();
  s.sd.resize(residuals.cols());
  for (Eigen::Index m = 0; m < residuals.cols(); ++m) {
    s.sd(m) = std::sqrt((residuals.col(m).array() - s.mean(m)).square().sum() / static_cast<double>(residuals.rows() - 1));
  }
  return s;
}

void write_msfe_table(std::ostream& out, const EvalReport& rep) {
  if (!rep.config_hash.empty()) out << "# config_hash = " << rep.config_hash << '\n';
  if (!rep.train_end.empty()) out << "# train_end = " << rep.train_end << '\n';
  out << "# mode = " << (rep.mode == HorizonMode::Point ? "point" : "path") << '\n';
  out << "maturity";
  for (int h : rep.horizons)
    for (const auto& m : rep.methods) out << ",h" << h << ':' << m;
  out << '\n';
  for (std::size_t j = 0; j < rep.maturities.size(); ++j) {
    out << rep.maturities[j];
    for (std::size_t i = 0; i < rep.horizons.size(); ++i)
      for (std::size_t m = 0; m < rep.methods.size(); ++m)
        out << fmt::format(",{:.10g}", rep.msfe[m](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

void write_residual_table(std::ostream& out, const EvalReport& rep, double scale) {
  if (!rep.config_hash.empty()) out << "# config_hash = " << rep.config_hash << '\n';
  out << "maturity";
  for (const auto& r : rep.residuals) out << ",mean:" << r.method << ",sd:" << r.method;
  out << '\n';
  for (std::size_t j = 0; j < rep.maturities.size(); ++j) {
    out << rep.maturities[j];
    for (const auto& r : rep.residuals) {
      const auto idx = static_cast<Eigen::Index>(j);
      out << fmt::format(",{:.10g},{:.10g}", scale * r.mean(idx), scale * r.sd(idx));
    }
    out << '\n';
  }
}

}  // namespace nsbvar
