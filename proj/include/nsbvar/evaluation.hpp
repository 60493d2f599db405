#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/data_io.hpp"

namespace nsbvar {

// Per-column mean of squared errors over the rows.
Eigen::VectorXd msfe(const Eigen::Ref<const Eigen::MatrixXd>& forecast, const Eigen::Ref<const Eigen::MatrixXd>& actual);

enum class HorizonMode {
  Point,  // error at T + h only
  Path,   // mean over T + 1 .. T + h
};

// A forecast path from the end of the training sample: row h-1 is T + h.
struct MethodForecast {
  std::string method;
  Eigen::MatrixXd path;  // H x M
};

struct ResidualSummary {
  std::string method;
  Eigen::VectorXd mean;  // per maturity
  Eigen::VectorXd sd;
};

struct EvalReport {
  std::vector<int> maturities;
  std::vector<int> horizons;
  std::vector<std::string> methods;
  std::vector<Eigen::MatrixXd> msfe;  // per method: horizons x maturities
  std::vector<ResidualSummary> residuals;
  HorizonMode mode = HorizonMode::Point;
  std::string train_end;
  std::string config_hash;

  const Eigen::MatrixXd& method_msfe(const std::string& method) const;
};

// Compares each method's path with the test panel at the requested horizons.
EvalReport evaluate_horizons(const std::vector<MethodForecast>& forecasts, const YieldPanel& test,
                             const std::vector<int>& horizons, HorizonMode mode = HorizonMode::Point);

// Rolling-origin evaluation: for origins o = train_size .. T - h_max, calls
// forecaster(first o rows, h_max) and averages squared errors at each horizon.
using Forecaster = std::function<Eigen::MatrixXd(const YieldPanel& train, int horizons)>;
EvalReport evaluate_rolling(const std::string& method, const Forecaster& forecaster, const YieldPanel& panel,
                            Eigen::Index train_size, const std::vector<int>& horizons);

// Means and sample sds of measurement residuals per maturity.
ResidualSummary summarize_residuals(const std::string& method, const Eigen::Ref<const Eigen::MatrixXd>& residuals);

// Rows are maturities; one column per (horizon, method).
void write_msfe_table(std::ostream& out, const EvalReport& report);
// Rows are maturities; mean and sd columns per method, scaled (e.g. 100 for basis points).
void write_residual_table(std::ostream& out, const EvalReport& report, double scale = 100.0);

}  // namespace nsbvar
