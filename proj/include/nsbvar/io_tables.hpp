#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/bvar.hpp"
#include "nsbvar/ns_factors.hpp"
#include "nsbvar/optim.hpp"
#include "nsbvar/structural.hpp"
#include "nsbvar/var_engine.hpp"

namespace nsbvar {

// CSV writers. Every table starts with '#' provenance lines; values use %.10g
// unless they are meant to be read back.

struct TableHeader {
  std::string title;
  std::string config_hash;
};

void write_header(std::ostream& out, const TableHeader& h);

void write_factors(std::ostream& out, const FactorSeries& f, const TableHeader& h);
void write_loadings(std::ostream& out, const NsLoadings& l, const TableHeader& h);
void write_pca_explained(std::ostream& out, const PcaResult& p, const TableHeader& h);
void write_pca_components(std::ostream& out, const PcaResult& p, const std::vector<std::string>& columns,
                          const TableHeader& h);
void write_var_model(std::ostream& out, const VarModel& m, const TableHeader& h);
// Rows h = 1..H: mean then lower/upper per level for each variable.
void write_path_forecast(std::ostream& out, const PathForecast& f, const std::vector<std::string>& names,
                         const TableHeader& h);
void write_states(std::ostream& out, const std::vector<MonthStamp>& dates, const Eigen::MatrixXd& states,
                  const std::vector<std::string>& names, const TableHeader& h);
void write_optimizer_trace(std::ostream& out, const QuasiNewtonResult& r, const TableHeader& h);
// Long format: horizon, variable, mean, sd, q<level>...
void write_predictive(std::ostream& out, const PredictiveDistribution& p, const TableHeader& h);
// Rows are maturities; mean and sd columns per listed horizon.
void write_yield_forecast(std::ostream& out, const YieldForecast& y, const std::vector<int>& horizons,
                          const TableHeader& h);
// Long format: h, response, shock, one column per band level. Only the identified
// shock is written when the result carries one.
void write_irf(std::ostream& out, const IrfResult& irf, const TableHeader& h);
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& columns,
                  const TableHeader& h);

}  // namespace nsbvar
