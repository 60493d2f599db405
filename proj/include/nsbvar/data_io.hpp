#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsbvar/config.hpp"

namespace nsbvar {

// Calendar month, written as YYYY-MM.
struct MonthStamp {
  int year = 0;
  int month = 1;  // 1..12

  static MonthStamp parse(const std::string& text);
  std::string str() const;
  int ordinal() const { return year * 12 + (month - 1); }
  MonthStamp next() const { return month == 12 ? MonthStamp{year + 1, 1} : MonthStamp{year, month + 1}; }

  friend bool operator==(const MonthStamp&, const MonthStamp&) = default;
  friend auto operator<=>(const MonthStamp& a, const MonthStamp& b) { return a.ordinal() <=> b.ordinal(); }
};

// Monthly panel of yields (percent per annum) by maturity in months, plus optional
// macro columns aligned to the same dates.
struct YieldPanel {
  std::vector<MonthStamp> dates;
  std::vector<int> maturities;
  Eigen::MatrixXd yields;  // T x M
  std::vector<std::string> macro_names;
  Eigen::MatrixXd macro;  // T x q (q may be 0)

  Eigen::Index rows() const { return yields.rows(); }
  Eigen::Index num_maturities() const { return yields.cols(); }

  // Throws DataError describing the first violated invariant.
  void validate() const;

  // Yields followed by macro columns, T x (M + q).
  Eigen::MatrixXd all_columns() const;
  // "3","6",... followed by macro names.
  std::vector<std::string> column_names() const;

  // Rows [begin, begin+count).
  YieldPanel slice(Eigen::Index begin, Eigen::Index count) const;
  // Column index of a maturity; throws ArgumentError when absent.
  Eigen::Index maturity_index(int months) const;
};

enum class MissingPolicy { Reject, Interpolate };

// Logical role -> column name.
//
//   date_column = DATE
//   yield.3     = GS3M        (maturity in months -> column)
//   macro.unrate = UNRATE     (macro name -> column)
//   missing     = reject | interpolate
//
// When no yield.* keys are given, every column whose header is a positive
// integer is taken as a maturity in months.
struct PanelSchema {
  std::string date_column = "date";
  std::vector<std::pair<int, std::string>> yields;
  std::vector<std::pair<std::string, std::string>> macro;
  MissingPolicy missing = MissingPolicy::Reject;

  static PanelSchema from_config(const KeyValueConfig& cfg);
};

YieldPanel load_panel(const std::filesystem::path& path, const PanelSchema& schema);
YieldPanel read_panel(std::istream& in, const PanelSchema& schema, const std::string& origin = "<stream>");

// Header `date,<maturities...>,<macro names...>`; values at full precision.
void write_panel(std::ostream& out, const YieldPanel& panel);

struct SplitPanel {
  YieldPanel train;
  YieldPanel test;
};

SplitPanel split_panel(const YieldPanel& panel, double train_fraction);

struct ColumnStats {
  std::string name;
  double min = 0, median = 0, mean = 0, max = 0, sd = 0;
};

struct DescriptiveStats {
  std::vector<ColumnStats> columns;
};

// Sample (T-1) standard deviation; sd is 0 when T == 1.
DescriptiveStats describe(const YieldPanel& panel);
ColumnStats describe_column(const Eigen::Ref<const Eigen::VectorXd>& x, const std::string& name);

void write_stats(std::ostream& out, const DescriptiveStats& stats);

}  // namespace nsbvar
