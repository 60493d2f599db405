#include "nsbvar/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nsbvar/error.hpp"

namespace nsbvar {

MonthStamp MonthStamp::parse(const std::string& text) {
  const std::string t = trim(text);
  // Accept YYYY-MM and YYYY-MM-DD (the day is ignored).
  if (t.size() < 7 || t[4] != '-') throw DataError(fmt::format("bad month stamp '{}'", text));
  MonthStamp m;
  try {
    m.year = static_cast<int>(parse_int(t.substr(0, 4), "year"));
    m.month = static_cast<int>(parse_int(t.substr(5, 2), "month"));
  } catch (const ArgumentError&) {
    throw DataError(fmt::format("bad month stamp '{}'", text));
  }
  if (m.month < 1 || m.month > 12) throw DataError(fmt::format("bad month in '{}'", text));
  if (t.size() > 7 && (t[7] != '-' || t.size() != 10)) throw DataError(fmt::format("bad month stamp '{}'", text));
  return m;
}

std::string MonthStamp::str() const { return fmt::format("{:04d}-{:02d}", year, month); }

void YieldPanel::validate() const {
  const auto T = static_cast<Eigen::Index>(dates.size());
  if (yields.rows() != T) throw DataError("yields row count does not match dates");
  if (static_cast<Eigen::Index>(maturities.size()) != yields.cols())
    throw DataError("yields column count does not match maturities");
  if (macro.rows() != T && !(macro.size() == 0 && macro_names.empty()))
    throw DataError("macro row count does not match dates");
  if (static_cast<Eigen::Index>(macro_names.size()) != macro.cols())
    throw DataError("macro column count does not match names");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] == dates[i - 1]) throw DataError(fmt::format("duplicate month {}", dates[i].str()));
    if (dates[i].ordinal() != dates[i - 1].ordinal() + 1)
      throw DataError(fmt::format("dates not consecutive months: {} follows {}", dates[i].str(),
                                  dates[i - 1].str()));
  }
  for (std::size_t j = 0; j < maturities.size(); ++j) {
    if (maturities[j] < 1) throw DataError("maturities must be >= 1 month");
    if (j > 0 && maturities[j] <= maturities[j - 1]) throw DataError("maturities must be strictly increasing");
  }
  if (!yields.allFinite()) throw DataError("yields contain missing or non-finite values");
  if (macro.size() > 0 && !macro.allFinite()) throw DataError("macro columns contain missing values");
}

Eigen::MatrixXd YieldPanel::all_columns() const {
  Eigen::MatrixXd out(rows(), yields.cols() + macro.cols());
  out.leftCols(yields.cols()) = yields;
  if (macro.cols() > 0) out.rightCols(macro.cols()) = macro;
  return out;
}

std::vector<std::string> YieldPanel::column_names() const {
  std::vector<std::string> names;
  for (int m : maturities) names.push_back(std::to_string(m));
  names.insert(names.end(), macro_names.begin(), macro_names.end());
  return names;
}

YieldPanel YieldPanel::slice(Eigen::Index begin, Eigen::Index count) const {
  YieldPanel out;
  out.dates.assign(dates.begin() + begin, dates.begin() + begin + count);
  out.maturities = maturities;
  out.yields = yields.middleRows(begin, count);
  out.macro_names = macro_names;
  out.macro = macro.cols() > 0 ? Eigen::MatrixXd(macro.middleRows(begin, count))
                               : Eigen::MatrixXd(count, 0);
  return out;
}

Eigen::Index YieldPanel::maturity_index(int months) const {
  auto it = std::find(maturities.begin(), maturities.end(), months);
  if (it == maturities.end()) throw ArgumentError(fmt::format("panel has no {}-month maturity", months));
  return it - maturities.begin();
}

PanelSchema PanelSchema::from_config(const KeyValueConfig& cfg) {
  PanelSchema s;
  s.date_column = cfg.get_string("date_column", "date");
  for (const auto& [key, col] : cfg.with_prefix("yield.")) {
    s.yields.emplace_back(static_cast<int>(parse_int(key, "yield." + key)), col);
  }
  std::sort(s.yields.begin(), s.yields.end());
  // Macro order follows the optional macro_order list, else key order.
  const auto macro_map = cfg.with_prefix("macro.");
  const auto order = cfg.get_strings("macro_order", {});
  if (!order.empty()) {
    for (const auto& name : order) {
      auto it = macro_map.find(name);
      if (it == macro_map.end()) throw SchemaError(fmt::format("macro_order names unknown macro '{}'", name));
      s.macro.emplace_back(name, it->second);
    }
    if (order.size() != macro_map.size()) throw SchemaError("macro_order must list every macro.* column");
  } else {
    for (const auto& [name, col] : macro_map) s.macro.emplace_back(name, col);
  }
  const auto policy = cfg.get_string("missing", "reject");
  if (policy == "reject") {
    s.missing = MissingPolicy::Reject;
  } else if (policy == "interpolate") {
    s.missing = MissingPolicy::Interpolate;
  } else {
    throw ArgumentError(fmt::format("missing: unknown policy '{}'", policy));
  }
  return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA" || s == "." || s == "NaN"; }

bool is_positive_integer(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
         std::stoll(s) > 0;
}

// Linear interpolation across time; leading/trailing gaps cannot be filled.
void interpolate_column(Eigen::Ref<Eigen::VectorXd> x, const std::string& name, const std::vector<MonthStamp>& dates) {
  const Eigen::Index T = x.size();
  Eigen::Index prev = -1;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (std::isnan(x(t))) continue;
    if (prev >= 0 && t - prev > 1) {
      for (Eigen::Index s = prev + 1; s < t; ++s) {
        const double w = static_cast<double>(s - prev) / static_cast<double>(t - prev);
        x(s) = (1.0 - w) * x(prev) + w * x(t);
      }
    }
    prev = t;
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    if (std::isnan(x(t))) {
      throw DataError(fmt::format("column '{}': missing value at {} cannot be interpolated (edge of sample)",
                                  name, dates[t].str()));
    }
  }
}

}  // namespace

YieldPanel read_panel(std::istream& in, const PanelSchema& schema, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file", origin));
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;

  auto column = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError(fmt::format("{}: missing column '{}'", origin, name));
    return it->second;
  };

  const std::size_t date_col = column(schema.date_column);
  std::vector<std::pair<int, std::size_t>> ycols;
  if (schema.yields.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i != date_col && is_positive_integer(header[i])) ycols.emplace_back(std::stoi(header[i]), i);
    }
    std::sort(ycols.begin(), ycols.end());
  } else {
    for (const auto& [m, name] : schema.yields) ycols.emplace_back(m, column(name));
  }
  if (ycols.empty()) throw SchemaError(fmt::format("{}: schema names no maturity columns", origin));
  std::vector<std::size_t> mcols;
  for (const auto& [name, col] : schema.macro) mcols.push_back(column(col));

  std::vector<MonthStamp> dates;
  std::vector<std::vector<double>> yrows, mrows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(fmt::format("{}: row {} has {} cells, header has {}", origin, row, cells.size(), header.size()));
    }
    try {
      dates.push_back(MonthStamp::parse(cells[date_col]));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: row {}, column '{}': {}", origin, row, schema.date_column, e.what()));
    }
    auto read_cell = [&](std::size_t c) {
      const auto& s = cells[c];
      if (is_missing_token(s)) return std::numeric_limits<double>::quiet_NaN();
      try {
        return parse_double(s, "cell");
      } catch (const ArgumentError&) {
        throw DataError(fmt::format("{}: row {}, column '{}': unparseable value '{}'", origin, row, header[c], s));
      }
    };
    std::vector<double> y, m;
    for (const auto& yc : ycols) y.push_back(read_cell(yc.second));
    for (auto c : mcols) m.push_back(read_cell(c));
    yrows.push_back(std::move(y));
    mrows.push_back(std::move(m));
  }

  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] == dates[i - 1] || std::find(dates.begin(), dates.begin() + static_cast<long>(i), dates[i]) !=
                                        dates.begin() + static_cast<long>(i)) {
      throw DataError(fmt::format("{}: duplicate month {}", origin, dates[i].str()));
    }
  }

  YieldPanel p;
  p.dates = dates;
  const auto T = static_cast<Eigen::Index>(dates.size());
  p.yields.resize(T, static_cast<Eigen::Index>(ycols.size()));
  p.macro.resize(T, static_cast<Eigen::Index>(mcols.size()));
  for (const auto& yc : ycols) p.maturities.push_back(yc.first);
  for (const auto& mc : schema.macro) p.macro_names.push_back(mc.first);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < p.yields.cols(); ++j) p.yields(t, j) = yrows[t][j];
    for (Eigen::Index j = 0; j < p.macro.cols(); ++j) p.macro(t, j) = mrows[t][j];
  }

  auto resolve_missing = [&](Eigen::MatrixXd& mat, const std::vector<std::string>& names) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      for (Eigen::Index t = 0; t < T; ++t) {
        if (!std::isnan(mat(t, j))) continue;
        if (schema.missing == MissingPolicy::Reject) {
          throw DataError(fmt::format("{}: missing value in column '{}' at {}", origin, names[j], dates[t].str()));
        }
        interpolate_column(mat.col(j), names[j], dates);
        break;
      }
    }
  };
  std::vector<std::string> ynames;
  for (const auto& yc : ycols) ynames.push_back(header[yc.second]);
  resolve_missing(p.yields, ynames);
  std::vector<std::string> mnames;
  for (auto c : mcols) mnames.push_back(header[c]);
  resolve_missing(p.macro, mnames);

  try {
    p.validate();
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", origin, e.what()));
  }
  return p;
}

YieldPanel load_panel(const std::filesystem::path& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ArgumentError(fmt::format("cannot open input file '{}'", path.string()));
  return read_panel(in, schema, path.string());
}

void write_panel(std::ostream& out, const YieldPanel& panel) {
  out << "date";
  for (const auto& n : panel.column_names()) out << ',' << n;
  out << '\n';
  const auto all = panel.all_columns();
  for (Eigen::Index t = 0; t < all.rows(); ++t) {
    out << panel.dates[t].str();
    for (Eigen::Index j = 0; j < all.cols(); ++j) out << ',' << fmt::format("{:.17g}", all(t, j));
    out << '\n';
  }
}

SplitPanel split_panel(const YieldPanel& panel, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError(fmt::format("train fraction must lie in (0,1), got {}", train_fraction));
  }
  const Eigen::Index T = panel.rows();
  if (T < 4) throw ArgumentError("split_panel needs at least 4 rows");
  const auto n_train = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(T)));
  if (n_train < 2) throw ArgumentError("train fraction leaves fewer than 2 training rows");
  if (n_train >= T) throw ArgumentError("train fraction leaves no test rows");
  return {panel.slice(0, n_train), panel.slice(n_train, T - n_train)};
}

ColumnStats describe_column(const Eigen::Ref<const Eigen::VectorXd>& x, const std::string& name) {
  if (x.size() == 0) throw ArgumentError("describe: empty column");
  ColumnStats s;
  s.name = name;
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.mean = x.mean();
  s.sd = n > 1 ? std::sqrt((x.array() - s.mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  return s;
}

DescriptiveStats describe(const YieldPanel& panel) {
  if (panel.rows() == 0) throw ArgumentError("describe: empty panel");
  DescriptiveStats out;
  const auto all = panel.all_columns();
  const auto names = panel.column_names();
  for (Eigen::Index j = 0; j < all.cols(); ++j) out.columns.push_back(describe_column(all.col(j), names[j]));
  return out;
}

void write_stats(std::ostream& out, const DescriptiveStats& stats) {
  out << "column,min,median,mean,max,sd\n";
  for (const auto& c : stats.columns) {
    out << fmt::format("{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", c.name, c.min, c.median, c.mean, c.max, c.sd);
  }
}

}  // namespace nsbvar
