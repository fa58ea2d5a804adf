#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meso {

/// Column-oriented table of doubles with named columns. Every column has the same length.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> names);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool has(std::string_view name) const noexcept;
  /// Throws DataError naming the column when absent.
  std::size_t index(std::string_view name) const;

  const std::vector<double>& column(std::string_view name) const { return data_[index(name)]; }
  const std::vector<double>& column(std::size_t i) const { return data_.at(i); }
  double at(std::size_t row, std::size_t col) const { return data_.at(col).at(row); }

  /// Appends a column. Its length must equal rows() unless the table has no columns yet.
  void add_column(std::string name, std::vector<double> values);
  /// Replaces an existing column or appends a new one.
  void set_column(std::string name, std::vector<double> values);
  void add_row(std::span<const double> values);

  /// Rows [first, first+count) as a new table.
  Table slice_rows(std::size_t first, std::size_t count) const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  std::size_t rows_ = 0;
};

/// Shortest decimal form with 17 significant digits, so values round-trip exactly.
std::string format_number(double value);

Table parse_csv(std::istream& in, std::string_view source = "<stream>");
Table read_csv(const std::filesystem::path& path);

enum class CsvStyle { comma, gnuplot };

void write_csv(const Table& table, std::ostream& out, CsvStyle style = CsvStyle::comma);
void write_csv(const Table& table, const std::filesystem::path& path, CsvStyle style = CsvStyle::comma);

/// Writes a plot-ready table: comma CSV with header, or whitespace-separated with a `#` header
/// line for gnuplot. Creates parent directories. An empty table yields a header-only file.
void emit_plot_data(const Table& table, const std::filesystem::path& path, bool gnuplot = false);

}  // namespace meso
