#include "meso/table.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "meso/error.hpp"

namespace meso {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

bool parse_double(std::string_view text, double& value) {
  std::string buf(text);
  if (buf.empty()) return false;
  char* end = nullptr;
  errno = 0;
  value = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

}  // namespace

Table::Table(std::vector<std::string> names) : names_(std::move(names)), data_(names_.size()) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j]) throw DataError("duplicate column name '" + names_[i] + "'");
}

bool Table::has(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Table::index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

void Table::add_column(std::string name, std::vector<double> values) {
  if (has(name)) throw DataError("duplicate column name '" + name + "'");
  if (!names_.empty() && values.size() != rows_)
    throw ShapeError("column '" + name + "' has " + std::to_string(values.size()) + " rows, table has " +
                     std::to_string(rows_));
  if (names_.empty()) rows_ = values.size();
  names_.push_back(std::move(name));
  data_.push_back(std::move(values));
}

void Table::set_column(std::string name, std::vector<double> values) {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    add_column(std::move(name), std::move(values));
    return;
  }
  if (values.size() != rows_) throw ShapeError("column '" + name + "' length mismatch");
  data_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
}

void Table::add_row(std::span<const double> values) {
  if (values.size() != names_.size())
    throw ShapeError("row has " + std::to_string(values.size()) + " values, table has " +
                     std::to_string(names_.size()) + " columns");
  for (std::size_t c = 0; c < values.size(); ++c) data_[c].push_back(values[c]);
  ++rows_;
}

Table Table::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw ShapeError("row slice out of range");
  Table out(names_);
  for (std::size_t c = 0; c < names_.size(); ++c)
    out.data_[c].assign(data_[c].begin() + static_cast<std::ptrdiff_t>(first),
                        data_[c].begin() + static_cast<std::ptrdiff_t>(first + count));
  out.rows_ = count;
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Table parse_csv(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  Table table;
  bool have_header = false;
  std::size_t ncols = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split(view, ',');
    if (!have_header) {
      std::vector<std::string> names;
      for (auto f : fields) {
        if (f.empty()) throw ParseError(line_no, std::string(source) + ": empty column name in header");
        names.emplace_back(f);
      }
      table = Table(std::move(names));
      ncols = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != ncols)
      throw ParseError(line_no, std::string(source) + ": expected " + std::to_string(ncols) + " fields, got " +
                                    std::to_string(fields.size()));
    row.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c)
      if (!parse_double(fields[c], row[c]))
        throw ParseError(line_no, std::string(source) + ": malformed number '" + std::string(fields[c]) + "'");
    table.add_row(row);
  }
  if (!have_header) throw DataError(std::string(source) + ": missing header row");
  return table;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(const Table& table, std::ostream& out, CsvStyle style) {
  const char* sep = style == CsvStyle::comma ? "," : " ";
  if (style == CsvStyle::gnuplot) out << "# ";
  for (std::size_t c = 0; c < table.cols(); ++c) out << (c ? sep : "") << table.names()[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) out << (c ? sep : "") << format_number(table.at(r, c));
    out << '\n';
  }
}

void write_csv(const Table& table, const std::filesystem::path& path, CsvStyle style) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_csv(table, out, style);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void emit_plot_data(const Table& table, const std::filesystem::path& path, bool gnuplot) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  write_csv(table, path, gnuplot ? CsvStyle::gnuplot : CsvStyle::comma);
}

}  // namespace meso
