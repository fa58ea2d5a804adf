#include "meso/dns/field_series.hpp"

#include <cstdio>

#include "meso/error.hpp"
#include "meso/table.hpp"

namespace meso::dns {

void FieldSeries::append(double t, Eigen::VectorXd values) {
  if (static_cast<std::size_t>(values.size()) != mesh_.node_count())
    throw ShapeError("snapshot of '" + name_ + "' has " + std::to_string(values.size()) + " values, mesh has " +
                     std::to_string(mesh_.node_count()));
  if (!times_.empty() && !(t > times_.back()))
    throw DataError("snapshot times of '" + name_ + "' must increase strictly (got " + format_number(t) +
                    " after " + format_number(times_.back()) + ")");
  times_.push_back(t);
  snaps_.push_back(std::move(values));
}

namespace {

std::string snapshot_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.csv", n);
  return buf;
}

}  // namespace

std::vector<std::filesystem::path> write_series(const std::vector<const FieldSeries*>& species,
                                                const std::filesystem::path& dir) {
  if (species.empty()) throw PreconditionError("write_series: no species given");
  const FieldSeries& first = *species.front();
  for (const auto* s : species)
    if (!(s->mesh() == first.mesh()) || s->times() != first.times())
      throw DataError("write_series: species '" + s->name() + "' does not share mesh and times");

  std::vector<std::filesystem::path> written;
  const auto& mesh = first.mesh();
  std::vector<double> x(mesh.node_count()), y(mesh.node_count());
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    auto p = mesh.node_position(n);
    x[n] = p[0];
    y[n] = p[1];
  }
  for (std::size_t k = 0; k < first.size(); ++k) {
    Table t;
    t.add_column("x", x);
    t.add_column("y", y);
    for (const auto* s : species) {
      const auto& v = s->snapshot(k);
      t.add_column(s->name(), std::vector<double>(v.begin(), v.end()));
    }
    written.push_back(dir / snapshot_name(k));
    emit_plot_data(t, written.back());
  }
  Table times;
  std::vector<double> idx(first.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<double>(k);
  times.add_column("index", idx);
  times.add_column("t", first.times());
  written.push_back(dir / "times.csv");
  emit_plot_data(times, written.back());
  return written;
}

std::vector<FieldSeries> read_series(const fem::StructuredMesh& mesh, const std::vector<std::string>& names,
                                     const std::filesystem::path& dir) {
  Table times = read_csv(dir / "times.csv");
  std::vector<FieldSeries> out;
  for (const auto& n : names) out.emplace_back(mesh, n);
  for (std::size_t k = 0; k < times.rows(); ++k) {
    Table snap = read_csv(dir / snapshot_name(k));
    if (snap.rows() != mesh.node_count())
      throw DataError((dir / snapshot_name(k)).string() + ": row count does not match mesh");
    for (std::size_t s = 0; s < names.size(); ++s) {
      const auto& col = snap.column(names[s]);
      out[s].append(times.at(k, 1), Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size())));
    }
  }
  return out;
}

}  // namespace meso::dns
