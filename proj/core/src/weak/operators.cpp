#include "meso/weak/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "meso/error.hpp"
#include "meso/fem/assembly.hpp"
#include "meso/fem/basis.hpp"
#include "meso/table.hpp"

namespace meso::weak {

std::string OperatorSpec::label(const std::vector<std::string>& names) const {
  auto name = [&](std::size_t s) {
    if (s >= names.size())
      throw ConfigError("operator references species " + std::to_string(s) + " but only " +
                        std::to_string(names.size()) + " are given");
    return names[s];
  };
  switch (kind) {
    case OperatorKind::laplacian:
      return "lap(" + name(species) + ")";
    case OperatorKind::constant:
      return "const";
    case OperatorKind::linear:
      return name(species);
    case OperatorKind::cubic_c1sq_c2:
      return name(0) + "^2*" + name(1);
    case OperatorKind::custom:
      if (custom_label.empty()) throw ConfigError("custom operator needs a label");
      if (!fn) throw ConfigError("custom operator '" + custom_label + "' has no function");
      return custom_label;
  }
  throw ConfigError("unknown operator kind");
}

std::vector<OperatorSpec> reaction_diffusion_library() {
  return {OperatorSpec::laplacian(0), OperatorSpec::laplacian(1), OperatorSpec::constant(),
          OperatorSpec::linear(0),    OperatorSpec::linear(1),    OperatorSpec::cubic_c1sq_c2()};
}

std::size_t OperatorLibrary::column_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw DataError("operator library has no column '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

void OperatorLibrary::validate() const {
  if (chi.rows() != y.size())
    throw DataError("chi has " + std::to_string(chi.rows()) + " rows but y has " + std::to_string(y.size()));
  if (static_cast<std::size_t>(chi.cols()) != labels.size())
    throw DataError("chi has " + std::to_string(chi.cols()) + " columns but " + std::to_string(labels.size()) +
                    " labels");
  std::set<std::string> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second) throw DataError("duplicate operator label '" + l + "'");
  if (!dof_map.empty() && dof_map.size() != rows()) throw DataError("dof_map length does not match rows");
}

namespace {

std::vector<std::size_t> test_rows(const fem::StructuredMesh& mesh, const fem::BoundaryMask* mask) {
  std::vector<std::size_t> rows;
  if (mask && mask->size() != mesh.node_count()) throw ShapeError("mask size does not match mesh");
  for (std::size_t n = 0; n < mesh.node_count(); ++n)
    if (!mask || (!mask->is_dirichlet(n) && !mask->is_exterior(n))) rows.push_back(n);
  return rows;
}

std::vector<bool> active_of(const fem::StructuredMesh& mesh, const fem::BoundaryMask* mask) {
  return mask ? fem::active_elements(mesh, *mask) : std::vector<bool>{};
}

Eigen::VectorXd restrict_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(static_cast<Eigen::Index>(rows[r]));
  return out;
}

/// ∫ N_i g(c_h) dv with g evaluated on interpolated species values at quadrature points.
Eigen::VectorXd algebraic_load(const fem::StructuredMesh& mesh, const std::vector<Eigen::VectorXd>& fields,
                               const OperatorSpec& spec, int quad_points, const std::vector<bool>& active) {
  const fem::ShapeFunctions sf = fem::shape_eval(mesh, fem::gauss_rule(quad_points, mesh.dim()));
  const std::size_t ns = fields.size();
  const std::size_t npe = mesh.nodes_per_element();
  Eigen::MatrixXd elem = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.element_count()),
                                               static_cast<Eigen::Index>(npe));
  std::vector<double> cq(ns);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!active.empty() && !active[e]) continue;
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < sf.points(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      for (std::size_t s = 0; s < ns; ++s) {
        double v = 0.0;
        for (std::size_t a = 0; a < npe; ++a)
          v += sf.N(qi, static_cast<Eigen::Index>(a)) * fields[s](static_cast<Eigen::Index>(nodes[a]));
        cq[s] = v;
      }
      double g = 0.0;
      switch (spec.kind) {
        case OperatorKind::constant:
          g = 1.0;
          break;
        case OperatorKind::linear:
          g = cq[spec.species];
          break;
        case OperatorKind::cubic_c1sq_c2:
          g = cq[0] * cq[0] * cq[1];
          break;
        case OperatorKind::custom:
          g = spec.fn(std::span<const double>(cq));
          break;
        case OperatorKind::laplacian:
          throw ConfigError("laplacian is not an algebraic operator");
      }
      const double w = g * sf.jxw(q);
      for (std::size_t a = 0; a < npe; ++a)
        elem(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(a)) += sf.N(qi, static_cast<Eigen::Index>(a)) * w;
    }
  }
  return fem::scatter_element_to_nodes(elem, mesh);
}

OperatorLibrary build_chi(const fem::StructuredMesh& mesh, const std::vector<Eigen::VectorXd>& now,
                          const std::vector<Eigen::VectorXd>& algebraic_state, const std::vector<std::string>& names,
                          const std::vector<OperatorSpec>& specs, const AssemblyOptions& opts, std::size_t n) {
  if (specs.empty()) throw ConfigError("operator spec list is empty");
  for (const auto& s : specs)
    if (s.kind == OperatorKind::cubic_c1sq_c2 && names.size() < 2)
      throw ConfigError("c1^2*c2 operator needs two species");
  const auto rows = test_rows(mesh, opts.mask);
  const auto active = active_of(mesh, opts.mask);
  OperatorLibrary lib;
  lib.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
  lib.chi.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(specs.size()));
  fem::SparseMatrix K;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& spec = specs[k];
    lib.labels.push_back(spec.label(names));
    Eigen::VectorXd col;
    if (spec.kind == OperatorKind::laplacian) {
      if (K.size() == 0) K = fem::assemble_stiffness(mesh, active);
      col = -(K * now[spec.species]);
    } else {
      col = algebraic_load(mesh, algebraic_state, spec, opts.quad_points, active);
    }
    lib.chi.col(static_cast<Eigen::Index>(k)) = restrict_rows(col, rows);
  }
  for (auto r : rows) lib.dof_map.push_back({r, n});
  lib.validate();
  return lib;
}

void check_species(const std::vector<const dns::FieldSeries*>& species, std::size_t n) {
  if (species.empty()) throw PreconditionError("no species series given");
  const auto& first = *species.front();
  for (const auto* s : species)
    if (!(s->mesh() == first.mesh()) || s->times() != first.times())
      throw DataError("species '" + s->name() + "' does not share mesh and times with '" + first.name() + "'");
  if (n >= first.size())
    throw PreconditionError("time index " + std::to_string(n) + " outside series of " +
                            std::to_string(first.size()) + " snapshots");
}

}  // namespace

Eigen::VectorXd assemble_time_derivative(const dns::FieldSeries& series, std::size_t n, const AssemblyOptions& opts) {
  if (n == 0) throw PreconditionError("time derivative needs n >= 1 (backward difference)");
  if (n >= series.size())
    throw PreconditionError("time index " + std::to_string(n) + " outside series of " +
                            std::to_string(series.size()) + " snapshots");
  const double dt = series.time(n) - series.time(n - 1);
  if (!(dt > 0.0)) throw PreconditionError("non-positive time step");
  const auto& mesh = series.mesh();
  const fem::SparseMatrix M = fem::assemble_mass(mesh, active_of(mesh, opts.mask));
  const Eigen::VectorXd rate = (series.snapshot(n) - series.snapshot(n - 1)) / dt;
  return restrict_rows(M * rate, test_rows(mesh, opts.mask));
}

OperatorLibrary assemble_chi(const std::vector<const dns::FieldSeries*>& species, std::size_t n,
                             const std::vector<OperatorSpec>& specs, const AssemblyOptions& opts) {
  check_species(species, n);
  if (opts.lagged_reaction && n == 0) throw PreconditionError("lagged reaction terms need n >= 1");
  std::vector<Eigen::VectorXd> now, lag;
  std::vector<std::string> names;
  for (const auto* s : species) {
    now.push_back(s->snapshot(n));
    lag.push_back(opts.lagged_reaction ? s->snapshot(n - 1) : s->snapshot(n));
    names.push_back(s->name());
  }
  return build_chi(species.front()->mesh(), now, lag, names, specs, opts, n);
}

OperatorLibrary assemble_library(const std::vector<const dns::FieldSeries*>& species, std::size_t target,
                                 std::size_t n, const std::vector<OperatorSpec>& specs, const AssemblyOptions& opts) {
  if (target >= species.size()) throw ConfigError("target species index out of range");
  OperatorLibrary lib = assemble_chi(species, n, specs, opts);
  lib.y = assemble_time_derivative(*species[target], n, opts);
  lib.validate();
  return lib;
}

OperatorLibrary assemble_steady_state(const fem::StructuredMesh& mesh, const std::vector<Eigen::VectorXd>& fields,
                                      const std::vector<std::string>& names, const std::vector<OperatorSpec>& specs,
                                      const AssemblyOptions& opts) {
  if (fields.size() != names.size()) throw ShapeError("field and name counts differ");
  for (const auto& f : fields)
    if (static_cast<std::size_t>(f.size()) != mesh.node_count()) throw ShapeError("field size does not match mesh");
  return build_chi(mesh, fields, fields, names, specs, opts, 0);
}

OperatorLibrary pool_time_samples(const std::vector<OperatorLibrary>& libs) {
  if (libs.empty()) throw PreconditionError("nothing to pool");
  std::size_t total = 0;
  for (const auto& l : libs) {
    if (l.labels != libs.front().labels) throw DataError("cannot pool libraries with different labels");
    total += l.rows();
  }
  OperatorLibrary out;
  out.labels = libs.front().labels;
  out.y.resize(static_cast<Eigen::Index>(total));
  out.chi.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(out.labels.size()));
  Eigen::Index r = 0;
  for (const auto& l : libs) {
    const auto m = static_cast<Eigen::Index>(l.rows());
    out.y.segment(r, m) = l.y;
    out.chi.middleRows(r, m) = l.chi;
    out.dof_map.insert(out.dof_map.end(), l.dof_map.begin(), l.dof_map.end());
    r += m;
  }
  if (out.dof_map.size() != total) out.dof_map.clear();
  out.validate();
  return out;
}

void write_library(const OperatorLibrary& lib, const std::filesystem::path& dir) {
  lib.validate();
  Table y;
  y.add_column("y", std::vector<double>(lib.y.begin(), lib.y.end()));
  emit_plot_data(y, dir / "y.csv");
  Table chi;
  for (std::size_t k = 0; k < lib.cols(); ++k) {
    const Eigen::VectorXd c = lib.chi.col(static_cast<Eigen::Index>(k));
    chi.add_column(lib.labels[k], std::vector<double>(c.begin(), c.end()));
  }
  emit_plot_data(chi, dir / "chi.csv");
  Table dm;
  std::vector<double> node, tidx;
  for (const auto& d : lib.dof_map) {
    node.push_back(static_cast<double>(d.node));
    tidx.push_back(static_cast<double>(d.time_index));
  }
  dm.add_column("node", node);
  dm.add_column("time_index", tidx);
  emit_plot_data(dm, dir / "dof_map.csv");
}

OperatorLibrary read_library(const std::filesystem::path& y_csv, const std::filesystem::path& chi_csv) {
  Table y = read_csv(y_csv);
  Table chi = read_csv(chi_csv);
  if (y.cols() != 1) throw DataError(y_csv.string() + ": expected a single column");
  if (y.rows() != chi.rows())
    throw DataError("row mismatch: " + y_csv.string() + " has " + std::to_string(y.rows()) + ", " +
                    chi_csv.string() + " has " + std::to_string(chi.rows()));
  OperatorLibrary lib;
  lib.labels = chi.names();
  const auto& yc = y.column(std::size_t{0});
  lib.y = Eigen::Map<const Eigen::VectorXd>(yc.data(), static_cast<Eigen::Index>(yc.size()));
  lib.chi.resize(static_cast<Eigen::Index>(chi.rows()), static_cast<Eigen::Index>(chi.cols()));
  for (std::size_t k = 0; k < chi.cols(); ++k) {
    const auto& c = chi.column(k);
    lib.chi.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  }
  for (const auto& v : lib.y)
    if (!std::isfinite(v)) throw DataError(y_csv.string() + ": non-finite target value");
  if (!lib.chi.allFinite()) throw DataError(chi_csv.string() + ": non-finite operator value");
  lib.validate();
  return lib;
}

}  // namespace meso::weak
