#include "meso/obs/rom.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "meso/error.hpp"
#include "meso/graph/graph.hpp"
#include "meso/obs/observables.hpp"

namespace meso::obs {

std::string derivative_label(bool plus_energy, const std::string& g, bool positive) {
  return std::string(plus_energy ? "dPsi+" : "dPsi") + "/d" + phase_label(g, positive);
}

std::string target_label() { return "dphi_phi+/dt"; }

namespace {

Eigen::VectorXd column_vector(const Table& t, std::string_view name) {
  const auto& c = t.column(name);
  return Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

// Row indices of each trajectory, in ascending trajectory id and ascending time.
std::map<double, std::vector<std::size_t>> rows_by_trajectory(const Table& t) {
  const auto& traj = t.column("trajectory");
  const auto& time = t.column("time");
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < t.rows(); ++r) groups[traj[r]].push_back(r);
  for (auto& [id, rows] : groups)
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
  return groups;
}

}  // namespace

Table functional_derivatives(const Table& table, const DerivativeOptions& options) {
  for (const auto& l : phase_labels()) table.index(l);
  table.index("Psi");
  table.index("Psi+");
  const auto groups = rows_by_trajectory(table);
  if (groups.size() < 2) throw PreconditionError("functional derivatives need rows from at least two trajectories");

  Table out = table;
  std::vector<std::vector<std::size_t>> parts;
  if (options.neighborhood == Neighborhood::trajectory) {
    for (const auto& [id, rows] : groups) parts.push_back(rows);
  } else {
    parts.emplace_back(table.rows());
    std::iota(parts.back().begin(), parts.back().end(), std::size_t{0});
  }

  for (const auto& label : phase_labels()) {
    graph::DiffOpSpec spec;
    spec.manifold = {label};
    spec.dimension = {0};
    spec.accuracy = options.accuracy;
    spec.neighbors = options.neighbors;
    const std::string g = label.substr(4, label.size() - 5);
    const bool positive = label.back() == '+';
    const auto& coord = table.column(label);
    for (bool plus_energy : {true, false}) {
      const std::string energy = plus_energy ? "Psi+" : "Psi";
      const auto& u = table.column(energy);
      spec.function = energy;
      spec.label = derivative_label(plus_energy, g, positive);
      std::vector<double> d(table.rows());
      for (const auto& rows : parts) {
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), 1);
        Eigen::VectorXd vals(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          pts(static_cast<Eigen::Index>(r), 0) = coord[rows[r]];
          vals(static_cast<Eigen::Index>(r)) = u[rows[r]];
        }
        const std::size_t k = std::min(spec.neighborhood_size(), rows.size() - 1);
        graph::Graph gr = graph::build_graph(pts, k);
        gr.set_state(energy, vals);
        Eigen::VectorXd res;
        try {
          res = graph::nonlocal_partial(gr, spec);
        } catch (const RankError& e) {
          throw RankError(spec.label + ": " + e.what() +
                          " (observable neighborhoods are degenerate; use more trajectories or a larger neighborhood)");
        }
        for (std::size_t r = 0; r < rows.size(); ++r) d[rows[r]] = res(static_cast<Eigen::Index>(r));
      }
      out.add_column(spec.label, std::move(d));
    }
  }

  // Column order: all dPsi+ entries, then all dPsi entries, each following phase_labels().
  std::vector<std::string> order = table.names();
  for (bool plus_energy : {true, false})
    for (const auto& g : observable_functions())
      for (bool positive : {true, false}) order.push_back(derivative_label(plus_energy, g, positive));
  Table sorted;
  for (const auto& name : order) sorted.add_column(name, out.column(name));
  return sorted;
}

Table add_time_derivative(const Table& table) {
  const std::string source = phase_label("phi", true);
  const auto& u = table.column(source);
  const auto& time = table.column("time");
  std::vector<double> d(table.rows(), 0.0);
  for (const auto& [id, rows] : rows_by_trajectory(table)) {
    if (rows.size() < 2)
      throw DataError("trajectory " + format_number(id) + " has fewer than two rows; no time derivative");
    const std::size_t n = rows.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t a = rows[k == 0 ? 0 : k - 1], b = rows[k + 1 == n ? n - 1 : k + 1];
      const double dt = time[b] - time[a];
      if (!(dt > 0.0)) throw DataError("trajectory " + format_number(id) + " has repeated time stamps");
      d[rows[k]] = (u[b] - u[a]) / dt;
    }
  }
  Table out = table;
  out.set_column(target_label(), std::move(d));
  return out;
}

BasisSets build_basis_sets(const Table& table) {
  BasisSets b;
  const auto& gs = observable_functions();
  for (const auto& g : gs)
    for (bool positive : {true, false}) b.b1.push_back(derivative_label(true, g, positive));
  b.b2 = b.b1;
  for (const auto& g : gs)
    for (bool positive : {true, false}) b.b2.push_back(derivative_label(false, g, positive));
  b.b3 = b.b2;
  for (const auto& l : phase_labels()) b.b3.push_back(l);
  for (const auto& l : b.b3)
    if (!table.has(l)) throw DataError("basis column '" + l + "' is missing from the observable table");
  return b;
}

sysid::RegressionTrace identify_reduced_model(const Table& table, const std::vector<std::string>& basis,
                                             const sysid::StepwiseConfig& config) {
  if (basis.size() < 2) throw PreconditionError("reduced-model identification needs at least two basis columns");
  sysid::RegressionProblem p;
  p.columns.resize(static_cast<Eigen::Index>(table.rows()), static_cast<Eigen::Index>(basis.size() + 1));
  p.columns.col(0) = column_vector(table, target_label());
  p.labels.push_back(target_label());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    p.columns.col(static_cast<Eigen::Index>(j + 1)) = column_vector(table, basis[j]);
    p.labels.push_back(basis[j]);
    p.library.push_back(j + 1);
  }
  p.target = 0;
  if (!p.columns.allFinite()) throw DataError("observable table contains non-finite entries");
  return sysid::stepwise_eliminate(p, config);
}

const sysid::Iteration& iteration_with_terms(const sysid::RegressionTrace& trace, std::size_t terms) {
  for (const auto& it : trace.iterations)
    if (it.active.size() == terms) return it;
  throw std::out_of_range("no iteration with " + std::to_string(terms) + " terms");
}

Table trace_table(const sysid::RegressionTrace& trace) {
  std::vector<std::string> names{"iteration", "terms", "loss"};
  for (const auto& l : trace.labels) names.push_back(l);
  Table t(names);
  std::vector<double> row(names.size());
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    row[0] = static_cast<double>(i + 1);
    row[1] = static_cast<double>(it.active.size());
    row[2] = it.loss;
    const Eigen::VectorXd c = trace.padded_coefficients(i);
    for (Eigen::Index k = 0; k < c.size(); ++k) row[3 + static_cast<std::size_t>(k)] = c(k);
    t.add_row(row);
  }
  return t;
}

}  // namespace meso::obs
