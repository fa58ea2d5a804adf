#include "meso/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "meso/error.hpp"

namespace meso::graph {

Graph::Graph(Eigen::MatrixXd positions, std::vector<std::vector<std::size_t>> neighbors)
    : positions_(std::move(positions)), neighbors_(std::move(neighbors)) {
  if (positions_.cols() < 1) throw DataError("graph positions need at least one coordinate");
  if (!positions_.allFinite()) throw DataError("graph positions must be finite");
  if (neighbors_.size() != size()) throw ShapeError("neighbor lists do not match vertex count");
  for (std::size_t i = 0; i < neighbors_.size(); ++i) {
    auto& nb = neighbors_[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (auto j : nb) {
      if (j >= size()) throw DataError("edge endpoint " + std::to_string(j) + " is not a vertex");
      if (j == i) throw DataError("self-edge at vertex " + std::to_string(i));
    }
  }
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < neighbors_.size(); ++i)
    for (auto j : neighbors_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

bool Graph::has_state(const std::string& label) const {
  return std::any_of(states_.begin(), states_.end(), [&](const auto& s) { return s.first == label; });
}

const Eigen::VectorXd& Graph::state(const std::string& label) const {
  for (const auto& s : states_)
    if (s.first == label) return s.second;
  throw DataError("graph has no state '" + label + "'");
}

void Graph::set_state(const std::string& label, Eigen::VectorXd values) {
  if (static_cast<std::size_t>(values.size()) != size())
    throw ShapeError("state '" + label + "' has " + std::to_string(values.size()) + " values for " +
                     std::to_string(size()) + " vertices");
  for (auto& s : states_)
    if (s.first == label) {
      s.second = std::move(values);
      return;
    }
  states_.emplace_back(label, std::move(values));
}

Graph build_graph(const Eigen::MatrixXd& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw PreconditionError("build_graph needs at least 2 points");
  if (points.cols() < 1) throw DataError("build_graph: points need at least one coordinate");
  if (!points.allFinite()) throw DataError("build_graph: non-finite coordinates");
  if (k < 1) throw ConfigError("neighborhood size k must be >= 1");
  if (k > n - 1)
    throw ConfigError("neighborhood size k = " + std::to_string(k) + " exceeds the " + std::to_string(n - 1) +
                      " other points");

  std::vector<std::vector<std::size_t>> nb(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      dist[j] = {(points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).squaredNorm(), j};
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::sqrt(dist[j].first) < 1e-12)
        throw DataError("duplicate points at indices " + std::to_string(i) + " and " + std::to_string(j));
    dist[i].first = std::numeric_limits<double>::infinity();
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t m = 0; m < k; ++m) {
      nb[i].push_back(dist[m].second);
      nb[dist[m].second].push_back(i);
    }
  }
  return Graph(points, std::move(nb));
}

std::vector<std::vector<int>> moment_indices(std::size_t dim, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(dim, 0);
  for (int deg = 1; deg <= max_degree; ++deg) {
    // Compositions of deg into dim parts, leading component descending.
    auto rec = [&](auto&& self, std::size_t axis, int remaining) -> void {
      if (axis + 1 == dim) {
        alpha[axis] = remaining;
        out.push_back(alpha);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        alpha[axis] = v;
        self(self, axis + 1, remaining - v);
      }
    };
    rec(rec, 0, deg);
  }
  return out;
}

std::size_t moment_count(std::size_t dim, int accuracy, int order) {
  // C(dim + d, d) − 1 with d = accuracy + order − 1.
  const int d = accuracy + order - 1;
  double c = 1.0;
  for (int i = 1; i <= d; ++i) c = c * static_cast<double>(dim + static_cast<std::size_t>(i)) / i;
  return static_cast<std::size_t>(std::llround(c)) - 1;
}

namespace {

std::string monomial_name(const std::vector<int>& alpha) {
  std::string s;
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    if (!s.empty()) s += ' ';
    s += "x" + std::to_string(a) + "^" + std::to_string(alpha[a]);
  }
  return s;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Eigen::VectorXd stencil_weights(const Eigen::MatrixXd& offsets, int accuracy, const std::vector<std::size_t>& dimensions) {
  if (accuracy < 1) throw ConfigError("accuracy must be >= 1");
  const int order = static_cast<int>(dimensions.size());
  if (order < 1 || order > 2) throw ConfigError("derivative order must be 1 or 2");
  const auto p = static_cast<std::size_t>(offsets.cols());
  const auto m = offsets.rows();
  if (p == 0) throw DataError("stencil offsets need at least one coordinate");
  for (auto d : dimensions)
    if (d >= p) throw ConfigError("dimension index " + std::to_string(d) + " out of range for " + std::to_string(p) + " axes");
  if (m == 0) throw RankError("stencil has no neighbors");
  if (!offsets.allFinite()) throw DataError("non-finite stencil offset");

  std::vector<int> beta(p, 0);
  for (auto d : dimensions) ++beta[d];
  const auto moments = moment_indices(p, accuracy + order - 1);

  // Work in offsets scaled to unit size; a_j = a'_j / s^order.
  const double s = offsets.rowwise().norm().maxCoeff();
  if (!(s > 0.0)) throw RankError("all stencil offsets are zero");
  const Eigen::MatrixXd z = offsets / s;

  Eigen::MatrixXd M(static_cast<Eigen::Index>(moments.size()), m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(moments.size()));
  for (std::size_t r = 0; r < moments.size(); ++r) {
    const auto& alpha = moments[r];
    double fact = 1.0;
    for (int a : alpha) fact *= factorial(a);
    for (Eigen::Index j = 0; j < m; ++j) {
      double v = 1.0;
      for (std::size_t a = 0; a < p; ++a) v *= std::pow(z(j, static_cast<Eigen::Index>(a)), alpha[a]);
      M(static_cast<Eigen::Index>(r), j) = v / fact;
    }
    if (alpha == beta) rhs(static_cast<Eigen::Index>(r)) = 1.0;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  cod.setThreshold(1e-12);
  cod.compute(M);
  Eigen::VectorXd a = cod.solve(rhs);
  const Eigen::VectorXd resid = M * a - rhs;
  Eigen::Index worst = 0;
  const double err = resid.cwiseAbs().maxCoeff(&worst);
  if (!a.allFinite() || err > 1e-8) {
    throw RankError("stencil moment system is deficient (rank " + std::to_string(cod.rank()) + " of " +
                    std::to_string(moments.size()) + " conditions, " + std::to_string(m) +
                    " neighbors): moment " + monomial_name(moments[static_cast<std::size_t>(worst)]) +
                    " cannot be satisfied");
  }
  return a / std::pow(s, order);
}

void DiffOpSpec::validate() const {
  if (function.empty()) throw ConfigError("differential operation: 'function' is required");
  if (weight != "stencil") throw ConfigError("weight: unsupported value '" + weight + "' (expected stencil)");
  if (adjacency != "nearest") throw ConfigError("adjacency: unsupported value '" + adjacency + "' (expected nearest)");
  if (operation != "partial") throw ConfigError("operation: unsupported value '" + operation + "' (expected partial)");
  if (manifold.empty()) throw ConfigError("manifold: at least one axis label is required");
  if (accuracy < 1) throw ConfigError("accuracy must be >= 1");
  if (order < 1 || order > 2) throw ConfigError("order must be 1 or 2");
  if (dimension.empty() || (dimension.size() != 1 && dimension.size() != static_cast<std::size_t>(order)))
    throw ConfigError("dimension must list one axis or one axis per differentiation");
  for (auto d : dimension)
    if (d >= manifold.size())
      throw ConfigError("dimension index " + std::to_string(d) + " out of range for manifold of " +
                        std::to_string(manifold.size()) + " axes");
}

std::vector<std::size_t> DiffOpSpec::axes() const {
  if (dimension.size() == static_cast<std::size_t>(order)) return dimension;
  return std::vector<std::size_t>(static_cast<std::size_t>(order), dimension.front());
}

std::string DiffOpSpec::output_label() const {
  if (!label.empty()) return label;
  const auto ax = axes();
  auto var = [&](std::size_t i) {
    if (i < variable.size()) return variable[i];
    return manifold.at(ax[i]);
  };
  if (order == 1) return "d(" + function + ")/d(" + var(0) + ")";
  if (ax[0] == ax[1]) return "d2(" + function + ")/d(" + var(0) + ")2";
  return "d2(" + function + ")/d(" + var(0) + ")d(" + var(1) + ")";
}

std::size_t DiffOpSpec::neighborhood_size() const {
  return neighbors > 0 ? neighbors : moment_count(manifold.size(), accuracy, order) + 2;
}

Eigen::VectorXd nonlocal_partial(Graph& graph, const DiffOpSpec& spec) {
  spec.validate();
  if (graph.dim() != spec.manifold.size())
    throw ShapeError("graph has " + std::to_string(graph.dim()) + " coordinates but the manifold lists " +
                     std::to_string(spec.manifold.size()));
  const Eigen::VectorXd& u = graph.state(spec.function);
  const auto axes = spec.axes();
  const std::size_t n = graph.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = graph.neighbors(i);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(nb.size()), static_cast<Eigen::Index>(graph.dim()));
    for (std::size_t j = 0; j < nb.size(); ++j)
      z.row(static_cast<Eigen::Index>(j)) =
          graph.positions().row(static_cast<Eigen::Index>(nb[j])) - graph.positions().row(static_cast<Eigen::Index>(i));
    Eigen::VectorXd a;
    try {
      a = stencil_weights(z, spec.accuracy, axes);
    } catch (const RankError& e) {
      throw RankError("vertex " + std::to_string(i) + ": " + e.what());
    }
    double d = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j)
      d += a(static_cast<Eigen::Index>(j)) * (u(static_cast<Eigen::Index>(nb[j])) - u(static_cast<Eigen::Index>(i)));
    out(static_cast<Eigen::Index>(i)) = d;
  }
  graph.set_state(spec.output_label(), out);
  return out;
}

}  // namespace meso::graph
