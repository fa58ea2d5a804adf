#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace meso::graph {

/// Vertices at positions x_i ∈ R^p with labelled scalar states. Neighborhoods are symmetric
/// (j ∈ N(i) ⇔ i ∈ N(j)) and sorted by vertex index; self-edges never occur.
class Graph {
 public:
  Graph() = default;
  Graph(Eigen::MatrixXd positions, std::vector<std::vector<std::size_t>> neighbors);

  std::size_t size() const noexcept { return static_cast<std::size_t>(positions_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(positions_.cols()); }
  const Eigen::MatrixXd& positions() const noexcept { return positions_; }
  Eigen::VectorXd position(std::size_t i) const { return positions_.row(static_cast<Eigen::Index>(i)).transpose(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }
  /// Undirected edges (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  bool has_state(const std::string& label) const;
  const Eigen::VectorXd& state(const std::string& label) const;
  /// Adds or replaces a state; its length must equal size().
  void set_state(const std::string& label, Eigen::VectorXd values);
  const std::vector<std::pair<std::string, Eigen::VectorXd>>& states() const noexcept { return states_; }

 private:
  Eigen::MatrixXd positions_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::pair<std::string, Eigen::VectorXd>> states_;
};

/// k-nearest-neighbor graph (Euclidean, ties broken by lower index) with symmetric closure.
/// Points closer than 1e-12 raise DataError listing both indices.
Graph build_graph(const Eigen::MatrixXd& points, std::size_t k);

/// Multi-indices α with 1 ≤ |α| ≤ max_degree in `dim` variables, ordered by degree, then
/// lexicographically descending in the leading component.
std::vector<std::vector<int>> moment_indices(std::size_t dim, int max_degree);

/// Number of moment conditions for a derivative of `order` at `accuracy` in `dim` variables.
std::size_t moment_count(std::size_t dim, int accuracy, int order);

/// Coefficients a_j of  D^β u(x̃) ≈ Σ_j a_j (u(x̃ + z_j) − u(x̃)),  where β is the multi-index built
/// from `dimensions` (one entry per differentiation, so order = dimensions.size()). The kernel
/// w_j / z_j^μ is folded into a_j. The moment conditions Σ_j a_j z_j^α / α! = δ_{αβ} are imposed
/// for 1 ≤ |α| ≤ accuracy + order − 1 and the minimum-norm solution is returned. Offsets are rows.
/// An unsatisfiable moment raises RankError naming it.
Eigen::VectorXd stencil_weights(const Eigen::MatrixXd& offsets, int accuracy, const std::vector<std::size_t>& dimensions);

struct DiffOpSpec {
  std::string function;
  std::vector<std::string> variable;
  std::string weight = "stencil";
  std::string adjacency = "nearest";
  std::vector<std::string> manifold;
  int accuracy = 2;
  /// Manifold axis per differentiation; a single entry with order 2 means a pure second derivative.
  std::vector<std::size_t> dimension{0};
  int order = 1;
  std::string operation = "partial";
  /// Neighborhood size; 0 selects moment_count + 2.
  std::size_t neighbors = 0;
  /// Output label; empty selects d(u)/d(x), d2(u)/d(x)2 or d2(u)/d(x)d(y).
  std::string label;

  /// ConfigError naming the offending field.
  void validate() const;
  /// Differentiation axes with length == order.
  std::vector<std::size_t> axes() const;
  std::string output_label() const;
  std::size_t neighborhood_size() const;
};

/// δu/δx^μ at every vertex, stored on the graph under spec.output_label() and returned.
/// The graph's positions are taken to be the manifold coordinates. Rank errors are rethrown
/// with the vertex index.
Eigen::VectorXd nonlocal_partial(Graph& graph, const DiffOpSpec& spec);

}  // namespace meso::graph
