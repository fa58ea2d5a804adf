#include "meso/fem/mesh.hpp"

#include <cmath>
#include <string>

#include "meso/error.hpp"

namespace meso::fem {

StructuredMesh::StructuredMesh(int dim, std::array<std::size_t, 2> nodes_per_axis, std::array<double, 2> spacing,
                               std::array<double, 2> origin)
    : dim_(dim), nodes_(nodes_per_axis), h_(spacing), origin_(origin) {
  if (dim != 1 && dim != 2) throw ConfigError("mesh dim must be 1 or 2, got " + std::to_string(dim));
  if (dim == 1) {
    nodes_[1] = 1;
    h_[1] = 1.0;
    origin_[1] = 0.0;
  }
  for (int a = 0; a < dim; ++a) {
    auto ua = static_cast<std::size_t>(a);
    if (nodes_[ua] < 2) throw ConfigError("nodes_per_axis must be >= 2 on axis " + std::to_string(a));
    if (!(h_[ua] > 0.0) || !std::isfinite(h_[ua]))
      throw ConfigError("spacing h must be positive on axis " + std::to_string(a));
  }
}

StructuredMesh StructuredMesh::interval(std::size_t nodes, double length, double x0) {
  if (nodes < 2) throw ConfigError("nodes_per_axis must be >= 2");
  return StructuredMesh(1, {nodes, 1}, {length / static_cast<double>(nodes - 1), 1.0}, {x0, 0.0});
}

StructuredMesh StructuredMesh::rectangle(std::size_t nx, std::size_t ny, double lx, double ly) {
  if (nx < 2 || ny < 2) throw ConfigError("nodes_per_axis must be >= 2");
  return StructuredMesh(2, {nx, ny}, {lx / static_cast<double>(nx - 1), ly / static_cast<double>(ny - 1)});
}

std::size_t StructuredMesh::node_count() const noexcept { return nodes_[0] * (dim_ == 2 ? nodes_[1] : 1); }

std::size_t StructuredMesh::element_count() const noexcept {
  return (nodes_[0] - 1) * (dim_ == 2 ? nodes_[1] - 1 : 1);
}

double StructuredMesh::measure() const noexcept { return dim_ == 1 ? length(0) : length(0) * length(1); }

std::array<double, 2> StructuredMesh::node_position(std::size_t n) const noexcept {
  auto [i, j] = node_ij(n);
  return {origin_[0] + h_[0] * static_cast<double>(i),
          dim_ == 2 ? origin_[1] + h_[1] * static_cast<double>(j) : 0.0};
}

std::array<std::size_t, 4> StructuredMesh::element_nodes(std::size_t e) const noexcept {
  if (dim_ == 1) return {e, e + 1, 0, 0};
  auto [ei, ej] = element_ij(e);
  std::size_t n0 = node_index(ei, ej);
  return {n0, n0 + 1, n0 + nodes_[0], n0 + nodes_[0] + 1};
}

bool StructuredMesh::on_mesh_boundary(std::size_t n) const noexcept {
  auto [i, j] = node_ij(n);
  if (i == 0 || i + 1 == nodes_[0]) return true;
  return dim_ == 2 && (j == 0 || j + 1 == nodes_[1]);
}

}  // namespace meso::fem
