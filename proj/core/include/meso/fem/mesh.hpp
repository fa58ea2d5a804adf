#pragma once

#include <array>
#include <cstddef>

namespace meso::fem {

/// Uniform structured grid in 1D or 2D. Nodes are numbered x-fastest: n = i + nx * j.
/// Elements follow the same ordering; local nodes use tensor order a = ax + 2 * ay.
class StructuredMesh {
 public:
  StructuredMesh(int dim, std::array<std::size_t, 2> nodes_per_axis, std::array<double, 2> spacing,
                 std::array<double, 2> origin = {0.0, 0.0});

  static StructuredMesh interval(std::size_t nodes, double length, double x0 = 0.0);
  static StructuredMesh rectangle(std::size_t nx, std::size_t ny, double lx, double ly);

  int dim() const noexcept { return dim_; }
  std::size_t nodes_per_axis(int axis) const noexcept { return nodes_[static_cast<std::size_t>(axis)]; }
  std::size_t elements_per_axis(int axis) const noexcept { return nodes_per_axis(axis) - 1; }
  double spacing(int axis) const noexcept { return h_[static_cast<std::size_t>(axis)]; }
  double origin(int axis) const noexcept { return origin_[static_cast<std::size_t>(axis)]; }
  double length(int axis) const noexcept { return spacing(axis) * static_cast<double>(elements_per_axis(axis)); }

  std::size_t node_count() const noexcept;
  std::size_t element_count() const noexcept;
  std::size_t nodes_per_element() const noexcept { return dim_ == 1 ? 2 : 4; }
  /// Measure of the whole domain (length or area).
  double measure() const noexcept;

  std::size_t node_index(std::size_t i, std::size_t j = 0) const noexcept { return i + nodes_[0] * j; }
  std::array<std::size_t, 2> node_ij(std::size_t n) const noexcept { return {n % nodes_[0], n / nodes_[0]}; }
  std::array<double, 2> node_position(std::size_t n) const noexcept;

  std::array<std::size_t, 2> element_ij(std::size_t e) const noexcept {
    return {e % elements_per_axis(0), e / elements_per_axis(0)};
  }
  /// Global node ids of element e in local order; entries past nodes_per_element() are unused.
  std::array<std::size_t, 4> element_nodes(std::size_t e) const noexcept;

  bool on_mesh_boundary(std::size_t n) const noexcept;

  friend bool operator==(const StructuredMesh&, const StructuredMesh&) = default;

 private:
  int dim_;
  std::array<std::size_t, 2> nodes_;
  std::array<double, 2> h_;
  std::array<double, 2> origin_;
};

}  // namespace meso::fem
