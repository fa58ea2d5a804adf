#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "meso/fem/mesh.hpp"

namespace meso::fem {

enum class NodeClass { interior, dirichlet, neumann, exterior };

/// Two-channel nodal boundary-condition image.
///   dirichlet[n]: prescribed value c̄, or -1 for "not Dirichlet".
///   neumann[n]:   prescribed outward flux H̄, -1 for "not Neumann", -2 for an exterior node.
/// Only the exact sentinel values are special, so a Dirichlet value of exactly -1 cannot be encoded.
struct BcImage {
  static constexpr double not_set = -1.0;
  static constexpr double exterior = -2.0;

  std::vector<double> dirichlet;
  std::vector<double> neumann;

  static BcImage all_interior(std::size_t nodes) {
    return {std::vector<double>(nodes, not_set), std::vector<double>(nodes, not_set)};
  }
  std::size_t size() const noexcept { return dirichlet.size(); }
};

/// Per-node classification plus prescribed values. Values are zero on nodes of other classes.
class BoundaryMask {
 public:
  BoundaryMask() = default;
  explicit BoundaryMask(std::size_t nodes);

  std::size_t size() const noexcept { return cls_.size(); }
  NodeClass node_class(std::size_t n) const { return cls_.at(n); }
  double dirichlet_value(std::size_t n) const { return dval_.at(n); }
  double neumann_value(std::size_t n) const { return nval_.at(n); }

  void set_interior(std::size_t n);
  void set_dirichlet(std::size_t n, double value);
  void set_neumann(std::size_t n, double flux);
  void set_exterior(std::size_t n);

  bool is_dirichlet(std::size_t n) const { return node_class(n) == NodeClass::dirichlet; }
  bool is_exterior(std::size_t n) const { return node_class(n) == NodeClass::exterior; }
  std::size_t count(NodeClass c) const noexcept;

  friend bool operator==(const BoundaryMask&, const BoundaryMask&) = default;

 private:
  std::vector<NodeClass> cls_;
  std::vector<double> dval_;
  std::vector<double> nval_;
};

/// Decodes a BC image. Throws DataError with the node index on non-finite entries or on
/// channels that contradict each other (e.g. a Dirichlet value on a Neumann or exterior node).
BoundaryMask boundary_masks_from_input(const StructuredMesh& mesh, const BcImage& image);
BcImage encode_bc_image(const BoundaryMask& mask);

/// Convenience builders for rectangular domains. Sides: 0 = x-min, 1 = x-max, 2 = y-min, 3 = y-max.
std::vector<std::size_t> side_nodes(const StructuredMesh& mesh, int side);

/// An element is active when none of its nodes is exterior.
std::vector<bool> active_elements(const StructuredMesh& mesh, const BoundaryMask& mask);

/// CSV with columns x, y, dirichlet, neumann; one row per node in mesh order.
void write_bc_image_csv(const StructuredMesh& mesh, const BcImage& image, const std::filesystem::path& path);
BcImage read_bc_image_csv(const StructuredMesh& mesh, const std::filesystem::path& path);

/// CSV with columns x, y, value.
void write_nodal_csv(const StructuredMesh& mesh, const Eigen::VectorXd& values, const std::filesystem::path& path);
Eigen::VectorXd read_nodal_csv(const StructuredMesh& mesh, const std::filesystem::path& path);

}  // namespace meso::fem
