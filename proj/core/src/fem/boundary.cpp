#include "meso/fem/boundary.hpp"

#include <cmath>
#include <string>

#include "meso/error.hpp"
#include "meso/table.hpp"

namespace meso::fem {

BoundaryMask::BoundaryMask(std::size_t nodes)
    : cls_(nodes, NodeClass::interior), dval_(nodes, 0.0), nval_(nodes, 0.0) {}

void BoundaryMask::set_interior(std::size_t n) {
  cls_.at(n) = NodeClass::interior;
  dval_[n] = 0.0;
  nval_[n] = 0.0;
}

void BoundaryMask::set_dirichlet(std::size_t n, double value) {
  cls_.at(n) = NodeClass::dirichlet;
  dval_[n] = value;
  nval_[n] = 0.0;
}

void BoundaryMask::set_neumann(std::size_t n, double flux) {
  cls_.at(n) = NodeClass::neumann;
  dval_[n] = 0.0;
  nval_[n] = flux;
}

void BoundaryMask::set_exterior(std::size_t n) {
  cls_.at(n) = NodeClass::exterior;
  dval_[n] = 0.0;
  nval_[n] = 0.0;
}

std::size_t BoundaryMask::count(NodeClass c) const noexcept {
  std::size_t k = 0;
  for (auto v : cls_) k += v == c ? 1 : 0;
  return k;
}

BoundaryMask boundary_masks_from_input(const StructuredMesh& mesh, const BcImage& image) {
  const std::size_t nn = mesh.node_count();
  if (image.dirichlet.size() != nn || image.neumann.size() != nn)
    throw ShapeError("bc image has " + std::to_string(image.dirichlet.size()) + "/" +
                     std::to_string(image.neumann.size()) + " entries, mesh has " + std::to_string(nn) + " nodes");
  BoundaryMask mask(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    const double d = image.dirichlet[n];
    const double q = image.neumann[n];
    if (!std::isfinite(d) || !std::isfinite(q))
      throw DataError("bc image: non-finite value at node " + std::to_string(n));
    const bool has_d = d != BcImage::not_set;
    const bool ext = q == BcImage::exterior;
    const bool has_q = !ext && q != BcImage::not_set;
    if (has_d && (ext || has_q))
      throw DataError("bc image: node " + std::to_string(n) + " is both Dirichlet and " +
                      (ext ? "exterior" : "Neumann"));
    if (has_d)
      mask.set_dirichlet(n, d);
    else if (ext)
      mask.set_exterior(n);
    else if (has_q)
      mask.set_neumann(n, q);
  }
  return mask;
}

BcImage encode_bc_image(const BoundaryMask& mask) {
  BcImage img = BcImage::all_interior(mask.size());
  for (std::size_t n = 0; n < mask.size(); ++n) {
    switch (mask.node_class(n)) {
      case NodeClass::interior:
        break;
      case NodeClass::dirichlet:
        if (mask.dirichlet_value(n) == BcImage::not_set)
          throw DataError("node " + std::to_string(n) + ": Dirichlet value -1 collides with the sentinel");
        img.dirichlet[n] = mask.dirichlet_value(n);
        break;
      case NodeClass::neumann:
        if (mask.neumann_value(n) == BcImage::not_set || mask.neumann_value(n) == BcImage::exterior)
          throw DataError("node " + std::to_string(n) + ": Neumann value collides with a sentinel");
        img.neumann[n] = mask.neumann_value(n);
        break;
      case NodeClass::exterior:
        img.neumann[n] = BcImage::exterior;
        break;
    }
  }
  return img;
}

std::vector<std::size_t> side_nodes(const StructuredMesh& mesh, int side) {
  std::vector<std::size_t> out;
  const std::size_t nx = mesh.nodes_per_axis(0);
  const std::size_t ny = mesh.dim() == 2 ? mesh.nodes_per_axis(1) : 1;
  if (mesh.dim() == 1 && side > 1) throw ConfigError("1D mesh has sides 0 and 1 only");
  switch (side) {
    case 0:
    case 1:
      for (std::size_t j = 0; j < ny; ++j) out.push_back(mesh.node_index(side == 0 ? 0 : nx - 1, j));
      break;
    case 2:
    case 3:
      for (std::size_t i = 0; i < nx; ++i) out.push_back(mesh.node_index(i, side == 2 ? 0 : ny - 1));
      break;
    default:
      throw ConfigError("side must be 0..3, got " + std::to_string(side));
  }
  return out;
}

std::vector<bool> active_elements(const StructuredMesh& mesh, const BoundaryMask& mask) {
  if (mask.size() != mesh.node_count()) throw ShapeError("mask size does not match mesh");
  std::vector<bool> active(mesh.element_count(), true);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    auto nodes = mesh.element_nodes(e);
    for (std::size_t a = 0; a < mesh.nodes_per_element(); ++a)
      if (mask.is_exterior(nodes[a])) active[e] = false;
  }
  return active;
}

namespace {

Table node_table(const StructuredMesh& mesh) {
  std::vector<double> x(mesh.node_count()), y(mesh.node_count());
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    auto p = mesh.node_position(n);
    x[n] = p[0];
    y[n] = p[1];
  }
  Table t;
  t.add_column("x", std::move(x));
  t.add_column("y", std::move(y));
  return t;
}

void check_rows(const StructuredMesh& mesh, const Table& t, const std::filesystem::path& path) {
  if (t.rows() != mesh.node_count())
    throw DataError(path.string() + ": " + std::to_string(t.rows()) + " rows, mesh has " +
                    std::to_string(mesh.node_count()) + " nodes");
}

}  // namespace

void write_bc_image_csv(const StructuredMesh& mesh, const BcImage& image, const std::filesystem::path& path) {
  if (image.size() != mesh.node_count()) throw ShapeError("bc image size does not match mesh");
  Table t = node_table(mesh);
  t.add_column("dirichlet", image.dirichlet);
  t.add_column("neumann", image.neumann);
  emit_plot_data(t, path);
}

BcImage read_bc_image_csv(const StructuredMesh& mesh, const std::filesystem::path& path) {
  Table t = read_csv(path);
  check_rows(mesh, t, path);
  return {t.column("dirichlet"), t.column("neumann")};
}

void write_nodal_csv(const StructuredMesh& mesh, const Eigen::VectorXd& values, const std::filesystem::path& path) {
  if (static_cast<std::size_t>(values.size()) != mesh.node_count())
    throw ShapeError("nodal field size does not match mesh");
  Table t = node_table(mesh);
  t.add_column("value", std::vector<double>(values.begin(), values.end()));
  emit_plot_data(t, path);
}

Eigen::VectorXd read_nodal_csv(const StructuredMesh& mesh, const std::filesystem::path& path) {
  Table t = read_csv(path);
  check_rows(mesh, t, path);
  const auto& v = t.column("value");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace meso::fem
