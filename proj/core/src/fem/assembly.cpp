#include "meso/fem/assembly.hpp"

#include <cmath>
#include <string>

#include "meso/error.hpp"

namespace meso::fem {

double NodalResidual::interior_max_abs() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    auto n = static_cast<std::size_t>(i);
    if (!dirichlet[n] && !exterior[n]) m = std::max(m, std::abs(values(i)));
  }
  return m;
}

NodalResidual& NodalResidual::operator+=(const Eigen::VectorXd& extra) {
  if (extra.size() != values.size()) throw ShapeError("residual size mismatch");
  values += extra;
  return *this;
}

Eigen::VectorXd gather_element(const Eigen::VectorXd& field, const StructuredMesh& mesh, std::size_t e) {
  const auto nodes = mesh.element_nodes(e);
  const auto npe = static_cast<Eigen::Index>(mesh.nodes_per_element());
  Eigen::VectorXd ce(npe);
  for (Eigen::Index a = 0; a < npe; ++a) ce(a) = field(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]));
  return ce;
}

NodalResidual bulk_residual_diffusion(const Eigen::VectorXd& field, const StructuredMesh& mesh,
                                      const BoundaryMask& mask, double D, int quad_points) {
  const std::size_t nn = mesh.node_count();
  if (static_cast<std::size_t>(field.size()) != nn)
    throw ShapeError("field has " + std::to_string(field.size()) + " values, mesh has " + std::to_string(nn));
  if (mask.size() != nn) throw ShapeError("mask size does not match mesh");
  if (!(D > 0.0) || !std::isfinite(D)) throw ConfigError("diffusivity D must be positive");
  for (std::size_t n = 0; n < nn; ++n)
    if (!mask.is_exterior(n) && !std::isfinite(field(static_cast<Eigen::Index>(n))))
      throw DataError("non-finite field value at node " + std::to_string(n));

  const ShapeFunctions sf = shape_eval(mesh, gauss_rule(quad_points, mesh.dim()));
  const auto active = active_elements(mesh, mask);
  const auto npe = static_cast<Eigen::Index>(sf.nodes());
  Eigen::MatrixXd elem = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.element_count()), npe);

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!active[e]) continue;
    const Eigen::VectorXd ce = gather_element(field, mesh, e);
    for (std::size_t q = 0; q < sf.points(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      double flux[2] = {0.0, 0.0};
      for (int d = 0; d < mesh.dim(); ++d) flux[d] = -D * sf.B[static_cast<std::size_t>(d)].row(qi).dot(ce);
      const double w = sf.jxw(q);
      for (Eigen::Index a = 0; a < npe; ++a) {
        double s = 0.0;
        for (int d = 0; d < mesh.dim(); ++d) s += sf.B[static_cast<std::size_t>(d)](qi, a) * flux[d];
        elem(static_cast<Eigen::Index>(e), a) += s * w;
      }
    }
  }

  NodalResidual r;
  r.values = scatter_element_to_nodes(elem, mesh);
  r.dirichlet.resize(nn);
  r.exterior.resize(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    r.dirichlet[n] = mask.is_dirichlet(n);
    r.exterior[n] = mask.is_exterior(n);
  }
  return r;
}

namespace {

bool element_active(const StructuredMesh& mesh, const std::vector<bool>& active, long ei, long ej) {
  if (ei < 0 || ej < 0) return false;
  if (static_cast<std::size_t>(ei) >= mesh.elements_per_axis(0)) return false;
  if (mesh.dim() == 2 && static_cast<std::size_t>(ej) >= mesh.elements_per_axis(1)) return false;
  if (mesh.dim() == 1 && ej != 0) return false;
  std::size_t e = static_cast<std::size_t>(ei) + mesh.elements_per_axis(0) * static_cast<std::size_t>(ej);
  return active[e];
}

}  // namespace

Eigen::VectorXd neumann_residual(const StructuredMesh& mesh, const BoundaryMask& mask) {
  const std::size_t nn = mesh.node_count();
  if (mask.size() != nn) throw ShapeError("mask size does not match mesh");
  const auto active = active_elements(mesh, mask);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
  std::vector<bool> on_boundary(nn, false);
  auto is_neumann = [&](std::size_t n) { return mask.node_class(n) == NodeClass::neumann; };

  if (mesh.dim() == 1) {
    for (std::size_t i = 0; i < nn; ++i) {
      const long li = static_cast<long>(i);
      const int owners = int(element_active(mesh, active, li - 1, 0)) + int(element_active(mesh, active, li, 0));
      if (owners != 1) continue;
      on_boundary[i] = true;
      if (is_neumann(i)) r(static_cast<Eigen::Index>(i)) -= mask.neumann_value(i);
    }
  } else {
    const QuadratureRule edge_rule = gauss_rule(2, 1);
    auto add_edge = [&](std::size_t n0, std::size_t n1, double length) {
      on_boundary[n0] = on_boundary[n1] = true;
      if (!is_neumann(n0) || !is_neumann(n1)) return;
      const double h0 = mask.neumann_value(n0);
      const double h1 = mask.neumann_value(n1);
      for (std::size_t q = 0; q < edge_rule.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const double xi = edge_rule.points(qi, 0);
        const double N0 = 0.5 * (1.0 - xi);
        const double N1 = 0.5 * (1.0 + xi);
        const double w = edge_rule.weights(qi) * 0.5 * length;
        const double hbar = N0 * h0 + N1 * h1;
        r(static_cast<Eigen::Index>(n0)) -= N0 * hbar * w;
        r(static_cast<Eigen::Index>(n1)) -= N1 * hbar * w;
      }
    };
    const std::size_t nx = mesh.nodes_per_axis(0);
    const std::size_t ny = mesh.nodes_per_axis(1);
    // Edges along x: element above is (i, j), below is (i, j-1).
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const long li = static_cast<long>(i), lj = static_cast<long>(j);
        const int owners = int(element_active(mesh, active, li, lj)) + int(element_active(mesh, active, li, lj - 1));
        if (owners == 1) add_edge(mesh.node_index(i, j), mesh.node_index(i + 1, j), mesh.spacing(0));
      }
    // Edges along y: element right is (i, j), left is (i-1, j).
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const long li = static_cast<long>(i), lj = static_cast<long>(j);
        const int owners = int(element_active(mesh, active, li, lj)) + int(element_active(mesh, active, li - 1, lj));
        if (owners == 1) add_edge(mesh.node_index(i, j), mesh.node_index(i, j + 1), mesh.spacing(1));
      }
  }

  for (std::size_t n = 0; n < nn; ++n)
    if (is_neumann(n) && !on_boundary[n])
      throw DataError("Neumann node " + std::to_string(n) + " is not on the domain boundary");
  return r;
}

Eigen::VectorXd scatter_element_to_nodes(const Eigen::MatrixXd& element_values, const StructuredMesh& mesh) {
  if (static_cast<std::size_t>(element_values.rows()) != mesh.element_count() ||
      static_cast<std::size_t>(element_values.cols()) != mesh.nodes_per_element())
    throw DataError("element data is " + std::to_string(element_values.rows()) + "x" +
                    std::to_string(element_values.cols()) + ", expected " + std::to_string(mesh.element_count()) +
                    "x" + std::to_string(mesh.nodes_per_element()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.node_count()));
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t a = 0; a < mesh.nodes_per_element(); ++a)
      out(static_cast<Eigen::Index>(nodes[a])) += element_values(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(a));
  }
  return out;
}

Eigen::MatrixXd local_stiffness(const StructuredMesh& mesh) {
  const ShapeFunctions sf = shape_eval(mesh, gauss_rule(2, mesh.dim()));
  const auto npe = static_cast<Eigen::Index>(sf.nodes());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(npe, npe);
  for (std::size_t q = 0; q < sf.points(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    for (int d = 0; d < mesh.dim(); ++d) {
      const auto& b = sf.B[static_cast<std::size_t>(d)];
      k += sf.jxw(q) * b.row(qi).transpose() * b.row(qi);
    }
  }
  return k;
}

Eigen::MatrixXd local_mass(const StructuredMesh& mesh) {
  const ShapeFunctions sf = shape_eval(mesh, gauss_rule(2, mesh.dim()));
  const auto npe = static_cast<Eigen::Index>(sf.nodes());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(npe, npe);
  for (std::size_t q = 0; q < sf.points(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    m += sf.jxw(q) * sf.N.row(qi).transpose() * sf.N.row(qi);
  }
  return m;
}

namespace {

SparseMatrix assemble_local(const StructuredMesh& mesh, const Eigen::MatrixXd& local, const std::vector<bool>& active) {
  if (!active.empty() && active.size() != mesh.element_count()) throw ShapeError("active flag count mismatch");
  const std::size_t npe = mesh.nodes_per_element();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.element_count() * npe * npe);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!active.empty() && !active[e]) continue;
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t a = 0; a < npe; ++a)
      for (std::size_t b = 0; b < npe; ++b)
        trips.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]),
                           local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  }
  const auto nn = static_cast<Eigen::Index>(mesh.node_count());
  SparseMatrix m(nn, nn);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

SparseMatrix assemble_stiffness(const StructuredMesh& mesh, const std::vector<bool>& active) {
  return assemble_local(mesh, local_stiffness(mesh), active);
}

SparseMatrix assemble_mass(const StructuredMesh& mesh, const std::vector<bool>& active) {
  return assemble_local(mesh, local_mass(mesh), active);
}

Eigen::VectorXd lumped_mass(const StructuredMesh& mesh, const std::vector<bool>& active) {
  const SparseMatrix m = assemble_mass(mesh, active);
  return m * Eigen::VectorXd::Ones(m.cols());
}

}  // namespace meso::fem
