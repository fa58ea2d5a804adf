#include "meso/fem/basis.hpp"

#include <cmath>
#include <string>

#include "meso/error.hpp"

namespace meso::fem {

namespace {

void gauss_1d(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      return;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      return;
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      return;
    }
    default:
      throw ConfigError("n_points_per_axis must be 1, 2 or 3, got " + std::to_string(n));
  }
}

}  // namespace

QuadratureRule gauss_rule(int n_points_per_axis, int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("quadrature dim must be 1 or 2, got " + std::to_string(dim));
  std::vector<double> x, w;
  gauss_1d(n_points_per_axis, x, w);
  const auto n = static_cast<Eigen::Index>(x.size());
  QuadratureRule rule;
  rule.dim = dim;
  if (dim == 1) {
    rule.points.resize(n, 1);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rule.points(i, 0) = x[static_cast<std::size_t>(i)];
      rule.weights(i) = w[static_cast<std::size_t>(i)];
    }
    return rule;
  }
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index q = i + n * j;
      rule.points(q, 0) = x[static_cast<std::size_t>(i)];
      rule.points(q, 1) = x[static_cast<std::size_t>(j)];
      rule.weights(q) = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
    }
  return rule;
}

std::array<double, 4> reference_basis(int dim, double xi, double eta) {
  const double lx[2] = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)};
  if (dim == 1) return {lx[0], lx[1], 0.0, 0.0};
  const double ly[2] = {0.5 * (1.0 - eta), 0.5 * (1.0 + eta)};
  return {lx[0] * ly[0], lx[1] * ly[0], lx[0] * ly[1], lx[1] * ly[1]};
}

ShapeFunctions shape_eval(const StructuredMesh& mesh, const QuadratureRule& rule) {
  if (mesh.dim() != rule.dim)
    throw ConfigError("shape_eval: mesh dim " + std::to_string(mesh.dim()) + " != rule dim " +
                      std::to_string(rule.dim));
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const auto npe = static_cast<Eigen::Index>(mesh.nodes_per_element());
  ShapeFunctions sf;
  sf.N.resize(nq, npe);
  sf.B[0] = Eigen::MatrixXd::Zero(nq, npe);
  sf.B[1] = Eigen::MatrixXd::Zero(nq, npe);
  sf.weights = rule.weights;
  const double hx = mesh.spacing(0);
  const double hy = mesh.spacing(1);
  sf.detJ = mesh.dim() == 1 ? 0.5 * hx : 0.25 * hx * hy;

  for (Eigen::Index q = 0; q < nq; ++q) {
    const double xi = rule.points(q, 0);
    if (mesh.dim() == 1) {
      sf.N(q, 0) = 0.5 * (1.0 - xi);
      sf.N(q, 1) = 0.5 * (1.0 + xi);
      sf.B[0](q, 0) = -1.0 / hx;
      sf.B[0](q, 1) = 1.0 / hx;
      continue;
    }
    const double eta = rule.points(q, 1);
    const double lx[2] = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)};
    const double ly[2] = {0.5 * (1.0 - eta), 0.5 * (1.0 + eta)};
    const double dlx[2] = {-1.0 / hx, 1.0 / hx};
    const double dly[2] = {-1.0 / hy, 1.0 / hy};
    for (int ay = 0; ay < 2; ++ay)
      for (int ax = 0; ax < 2; ++ax) {
        const Eigen::Index a = ax + 2 * ay;
        sf.N(q, a) = lx[ax] * ly[ay];
        sf.B[0](q, a) = dlx[ax] * ly[ay];
        sf.B[1](q, a) = lx[ax] * dly[ay];
      }
  }
  return sf;
}

}  // namespace meso::fem
