#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "meso/fem/mesh.hpp"

namespace meso::fem {

/// Points live in the reference element [-1,1]^dim; one row per point.
struct QuadratureRule {
  int dim = 1;
  Eigen::MatrixXd points;   // n x dim
  Eigen::VectorXd weights;  // n

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

/// Tensor-product Gauss-Legendre rule with n points per axis, n in {1, 2, 3}.
QuadratureRule gauss_rule(int n_points_per_axis, int dim);

/// Linear (1D) or bilinear (2D) Lagrange basis sampled at the points of a rule.
/// The grid is uniform, so one table serves every element.
struct ShapeFunctions {
  Eigen::MatrixXd N;                // quad point x local node
  std::array<Eigen::MatrixXd, 2> B; // physical d/dx, d/dy; quad point x local node
  double detJ = 0.0;                // (hx/2) or (hx/2)(hy/2)
  Eigen::VectorXd weights;          // reference weights of the rule

  std::size_t points() const noexcept { return static_cast<std::size_t>(N.rows()); }
  std::size_t nodes() const noexcept { return static_cast<std::size_t>(N.cols()); }
  /// Integration weight of quad point q in physical space.
  double jxw(std::size_t q) const noexcept { return weights(static_cast<Eigen::Index>(q)) * detJ; }
};

ShapeFunctions shape_eval(const StructuredMesh& mesh, const QuadratureRule& rule);

/// Reference basis values at one point (tensor local order).
std::array<double, 4> reference_basis(int dim, double xi, double eta = 0.0);

}  // namespace meso::fem
