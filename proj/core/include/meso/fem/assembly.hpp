#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "meso/fem/basis.hpp"
#include "meso/fem/boundary.hpp"
#include "meso/fem/mesh.hpp"

namespace meso::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal residual with Dirichlet and exterior rows kept and flagged, so the caller decides
/// between row elimination and penalty treatment.
struct NodalResidual {
  Eigen::VectorXd values;
  std::vector<bool> dirichlet;
  std::vector<bool> exterior;

  /// Max |R| over rows that are neither Dirichlet nor exterior.
  double interior_max_abs() const;
  NodalResidual& operator+=(const Eigen::VectorXd& extra);
};

/// R = sum_e ∫ Bᵀ(-D ∇c) dV over active elements, scattered to nodes.
NodalResidual bulk_residual_diffusion(const Eigen::VectorXd& field, const StructuredMesh& mesh,
                                      const BoundaryMask& mask, double D, int quad_points = 2);

/// -∫ Nᵀ H̄ dS over Neumann edges of the active region. An edge counts when it is owned by exactly
/// one active element and both its end nodes are Neumann nodes; H̄ is interpolated linearly along it.
Eigen::VectorXd neumann_residual(const StructuredMesh& mesh, const BoundaryMask& mask);

/// Additive scatter of (element, local node) data onto global nodes.
Eigen::VectorXd scatter_element_to_nodes(const Eigen::MatrixXd& element_values, const StructuredMesh& mesh);

/// Nodal values of element e in local order.
Eigen::VectorXd gather_element(const Eigen::VectorXd& field, const StructuredMesh& mesh, std::size_t e);

/// Element matrices ∫ B·B dV and ∫ N Nᵀ dV on the uniform reference element.
Eigen::MatrixXd local_stiffness(const StructuredMesh& mesh);
Eigen::MatrixXd local_mass(const StructuredMesh& mesh);

/// Global matrices over the active elements (all elements when `active` is empty).
SparseMatrix assemble_stiffness(const StructuredMesh& mesh, const std::vector<bool>& active = {});
SparseMatrix assemble_mass(const StructuredMesh& mesh, const std::vector<bool>& active = {});

/// Diagonal (row-sum) lumped mass.
Eigen::VectorXd lumped_mass(const StructuredMesh& mesh, const std::vector<bool>& active = {});

}  // namespace meso::fem
