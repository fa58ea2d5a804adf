#include <Eigen/SparseCholesky>
#include <cmath>
#include <string>

#include "meso/dns/solvers.hpp"
#include "meso/error.hpp"
#include "meso/fem/assembly.hpp"
#include "meso/table.hpp"

namespace meso::dns {

Eigen::VectorXd solve_steady_diffusion(const fem::StructuredMesh& mesh, const fem::BoundaryMask& mask, double D) {
  using fem::NodeClass;
  const std::size_t nn = mesh.node_count();
  if (mask.size() != nn) throw ShapeError("mask size does not match mesh");
  if (!(D > 0.0) || !std::isfinite(D)) throw ConfigError("diffusivity D must be positive");
  if (mask.count(NodeClass::dirichlet) == 0)
    throw PreconditionError("steady diffusion is ill-posed without a Dirichlet node");

  const auto active = fem::active_elements(mesh, mask);
  const fem::SparseMatrix K = fem::assemble_stiffness(mesh, active);
  const Eigen::VectorXd load = fem::neumann_residual(mesh, mask);

  // Unknowns are the free (non-Dirichlet, non-exterior) nodes.
  std::vector<Eigen::Index> free_id(nn, -1);
  Eigen::Index nfree = 0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
  for (std::size_t n = 0; n < nn; ++n) {
    if (mask.is_dirichlet(n))
      c(static_cast<Eigen::Index>(n)) = mask.dirichlet_value(n);
    else if (!mask.is_exterior(n))
      free_id[n] = nfree++;
  }

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (std::size_t n = 0; n < nn; ++n)
    if (free_id[n] >= 0) rhs(free_id[n]) = load(static_cast<Eigen::Index>(n));
  std::vector<bool> has_diag(static_cast<std::size_t>(nfree), false);
  for (int k = 0; k < K.outerSize(); ++k)
    for (fem::SparseMatrix::InnerIterator it(K, k); it; ++it) {
      const auto r = free_id[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      const auto col = static_cast<std::size_t>(it.col());
      const double v = D * it.value();
      if (free_id[col] >= 0) {
        trips.emplace_back(static_cast<int>(r), static_cast<int>(free_id[col]), v);
        if (free_id[col] == r && v != 0.0) has_diag[static_cast<std::size_t>(r)] = true;
      } else {
        rhs(r) -= v * c(it.col());
      }
    }
  for (std::size_t n = 0; n < nn; ++n)
    if (free_id[n] >= 0 && !has_diag[static_cast<std::size_t>(free_id[n])])
      throw SolverError("singular system: node " + std::to_string(n) + " touches no active element");

  if (nfree > 0) {
    fem::SparseMatrix A(nfree, nfree);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<fem::SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SolverError("steady diffusion system is singular");
    const Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SolverError("steady diffusion solve failed");
    for (std::size_t n = 0; n < nn; ++n)
      if (free_id[n] >= 0) c(static_cast<Eigen::Index>(n)) = x(free_id[n]);
  }

  fem::NodalResidual r = fem::bulk_residual_diffusion(c, mesh, mask, D);
  r += load;
  const double scale = std::max({1.0, load.cwiseAbs().maxCoeff(), D * c.cwiseAbs().maxCoeff()});
  const double rmax = r.interior_max_abs();
  if (!(rmax < 1e-8 * scale))
    throw SolverError("steady diffusion residual check failed: max |R| = " + format_number(rmax));
  return c;
}

}  // namespace meso::dns
