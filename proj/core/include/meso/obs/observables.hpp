#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "meso/dns/field_series.hpp"
#include "meso/dns/solvers.hpp"
#include "meso/fem/mesh.hpp"
#include "meso/table.hpp"

namespace meso::obs {

/// The functions g(φ) whose phase averages are tracked, in column order:
/// phi, phi^2, phi^3, phi^4, phi^5, f(phi), f'(phi), lap(phi), |grad(phi)|^2.
const std::vector<std::string>& observable_functions();
inline constexpr std::size_t kFunctionCount = 9;

/// "phi_<g>+" or "phi_<g>-".
std::string phase_label(const std::string& g, bool positive);
/// All 18 phase-average labels: for each g, the "+" column then the "−" column.
std::vector<std::string> phase_labels();

/// Nodal Laplacian estimate Δφ = −M⁻¹Kφ from the consistent mass and stiffness matrices of
/// linear elements; the natural (no-flux) boundary term is implied. 1D meshes only.
Eigen::VectorXd nodal_laplacian(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi);

/// φ_{g±} = (1/|Ω|) ∫ g(φ_h) I(±φ_h) dΩ for every g, ordered as phase_labels(). Elements that
/// change sign are split at the zero of the linear interpolant, and each piece is integrated with
/// five-point Gauss, so polynomial observables are integrated exactly. The zero set belongs to "+".
/// CapabilityError for a non-1D mesh, ShapeError on a size mismatch.
std::array<double, 2 * kFunctionCount> phase_averages(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi);

struct Energies {
  double psi = 0.0;       ///< ∫ f(φ) + (λ/2)|∇φ|² dΩ
  double psi_plus = 0.0;  ///< the same integral over φ ≥ 0
};

Energies total_energy(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi, double lambda);

/// One row per snapshot: trajectory, time, the 18 phase averages, Psi, Psi+.
/// CapabilityError for a non-1D series.
Table observable_table(const dns::FieldSeries& series, double lambda, std::size_t trajectory = 0);

/// Rows of every table concatenated; all inputs must share the column layout.
Table concatenate(const std::vector<Table>& tables);

struct EnsembleConfig {
  dns::AllenCahnParams dns;   ///< dns.save_every is the sampling stride of the observables
  std::size_t trajectories = 100;
  std::uint64_t seed = 0;     ///< trajectory i starts from allen_cahn_initial_condition(dns, seed + i)
  std::size_t threads = 0;    ///< worker threads for the simulations; 0 uses the hardware concurrency

  EnsembleConfig() { dns.save_every = 10; }
  void validate() const;
};

/// Simulates every trajectory (in parallel) and returns the observable tables concatenated in
/// trajectory order; the result does not depend on the thread count.
Table simulate_ensemble(const EnsembleConfig& config);

}  // namespace meso::obs
