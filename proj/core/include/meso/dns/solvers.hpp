#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>

#include "meso/dns/field_series.hpp"
#include "meso/fem/boundary.hpp"
#include "meso/fem/mesh.hpp"

namespace meso::dns {

/// Landau double well f(φ) = (φ² - 1)² and its derivatives.
inline double landau_f(double p) { return (p * p - 1.0) * (p * p - 1.0); }
inline double landau_df(double p) { return 4.0 * p * p * p - 4.0 * p; }
inline double landau_d2f(double p) { return 12.0 * p * p - 4.0; }

struct AllenCahnParams {
  double mobility = 1e-3;  // M_φ
  double lambda = 1.0;     // gradient coefficient
  double dt = 0.01;
  std::size_t steps = 300;
  std::size_t nodes = 129;
  double length = 32.0;
  std::size_t save_every = 1;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  fem::StructuredMesh mesh() const { return fem::StructuredMesh::interval(nodes, length); }
  void validate() const;
};

/// Backward-Euler, Newton-solved, linear-FEM Allen-Cahn on an interval with no-flux ends.
/// Returns snapshots every `save_every` steps, always including t = 0 and the last step.
FieldSeries solve_allen_cahn_1d(const AllenCahnParams& params, const Eigen::VectorXd& phi0);

/// Smooth random initial condition with ±1 plateaus: a seeded low-frequency cosine series s(x)
/// sets the phase layout, and φ0 = sign(s) tanh(d / w) where d is the distance to the nearest
/// zero of s and w is drawn from [0.4, 1.0].
Eigen::VectorXd allen_cahn_initial_condition(const AllenCahnParams& params, std::uint64_t seed);

/// Ψ = ∫ f(φ_h) + (λ/2)|∇φ_h|² dx with 3-point Gauss on each element.
double allen_cahn_energy(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi, double lambda);

struct SchnakenbergParams {
  // Diffusivity matrix D(a, b): flux of species a driven by gradient of species b.
  std::array<std::array<double, 2>, 2> D{{{1.0, 0.0}, {0.0, 40.0}}};
  // Reaction rates R(a, k) for the terms {1, c1, c2, c1² c2}.
  std::array<std::array<double, 4>, 2> R{{{0.1, -1.0, 0.0, 1.0}, {0.9, 0.0, 0.0, -1.0}}};
  double dt = 1e-3;
  std::size_t steps = 20000;
  std::size_t nodes = 64;     // per axis
  double length = 32.0;       // square side
  std::size_t save_every = 1000;
  /// Also keep the snapshot one step before each saved one, so backward differences at saved
  /// times use a single time step.
  bool save_pairs = true;
  /// Stop early once max |Δc|/Δt falls below this value (0 disables).
  double steady_tol = 0.0;
  double blowup = 1e6;

  fem::StructuredMesh mesh() const { return fem::StructuredMesh::rectangle(nodes, nodes, length, length); }
  void validate() const;
};

/// Spatially uniform fixed point of the reaction terms (Newton from the Schnakenberg guess).
std::array<double, 2> schnakenberg_fixed_point(const SchnakenbergParams& params);

/// Uniform fixed point times (1 + amplitude·ξ) with ξ uniform in [-1, 1], seeded.
std::pair<Eigen::VectorXd, Eigen::VectorXd> schnakenberg_initial_state(const SchnakenbergParams& params,
                                                                       std::uint64_t seed, double amplitude = 0.01);

/// Implicit coupled diffusion, explicit reaction evaluated at the previous step, consistent
/// mass and 2×2 Gauss quadrature; no-flux boundaries.
std::pair<FieldSeries, FieldSeries> solve_schnakenberg_2d(const SchnakenbergParams& params,
                                                          const Eigen::VectorXd& c1_0, const Eigen::VectorXd& c2_0);

/// Solves D K c = -∫Nᵀ H̄ with Dirichlet rows eliminated. Requires a Dirichlet node.
Eigen::VectorXd solve_steady_diffusion(const fem::StructuredMesh& mesh, const fem::BoundaryMask& mask, double D);

}  // namespace meso::dns
