#include <Eigen/SparseLU>
#include <cmath>
#include <random>
#include <string>

#include "meso/dns/solvers.hpp"
#include "meso/error.hpp"
#include "meso/fem/assembly.hpp"
#include "meso/fem/basis.hpp"
#include "meso/table.hpp"

namespace meso::dns {

void SchnakenbergParams::validate() const {
  for (const auto& row : D)
    for (double v : row)
      if (!std::isfinite(v)) throw ConfigError("diffusivities must be finite");
  for (const auto& row : R)
    for (double v : row)
      if (!std::isfinite(v)) throw ConfigError("reaction rates must be finite");
  if (!(D[0][0] > 0.0)) throw ConfigError("D11 must be > 0");
  if (!(D[1][1] > 0.0)) throw ConfigError("D22 must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (nodes < 2) throw ConfigError("nodes must be >= 2");
  if (!(length > 0.0)) throw ConfigError("length must be > 0");
  if (save_every == 0) throw ConfigError("save_every must be >= 1");
  if (!(blowup > 0.0)) throw ConfigError("blowup threshold must be > 0");
}

std::array<double, 2> schnakenberg_fixed_point(const SchnakenbergParams& p) {
  auto rate = [&](int a, double u, double v) {
    const auto& r = p.R[static_cast<std::size_t>(a)];
    return r[0] + r[1] * u + r[2] * v + r[3] * u * u * v;
  };
  const double a = p.R[0][0], b = p.R[1][0];
  double u = std::abs(a + b) > 1e-12 ? a + b : 1.0;
  double v = std::abs(a + b) > 1e-12 ? b / ((a + b) * (a + b)) : 1.0;
  for (int it = 0; it < 100; ++it) {
    const double f = rate(0, u, v), g = rate(1, u, v);
    if (std::abs(f) + std::abs(g) < 1e-14) break;
    const auto& r0 = p.R[0];
    const auto& r1 = p.R[1];
    const double fu = r0[1] + 2.0 * r0[3] * u * v, fv = r0[2] + r0[3] * u * u;
    const double gu = r1[1] + 2.0 * r1[3] * u * v, gv = r1[2] + r1[3] * u * u;
    const double det = fu * gv - fv * gu;
    if (std::abs(det) < 1e-300) throw SolverError("reaction Jacobian is singular at the fixed-point iterate");
    u -= (gv * f - fv * g) / det;
    v -= (-gu * f + fu * g) / det;
  }
  if (std::abs(rate(0, u, v)) + std::abs(rate(1, u, v)) > 1e-10)
    throw SolverError("no uniform fixed point found for the reaction terms");
  return {u, v};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> schnakenberg_initial_state(const SchnakenbergParams& p,
                                                                       std::uint64_t seed, double amplitude) {
  p.validate();
  const auto fp = schnakenberg_fixed_point(p);
  const auto n = static_cast<Eigen::Index>(p.mesh().node_count());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd c1(n), c2(n);
  for (Eigen::Index i = 0; i < n; ++i) c1(i) = fp[0] * (1.0 + amplitude * unit(rng));
  for (Eigen::Index i = 0; i < n; ++i) c2(i) = fp[1] * (1.0 + amplitude * unit(rng));
  return {c1, c2};
}

namespace {

/// ∫ N_i g_a(c1_h, c2_h) for both species with the 2×2 Gauss rule.
void reaction_load(const fem::StructuredMesh& mesh, const fem::ShapeFunctions& sf, const SchnakenbergParams& p,
                   const Eigen::VectorXd& c1, const Eigen::VectorXd& c2, Eigen::VectorXd& out) {
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  out.setZero(2 * n);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    double u[4], v[4];
    for (int a = 0; a < 4; ++a) {
      u[a] = c1(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]));
      v[a] = c2(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]));
    }
    for (std::size_t q = 0; q < sf.points(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      double uq = 0.0, vq = 0.0;
      for (int a = 0; a < 4; ++a) {
        uq += sf.N(qi, a) * u[a];
        vq += sf.N(qi, a) * v[a];
      }
      const double cubic = uq * uq * vq;
      const double w = sf.jxw(q);
      const double g0 = (p.R[0][0] + p.R[0][1] * uq + p.R[0][2] * vq + p.R[0][3] * cubic) * w;
      const double g1 = (p.R[1][0] + p.R[1][1] * uq + p.R[1][2] * vq + p.R[1][3] * cubic) * w;
      for (int a = 0; a < 4; ++a) {
        const auto node = static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]);
        out(node) += sf.N(qi, a) * g0;
        out(n + node) += sf.N(qi, a) * g1;
      }
    }
  }
}

}  // namespace

std::pair<FieldSeries, FieldSeries> solve_schnakenberg_2d(const SchnakenbergParams& p, const Eigen::VectorXd& c1_0,
                                                          const Eigen::VectorXd& c2_0) {
  p.validate();
  const auto mesh = p.mesh();
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  if (c1_0.size() != n || c2_0.size() != n) throw ShapeError("initial fields do not match the mesh node count");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(c1_0(i) > 0.0) || !(c2_0(i) > 0.0) || !std::isfinite(c1_0(i)) || !std::isfinite(c2_0(i)))
      throw DataError("initial concentrations must be positive and finite (node " + std::to_string(i) + ")");

  const fem::SparseMatrix M = fem::assemble_mass(mesh);
  const fem::SparseMatrix K = fem::assemble_stiffness(mesh);
  const double inv_dt = 1.0 / p.dt;

  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&](const fem::SparseMatrix& m, double scale, Eigen::Index r0, Eigen::Index c0) {
    if (scale == 0.0) return;
    for (int k = 0; k < m.outerSize(); ++k)
      for (fem::SparseMatrix::InnerIterator it(m, k); it; ++it)
        trips.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), scale * it.value());
  };
  add_block(M, inv_dt, 0, 0);
  add_block(M, inv_dt, n, n);
  add_block(K, p.D[0][0], 0, 0);
  add_block(K, p.D[0][1], 0, n);
  add_block(K, p.D[1][0], n, 0);
  add_block(K, p.D[1][1], n, n);
  fem::SparseMatrix A(2 * n, 2 * n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<fem::SparseMatrix> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("Schnakenberg diffusion operator factorization failed");

  const fem::ShapeFunctions sf = fem::shape_eval(mesh, fem::gauss_rule(2, 2));
  FieldSeries s1(mesh, "c1"), s2(mesh, "c2");
  s1.append(0.0, c1_0);
  s2.append(0.0, c2_0);
  std::size_t last_saved = 0;

  Eigen::VectorXd c(2 * n), cprev(2 * n), rhs(2 * n), load;
  c << c1_0, c2_0;
  auto emit = [&](std::size_t step, const Eigen::VectorXd& v) {
    if (step <= last_saved) return;
    const double t = static_cast<double>(step) * p.dt;
    s1.append(t, v.head(n));
    s2.append(t, v.tail(n));
    last_saved = step;
  };

  for (std::size_t step = 1; step <= p.steps; ++step) {
    cprev = c;
    reaction_load(mesh, sf, p, c.head(n), c.tail(n), load);
    rhs.head(n) = inv_dt * (M * c.head(n));
    rhs.tail(n) = inv_dt * (M * c.tail(n));
    rhs += load;
    c = lu.solve(rhs);
    const double cmax = c.cwiseAbs().maxCoeff();
    if (!std::isfinite(cmax) || cmax > p.blowup)
      throw SolverError("Schnakenberg solution blew up at step " + std::to_string(step) + " (max |c| = " +
                        format_number(cmax) + ")");
    const bool steady = p.steady_tol > 0.0 && (c - cprev).cwiseAbs().maxCoeff() * inv_dt < p.steady_tol;
    const bool last = steady || step == p.steps;
    const bool pair_before = p.save_pairs && ((step + 1) % p.save_every == 0 || step + 1 == p.steps);
    if (last && p.save_pairs && last_saved + 1 < step) emit(step - 1, cprev);
    if (last || step % p.save_every == 0 || pair_before) emit(step, c);
    if (steady) break;
  }
  return {std::move(s1), std::move(s2)};
}

}  // namespace meso::dns
