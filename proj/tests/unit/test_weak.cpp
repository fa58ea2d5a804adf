#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "meso/dns/solvers.hpp"
#include "meso/error.hpp"
#include "meso/weak/operators.hpp"

using namespace meso;
using namespace meso::weak;
using meso::dns::FieldSeries;
using meso::fem::StructuredMesh;

namespace {

FieldSeries two_step(const StructuredMesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double dt) {
  FieldSeries s(mesh, "c1");
  s.append(0.0, a);
  s.append(dt, b);
  return s;
}

/// Exact solution of c_t = D Δc + r (c - 1) on [0, L]² with no-flux walls.
struct DecayingMode {
  double D = 0.7, r = -0.3, L = 2.0;
  double sigma() const { return D * 2.0 * std::numbers::pi * std::numbers::pi / (L * L) - r; }
  Eigen::VectorXd at(const StructuredMesh& m, double t) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m.node_count()));
    for (std::size_t n = 0; n < m.node_count(); ++n) {
      auto p = m.node_position(n);
      v(n) = 1.0 + std::exp(-sigma() * t) * std::cos(std::numbers::pi * p[0] / L) * std::cos(std::numbers::pi * p[1] / L);
    }
    return v;
  }
  double relative_residual(std::size_t nodes, double dt) const {
    auto mesh = StructuredMesh::rectangle(nodes, nodes, L, L);
    auto s = two_step(mesh, at(mesh, 0.5), at(mesh, 0.5 + dt), dt);
    auto lib = assemble_library({&s}, 0, 1, {OperatorSpec::laplacian(0), OperatorSpec::constant(), OperatorSpec::linear(0)});
    Eigen::Vector3d w(D, -r, r);
    return (lib.y - lib.chi * w).norm() / lib.y.norm();
  }
};

}  // namespace

TEST(TimeDerivative, ConstantSeriesGivesZero) {
  auto mesh = StructuredMesh::rectangle(5, 5, 1.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Random(25);
  auto s = two_step(mesh, c, c, 0.1);
  EXPECT_EQ(assemble_time_derivative(s, 1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(assemble_time_derivative(s, 0), PreconditionError);
}

TEST(TimeDerivative, UnitRateGivesMassRowSums) {
  const double dt = 0.25;
  auto mesh = StructuredMesh::interval(9, 2.0);
  Eigen::VectorXd a = Eigen::VectorXd::Random(9);
  auto s = two_step(mesh, a, a.array() + dt, dt);
  fem::BoundaryMask mask(9);
  mask.set_dirichlet(0, 0.0);
  mask.set_dirichlet(8, 0.0);
  AssemblyOptions opts;
  opts.mask = &mask;
  auto y = assemble_time_derivative(s, 1, opts);
  ASSERT_EQ(y.size(), 7);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(y(i), mesh.spacing(0), 1e-14);
}

TEST(TimeDerivative, MatchesDenseMassMatrixOracle) {
  dns::AllenCahnParams p;
  p.mobility = 0.05;
  p.steps = 40;
  auto series = dns::solve_allen_cahn_1d(p, dns::allen_cahn_initial_condition(p, 3));
  const std::size_t n = 20;
  auto y = assemble_time_derivative(series, n);
  // Independent dense build of the consistent linear-element mass matrix.
  const Eigen::Index N = static_cast<Eigen::Index>(p.nodes);
  const double h = p.length / static_cast<double>(N - 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    M(i, i) = (i == 0 || i == N - 1) ? h / 3.0 : 2.0 * h / 3.0;
    if (i + 1 < N) M(i, i + 1) = M(i + 1, i) = h / 6.0;
  }
  Eigen::VectorXd expect = M * (series.snapshot(n) - series.snapshot(n - 1)) / (series.time(n) - series.time(n - 1));
  EXPECT_LT((y - expect).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + expect.cwiseAbs().maxCoeff()));
}

TEST(AssembleChi, ConstantColumnAndLinearLaplacian) {
  auto mesh = StructuredMesh::interval(11, 1.0);
  Eigen::VectorXd lin(11);
  for (int i = 0; i < 11; ++i) lin(i) = 2.0 * mesh.node_position(i)[0] + 0.5;
  auto s = two_step(mesh, lin, lin, 1.0);
  fem::BoundaryMask mask(11);
  mask.set_dirichlet(0, 0.5);
  mask.set_dirichlet(10, 2.5);
  AssemblyOptions opts;
  opts.mask = &mask;
  auto lib = assemble_chi({&s}, 1, {OperatorSpec::constant(), OperatorSpec::laplacian(0)}, opts);
  ASSERT_EQ(lib.rows(), 9u);
  EXPECT_EQ(lib.labels, (std::vector<std::string>{"const", "lap(c1)"}));
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(lib.chi(i, 0), 0.1, 1e-14);
    EXPECT_NEAR(lib.chi(i, 1), 0.0, 1e-12);
    EXPECT_EQ(lib.dof_map[static_cast<std::size_t>(i)].node, static_cast<std::size_t>(i + 1));
  }
  EXPECT_THROW(assemble_chi({&s}, 1, {}), ConfigError);
}

TEST(AssembleChi, LinearOperatorsScaleWithTheField) {
  auto mesh = StructuredMesh::rectangle(6, 7, 1.0, 1.2);
  Eigen::VectorXd c = Eigen::VectorXd::Random(42);
  auto s1 = two_step(mesh, c, c, 1.0);
  auto s2 = two_step(mesh, 3.5 * c, 3.5 * c, 1.0);
  std::vector<OperatorSpec> specs{OperatorSpec::laplacian(0), OperatorSpec::linear(0)};
  auto a = assemble_chi({&s1}, 1, specs);
  auto b = assemble_chi({&s2}, 1, specs);
  EXPECT_LT((b.chi - 3.5 * a.chi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleChi, CustomOperatorMatchesBuiltIn) {
  auto mesh = StructuredMesh::rectangle(5, 5, 1.0, 1.0);
  FieldSeries u(mesh, "u"), v(mesh, "v");
  Eigen::VectorXd a = Eigen::VectorXd::Random(25).array() + 2.0, b = Eigen::VectorXd::Random(25).array() + 2.0;
  u.append(0.0, a);
  v.append(0.0, b);
  auto lib = assemble_chi({&u, &v}, 0,
                          {OperatorSpec::cubic_c1sq_c2(),
                           OperatorSpec::custom("u2v", [](std::span<const double> c) { return c[0] * c[0] * c[1]; })});
  EXPECT_EQ(lib.labels[0], "u^2*v");
  EXPECT_LT((lib.chi.col(0) - lib.chi.col(1)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(assemble_chi({&u}, 0, {OperatorSpec::cubic_c1sq_c2()}), ConfigError);
  EXPECT_THROW(assemble_chi({&u, &v}, 0, {OperatorSpec::linear(2)}), ConfigError);
}

TEST(AssembleChi, SchnakenbergTrueCoefficientsReproduceTarget) {
  dns::SchnakenbergParams p;
  p.nodes = 24;
  p.length = 24.0;
  p.dt = 1e-4;
  p.steps = 30000;
  p.save_every = 10000;
  auto [a, b] = dns::schnakenberg_initial_state(p, 9, 0.2);
  auto [s1, s2] = dns::solve_schnakenberg_2d(p, a, b);
  const std::size_t n = 4;  // step 20000, the second snapshot of a saved pair
  ASSERT_NEAR(s1.time(n) - s1.time(n - 1), p.dt, 1e-12);
  const auto specs = reaction_diffusion_library();
  for (int species = 0; species < 2; ++species) {
    const auto& D = p.D[static_cast<std::size_t>(species)];
    const auto& R = p.R[static_cast<std::size_t>(species)];
    Eigen::VectorXd w(6);
    w << D[0], D[1], R[0], R[1], R[2], R[3];
    auto lib = assemble_library({&s1, &s2}, static_cast<std::size_t>(species), n, specs);
    EXPECT_LT((lib.y - lib.chi * w).norm() / lib.y.norm(), 1e-3) << "species " << species;
    AssemblyOptions lagged;
    lagged.lagged_reaction = true;
    auto exact = assemble_library({&s1, &s2}, static_cast<std::size_t>(species), n, specs, lagged);
    EXPECT_LT((exact.y - exact.chi * w).norm() / exact.y.norm(), 1e-9);
  }
}

TEST(AssembleChi, ConsistencyConvergesUnderRefinement) {
  DecayingMode mode;
  // Time: fine mesh, halving dt.
  const double t1 = mode.relative_residual(65, 0.08), t2 = mode.relative_residual(65, 0.04),
               t3 = mode.relative_residual(65, 0.02);
  EXPECT_GE(std::log2(t1 / t2), 0.9);
  EXPECT_GE(std::log2(t2 / t3), 0.9);
  // Space: tiny dt, halving h.
  const double h1 = mode.relative_residual(9, 1e-7), h2 = mode.relative_residual(17, 1e-7),
               h3 = mode.relative_residual(33, 1e-7);
  EXPECT_GE(std::log2(h1 / h2), 1.8);
  EXPECT_GE(std::log2(h2 / h3), 1.8);
}

TEST(SteadyState, UniformFieldColumns) {
  auto mesh = StructuredMesh::rectangle(6, 6, 1.0, 1.0);
  std::vector<Eigen::VectorXd> fields{Eigen::VectorXd::Constant(36, 2.0), Eigen::VectorXd::Constant(36, 0.5)};
  auto lib = assemble_steady_state(mesh, fields, {"c1", "c2"}, reaction_diffusion_library());
  EXPECT_EQ(lib.y.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(lib.chi.col(0).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT(lib.chi.col(1).cwiseAbs().maxCoeff(), 1e-13);
  const Eigen::VectorXd w = lib.chi.col(2);  // ∫ N_i dv
  EXPECT_LT((lib.chi.col(3) - 2.0 * w).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((lib.chi.col(4) - 0.5 * w).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((lib.chi.col(5) - 2.0 * w).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(assemble_steady_state(mesh, fields, {"c1", "c2"}, {}), ConfigError);
}

TEST(Pool, ConcatenatesRowsAndChecksLabels) {
  OperatorLibrary a;
  a.labels = {"p", "q"};
  a.y = Eigen::VectorXd::Random(3);
  a.chi = Eigen::MatrixXd::Random(3, 2);
  a.dof_map = {{0, 1}, {1, 1}, {2, 1}};
  auto one = pool_time_samples({a});
  EXPECT_EQ(one.y, a.y);
  EXPECT_EQ(one.chi, a.chi);
  EXPECT_EQ(one.dof_map, a.dof_map);
  OperatorLibrary b = a;
  b.y = Eigen::VectorXd::Random(5);
  b.chi = Eigen::MatrixXd::Random(5, 2);
  b.dof_map = {{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}};
  auto two = pool_time_samples({a, b});
  EXPECT_EQ(two.rows(), 8u);
  EXPECT_EQ(two.dof_map[3], (DofRef{0, 2}));
  EXPECT_EQ(two.chi.bottomRows(5), b.chi);
  b.labels = {"p", "r"};
  EXPECT_THROW(pool_time_samples({a, b}), DataError);
}

TEST(LibraryIo, RoundTrip) {
  OperatorLibrary a;
  a.labels = {"lap(c1)", "const"};
  a.y = Eigen::VectorXd::Random(4);
  a.chi = Eigen::MatrixXd::Random(4, 2);
  a.dof_map = {{0, 1}, {1, 1}, {2, 1}, {3, 1}};
  auto dir = std::filesystem::temp_directory_path() / "mesokit_lib_io";
  write_library(a, dir);
  auto b = read_library(dir / "y.csv", dir / "chi.csv");
  EXPECT_EQ(b.labels, a.labels);
  EXPECT_EQ(b.y, a.y);
  EXPECT_EQ(b.chi, a.chi);
  std::filesystem::remove_all(dir);
}
