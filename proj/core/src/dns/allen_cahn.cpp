#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "meso/dns/solvers.hpp"
#include "meso/error.hpp"
#include "meso/fem/basis.hpp"
#include "meso/table.hpp"

namespace meso::dns {

void AllenCahnParams::validate() const {
  if (!(mobility >= 0.0) || !std::isfinite(mobility)) throw ConfigError("mobility must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (nodes < 2) throw ConfigError("nodes must be >= 2");
  if (!(length > 0.0)) throw ConfigError("length must be > 0");
  if (save_every == 0) throw ConfigError("save_every must be >= 1");
  if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be >= 1");
}

namespace {

/// Solves a symmetric tridiagonal system in place (Thomas algorithm); `rhs` becomes the solution.
void solve_tridiagonal(std::vector<double> diag, const std::vector<double>& off, Eigen::VectorXd& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> upper(off);
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw SolverError("singular tridiagonal Jacobian");
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs(static_cast<Eigen::Index>(i)) -= m * rhs(static_cast<Eigen::Index>(i - 1));
  }
  if (diag[n - 1] == 0.0) throw SolverError("singular tridiagonal Jacobian");
  rhs(static_cast<Eigen::Index>(n - 1)) /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    const auto ii = static_cast<Eigen::Index>(i);
    rhs(ii) = (rhs(ii) - upper[i] * rhs(ii + 1)) / diag[i];
  }
}

struct Gauss3 {
  double N[3][2];
  double w[3];
};

Gauss3 gauss3(double h) {
  const auto rule = fem::gauss_rule(3, 1);
  Gauss3 g{};
  for (int q = 0; q < 3; ++q) {
    const double xi = rule.points(q, 0);
    g.N[q][0] = 0.5 * (1.0 - xi);
    g.N[q][1] = 0.5 * (1.0 + xi);
    g.w[q] = rule.weights(q) * 0.5 * h;
  }
  return g;
}

}  // namespace

FieldSeries solve_allen_cahn_1d(const AllenCahnParams& p, const Eigen::VectorXd& phi0) {
  p.validate();
  const auto mesh = p.mesh();
  const std::size_t n = mesh.node_count();
  if (static_cast<std::size_t>(phi0.size()) != n)
    throw ShapeError("phi0 has " + std::to_string(phi0.size()) + " values, expected " + std::to_string(n));
  for (Eigen::Index i = 0; i < phi0.size(); ++i)
    if (!std::isfinite(phi0(i))) throw DataError("phi0 is non-finite at node " + std::to_string(i));

  const double h = mesh.spacing(0);
  const Gauss3 g = gauss3(h);
  const double m_diag = h / 3.0, m_off = h / 6.0;
  const double k_diag = 1.0 / h, k_off = -1.0 / h;
  const double c = p.dt * p.mobility;

  FieldSeries series(mesh, "phi");
  series.append(0.0, phi0);
  Eigen::VectorXd prev = phi0;
  Eigen::VectorXd phi = phi0;
  Eigen::VectorXd res(static_cast<Eigen::Index>(n));
  std::vector<double> jd(n), jo(n - 1);

  for (std::size_t step = 1; step <= p.steps; ++step) {
    double rnorm = 0.0;
    bool converged = false;
    for (int it = 0; it <= p.newton_max_iter; ++it) {
      res.setZero();
      std::fill(jd.begin(), jd.end(), 0.0);
      std::fill(jo.begin(), jo.end(), 0.0);
      for (std::size_t e = 0; e + 1 < n; ++e) {
        const auto a = static_cast<Eigen::Index>(e), b = a + 1;
        const double pa = phi(a), pb = phi(b);
        const double da = pa - prev(a), db = pb - prev(b);
        double fa = 0.0, fb = 0.0, jaa = 0.0, jab = 0.0, jbb = 0.0;
        for (int q = 0; q < 3; ++q) {
          const double pq = g.N[q][0] * pa + g.N[q][1] * pb;
          const double d1 = landau_df(pq) * g.w[q];
          const double d2 = landau_d2f(pq) * g.w[q];
          fa += g.N[q][0] * d1;
          fb += g.N[q][1] * d1;
          jaa += g.N[q][0] * g.N[q][0] * d2;
          jab += g.N[q][0] * g.N[q][1] * d2;
          jbb += g.N[q][1] * g.N[q][1] * d2;
        }
        const double ka = k_diag * pa + k_off * pb;
        const double kb = k_off * pa + k_diag * pb;
        res(a) += m_diag * da + m_off * db + c * (fa + p.lambda * ka);
        res(b) += m_off * da + m_diag * db + c * (fb + p.lambda * kb);
        jd[e] += m_diag + c * (jaa + p.lambda * k_diag);
        jd[e + 1] += m_diag + c * (jbb + p.lambda * k_diag);
        jo[e] += m_off + c * (jab + p.lambda * k_off);
      }
      rnorm = res.cwiseAbs().maxCoeff();
      if (!std::isfinite(rnorm)) break;
      if (rnorm < p.newton_tol) {
        converged = true;
        break;
      }
      if (it == p.newton_max_iter) break;
      solve_tridiagonal(jd, jo, res);
      phi -= res;
    }
    if (!converged)
      throw SolverError("Allen-Cahn Newton iteration did not converge at step " + std::to_string(step) +
                        " (residual " + format_number(rnorm) + ")");
    prev = phi;
    if (step % p.save_every == 0 || step == p.steps) series.append(static_cast<double>(step) * p.dt, phi);
  }
  return series;
}

Eigen::VectorXd allen_cahn_initial_condition(const AllenCahnParams& p, std::uint64_t seed) {
  p.validate();
  const auto mesh = p.mesh();
  const std::size_t n = mesh.node_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr int modes = 8;
  double amp[modes], phase[modes];
  for (int k = 0; k < modes; ++k) {
    amp[k] = unit(rng) / std::sqrt(static_cast<double>(k + 1));
    phase[k] = std::numbers::pi * unit(rng);
  }
  const double width = 0.7 + 0.3 * unit(rng);
  const double L = mesh.length(0);

  std::vector<double> s(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = mesh.node_position(i)[0];
    double v = 0.0;
    for (int k = 0; k < modes; ++k)
      v += amp[k] * std::cos(std::numbers::pi * (k + 1) * (x[i] - mesh.origin(0)) / L + phase[k]);
    s[i] = v;
  }
  std::vector<double> zeros;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (s[i] == 0.0) zeros.push_back(x[i]);
    else if (s[i] * s[i + 1] < 0.0) zeros.push_back(x[i] + (x[i + 1] - x[i]) * s[i] / (s[i] - s[i + 1]));
  }
  if (s[n - 1] == 0.0) zeros.push_back(x[n - 1]);

  Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::numeric_limits<double>::infinity();
    for (double z : zeros) d = std::min(d, std::abs(x[i] - z));
    const double sign = s[i] >= 0.0 ? 1.0 : -1.0;
    phi(static_cast<Eigen::Index>(i)) = std::isinf(d) ? sign : sign * std::tanh(d / width);
  }
  return phi;
}

double allen_cahn_energy(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi, double lambda) {
  if (mesh.dim() != 1) throw CapabilityError("allen_cahn_energy supports 1D meshes only");
  if (static_cast<std::size_t>(phi.size()) != mesh.node_count()) throw ShapeError("phi size does not match mesh");
  const double h = mesh.spacing(0);
  const Gauss3 g = gauss3(h);
  double psi = 0.0;
  for (Eigen::Index e = 0; e + 1 < phi.size(); ++e) {
    const double grad = (phi(e + 1) - phi(e)) / h;
    double fe = 0.0;
    for (int q = 0; q < 3; ++q) fe += g.w[q] * landau_f(g.N[q][0] * phi(e) + g.N[q][1] * phi(e + 1));
    psi += fe + 0.5 * lambda * grad * grad * h;
  }
  return psi;
}

}  // namespace meso::dns
