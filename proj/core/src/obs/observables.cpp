#include "meso/obs/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "meso/error.hpp"
#include "meso/fem/basis.hpp"

namespace meso::obs {

const std::vector<std::string>& observable_functions() {
  static const std::vector<std::string> g{"phi",    "phi^2",    "phi^3",     "phi^4",          "phi^5",
                                          "f(phi)", "f'(phi)",  "lap(phi)",  "|grad(phi)|^2"};
  return g;
}

std::string phase_label(const std::string& g, bool positive) { return "phi_" + g + (positive ? "+" : "-"); }

std::vector<std::string> phase_labels() {
  std::vector<std::string> out;
  for (const auto& g : observable_functions()) {
    out.push_back(phase_label(g, true));
    out.push_back(phase_label(g, false));
  }
  return out;
}

namespace {

void require_1d(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi, const char* what) {
  if (mesh.dim() != 1) throw CapabilityError(std::string(what) + " supports 1D meshes only");
  if (static_cast<std::size_t>(phi.size()) != mesh.node_count())
    throw ShapeError(std::string(what) + ": field has " + std::to_string(phi.size()) + " values, mesh has " +
                     std::to_string(mesh.node_count()) + " nodes");
}

// Integrates the observables over the part of one element with local coordinate in [t0, t1].
struct Piece {
  double t0, t1;
  bool positive;
};

template <class Fn>
void for_each_piece(double pa, double pb, Fn&& fn) {
  const bool pos_a = pa >= 0.0, pos_b = pb >= 0.0;
  if (pos_a == pos_b) {
    fn(Piece{0.0, 1.0, pos_a});
    return;
  }
  const double s = pa / (pa - pb);
  fn(Piece{0.0, s, pos_a});
  fn(Piece{s, 1.0, pos_b});
}

}  // namespace

Eigen::VectorXd nodal_laplacian(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi) {
  require_1d(mesh, phi, "nodal_laplacian");
  const auto n = phi.size();
  if (n < 2) throw PreconditionError("nodal_laplacian needs at least two nodes");
  const double h = mesh.spacing(0);
  // right-hand side −Kφ
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    const double flux = (phi(e + 1) - phi(e)) / h;
    rhs(e) += flux;
    rhs(e + 1) -= flux;
  }
  // consistent mass: diagonal h/3 at the ends and 2h/3 inside, off-diagonal h/6 (Thomas algorithm)
  std::vector<double> diag(static_cast<std::size_t>(n), 2.0 * h / 3.0);
  diag.front() = diag.back() = h / 3.0;
  const double off = h / 6.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double m = off / diag[static_cast<std::size_t>(i - 1)];
    diag[static_cast<std::size_t>(i)] -= m * off;
    rhs(i) -= m * rhs(i - 1);
  }
  rhs(n - 1) /= diag.back();
  for (Eigen::Index i = n - 1; i-- > 0;) rhs(i) = (rhs(i) - off * rhs(i + 1)) / diag[static_cast<std::size_t>(i)];
  return rhs;
}

std::array<double, 2 * kFunctionCount> phase_averages(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi) {
  require_1d(mesh, phi, "phase_averages");
  const Eigen::VectorXd lap = nodal_laplacian(mesh, phi);
  const auto rule = fem::gauss_rule(3, 1);
  const double h = mesh.spacing(0);
  std::array<double, 2 * kFunctionCount> acc{};
  for (Eigen::Index e = 0; e + 1 < phi.size(); ++e) {
    const double pa = phi(e), pb = phi(e + 1), la = lap(e), lb = lap(e + 1);
    const double grad2 = (pb - pa) * (pb - pa) / (h * h);
    for_each_piece(pa, pb, [&](const Piece& piece) {
      const double len = piece.t1 - piece.t0;
      if (len <= 0.0) return;
      const std::size_t off = piece.positive ? 0 : 1;
      for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
        const double t = piece.t0 + len * 0.5 * (1.0 + rule.points(q, 0));
        const double w = rule.weights(q) * 0.5 * len * h;
        const double p = pa + t * (pb - pa);
        const double p2 = p * p;
        const double vals[kFunctionCount] = {p,
                                             p2,
                                             p2 * p,
                                             p2 * p2,
                                             p2 * p2 * p,
                                             dns::landau_f(p),
                                             dns::landau_df(p),
                                             la + t * (lb - la),
                                             grad2};
        for (std::size_t k = 0; k < kFunctionCount; ++k) acc[2 * k + off] += w * vals[k];
      }
    });
  }
  const double measure = mesh.measure();
  for (auto& v : acc) v /= measure;
  return acc;
}

Energies total_energy(const fem::StructuredMesh& mesh, const Eigen::VectorXd& phi, double lambda) {
  require_1d(mesh, phi, "total_energy");
  const auto rule = fem::gauss_rule(3, 1);
  const double h = mesh.spacing(0);
  Energies out;
  for (Eigen::Index e = 0; e + 1 < phi.size(); ++e) {
    const double pa = phi(e), pb = phi(e + 1);
    const double grad2 = (pb - pa) * (pb - pa) / (h * h);
    for_each_piece(pa, pb, [&](const Piece& piece) {
      const double len = piece.t1 - piece.t0;
      if (len <= 0.0) return;
      double part = 0.5 * lambda * grad2 * len * h;
      for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
        const double t = piece.t0 + len * 0.5 * (1.0 + rule.points(q, 0));
        part += rule.weights(q) * 0.5 * len * h * dns::landau_f(pa + t * (pb - pa));
      }
      out.psi += part;
      if (piece.positive) out.psi_plus += part;
    });
  }
  return out;
}

Table observable_table(const dns::FieldSeries& series, double lambda, std::size_t trajectory) {
  if (series.mesh().dim() != 1) throw CapabilityError("observable_table supports 1D series only");
  std::vector<std::string> names{"trajectory", "time"};
  for (auto& l : phase_labels()) names.push_back(std::move(l));
  names.emplace_back("Psi");
  names.emplace_back("Psi+");
  Table t(names);
  std::vector<double> row(names.size());
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto& phi = series.snapshot(n);
    const auto avg = phase_averages(series.mesh(), phi);
    const auto en = total_energy(series.mesh(), phi, lambda);
    row[0] = static_cast<double>(trajectory);
    row[1] = series.time(n);
    std::copy(avg.begin(), avg.end(), row.begin() + 2);
    row[2 + avg.size()] = en.psi;
    row[3 + avg.size()] = en.psi_plus;
    t.add_row(row);
  }
  return t;
}

Table concatenate(const std::vector<Table>& tables) {
  if (tables.empty()) return {};
  Table out(tables.front().names());
  std::vector<double> row(out.cols());
  for (const auto& t : tables) {
    if (t.names() != out.names()) throw ShapeError("concatenate: tables have different columns");
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c) row[c] = t.at(r, c);
      out.add_row(row);
    }
  }
  return out;
}

void EnsembleConfig::validate() const {
  dns.validate();
  if (trajectories < 1) throw ConfigError("trajectories must be >= 1");
}

Table simulate_ensemble(const EnsembleConfig& config) {
  config.validate();
  // Trajectories are independent; workers pull indices and write their own slots.
  std::vector<Table> parts(config.trajectories);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < config.trajectories; i = next++) {
      try {
        const auto phi0 = dns::allen_cahn_initial_condition(config.dns, config.seed + i);
        parts[i] = observable_table(dns::solve_allen_cahn_1d(config.dns, phi0), config.dns.lambda, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.trajectories;
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(config.threads ? config.threads : std::thread::hardware_concurrency(), 1, config.trajectories);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return concatenate(parts);
}

}  // namespace meso::obs
