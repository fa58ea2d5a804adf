#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace meso::al {

/// Derivative oracle: maps order parameters η to chemical potentials μ = ∂f/∂η on a box domain.
/// The free energy itself is optional (only synthetic oracles can report it).
class Oracle {
 public:
  using Field = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Scalar = std::function<double(const Eigen::VectorXd&)>;

  Oracle() = default;
  /// ConfigError when bounds are empty, of different length, or not strictly increasing.
  Oracle(Eigen::VectorXd lower, Eigen::VectorXd upper, Field mu, Scalar energy = {});

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.size()); }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }
  bool contains(const Eigen::VectorXd& eta) const;

  /// DomainError outside the bounds, ShapeError on a dimension mismatch.
  Eigen::VectorXd mu(const Eigen::VectorXd& eta) const;
  /// Column-wise μ for a d × N batch.
  Eigen::MatrixXd mu_batch(const Eigen::MatrixXd& etas) const;
  bool has_energy() const noexcept { return static_cast<bool>(energy_); }
  /// CapabilityError when the oracle carries no energy.
  double energy(const Eigen::VectorXd& eta) const;

  /// Minima of f known by construction (empty unless set).
  std::vector<Eigen::VectorXd> wells;
  /// The subset of wells whose convexity the workflow reports on.
  std::vector<Eigen::VectorXd> tracked_wells;

 private:
  void check(const Eigen::VectorXd& eta) const;

  Eigen::VectorXd lower_, upper_;
  Field mu_;
  Scalar energy_;
};

/// Four-variable multi-well surface f = P·Q on η₀ ∈ [0, 0.5], η₁..η₃ ∈ [−0.5, 0.5]:
///   P = (η₀ − 0.1)² + Σ η_k²                      zero at the disordered well (0.1, 0, 0, 0)
///   Q = (η₀ − 1/4)² + 10 Σ (η_k² − 0.09)²          zero at the ordered wells (1/4, ±0.3, ±0.3, ±0.3)
/// f is even in each of η₁..η₃, so all eight sign patterns of the ordered state are wells.
/// `wells` holds all nine zeros (disordered first); `tracked_wells` holds the disordered well
/// followed by the four even-parity variants (+,+,+), (+,−,−), (−,+,−), (−,−,+).
Oracle synthetic_oracle();

}  // namespace meso::al
