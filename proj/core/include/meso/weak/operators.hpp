#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "meso/dns/field_series.hpp"
#include "meso/fem/boundary.hpp"

namespace meso::weak {

enum class OperatorKind { laplacian, constant, linear, cubic_c1sq_c2, custom };

/// One candidate operator of the weak-form library. Custom operators receive the species
/// values at a quadrature point and return g(c1, c2, ...).
struct OperatorSpec {
  OperatorKind kind = OperatorKind::constant;
  std::size_t species = 0;
  std::string custom_label;
  std::function<double(std::span<const double>)> fn;

  static OperatorSpec laplacian(std::size_t s) { return {OperatorKind::laplacian, s, {}, {}}; }
  static OperatorSpec constant() { return {OperatorKind::constant, 0, {}, {}}; }
  static OperatorSpec linear(std::size_t s) { return {OperatorKind::linear, s, {}, {}}; }
  static OperatorSpec cubic_c1sq_c2() { return {OperatorKind::cubic_c1sq_c2, 0, {}, {}}; }
  static OperatorSpec custom(std::string label, std::function<double(std::span<const double>)> f) {
    return {OperatorKind::custom, 0, std::move(label), std::move(f)};
  }

  /// Column label built from the species names, e.g. "lap(c1)", "const", "c2", "c1^2*c2".
  std::string label(const std::vector<std::string>& species_names) const;
};

/// The six-operator library {Δc1, Δc2, 1, c1, c2, c1²c2} used for two-species reaction-diffusion.
std::vector<OperatorSpec> reaction_diffusion_library();

struct DofRef {
  std::size_t node = 0;
  std::size_t time_index = 0;
  friend bool operator==(const DofRef&, const DofRef&) = default;
};

struct OperatorLibrary {
  Eigen::VectorXd y;
  Eigen::MatrixXd chi;
  std::vector<std::string> labels;
  std::vector<DofRef> dof_map;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
  std::size_t cols() const noexcept { return labels.size(); }
  std::size_t column_index(const std::string& label) const;
  /// Throws DataError when row counts, column counts or label uniqueness are violated.
  void validate() const;
};

struct AssemblyOptions {
  int quad_points = 2;
  /// Evaluate algebraic columns at t_{n-1} instead of t_n. This matches time steppers that treat
  /// reactions explicitly, making y = χω hold to solver precision on their output.
  bool lagged_reaction = false;
  /// Nodes classed Dirichlet or exterior are excluded from the rows. Null means all nodes are rows.
  const fem::BoundaryMask* mask = nullptr;
};

/// y^i = ∫ N^i (c_n - c_{n-1}) / Δt dv over the test rows.
Eigen::VectorXd assemble_time_derivative(const dns::FieldSeries& series, std::size_t n,
                                         const AssemblyOptions& opts = {});

/// χ at time index n for the given species (all sharing mesh and times); y is left zero.
OperatorLibrary assemble_chi(const std::vector<const dns::FieldSeries*>& species, std::size_t n,
                             const std::vector<OperatorSpec>& specs, const AssemblyOptions& opts = {});

/// χ together with the time-derivative target of species `target`.
OperatorLibrary assemble_library(const std::vector<const dns::FieldSeries*>& species, std::size_t target,
                                 std::size_t n, const std::vector<OperatorSpec>& specs,
                                 const AssemblyOptions& opts = {});

/// χ from a single (near-)steady field set with y ≡ 0.
OperatorLibrary assemble_steady_state(const fem::StructuredMesh& mesh, const std::vector<Eigen::VectorXd>& fields,
                                      const std::vector<std::string>& names, const std::vector<OperatorSpec>& specs,
                                      const AssemblyOptions& opts = {});

/// Row-wise concatenation; labels must match exactly.
OperatorLibrary pool_time_samples(const std::vector<OperatorLibrary>& libraries);

/// y.csv (column y), chi.csv (header = labels) and dof_map.csv (node, time_index).
void write_library(const OperatorLibrary& lib, const std::filesystem::path& dir);
OperatorLibrary read_library(const std::filesystem::path& y_csv, const std::filesystem::path& chi_csv);

}  // namespace meso::weak
