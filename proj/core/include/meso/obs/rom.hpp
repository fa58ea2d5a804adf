#pragma once

#include <string>
#include <vector>

#include "meso/sysid/stepwise.hpp"
#include "meso/table.hpp"

namespace meso::obs {

/// "dPsi/dphi_<g>±" or "dPsi+/dphi_<g>±".
std::string derivative_label(bool plus_energy, const std::string& g, bool positive);

/// Which rows may be neighbors: every row of the table, or only rows of the same trajectory.
enum class Neighborhood { pooled, trajectory };

/// Each derivative δΨ/δφ_{g±} is taken on the one-coordinate manifold φ_{g±}.
struct DerivativeOptions {
  Neighborhood neighborhood = Neighborhood::pooled;
  int accuracy = 2;
  std::size_t neighbors = 0;  ///< 0 selects the graph-calculus default
};

/// Appends δΨ/δφ_{g±} and δΨ₊/δφ_{g±} (36 columns) estimated by nonlocal_partial on k-NN graphs
/// over the table rows selected by options.neighborhood. PreconditionError when fewer than two trajectories are present;
/// RankError (advising more trajectories) when a neighborhood cannot carry the stencil.
Table functional_derivatives(const Table& table, const DerivativeOptions& options = {});

/// Label of the regression target, "dphi_phi+/dt".
std::string target_label();

/// Appends dφ_{φ+}/dt: central differences in time within each trajectory, one-sided at the
/// ends. DataError when a trajectory has fewer than two rows.
Table add_time_derivative(const Table& table);

struct BasisSets {
  std::vector<std::string> b1;  ///< δΨ₊/δφ_{g±}
  std::vector<std::string> b2;  ///< b1 then δΨ/δφ_{g±}
  std::vector<std::string> b3;  ///< b2 then φ_{g±}
};

/// The three nested label sets. DataError naming the first label missing from `table`.
BasisSets build_basis_sets(const Table& table);

/// Stepwise elimination of target_label() over `basis`, rows pooled across trajectories and time.
sysid::RegressionTrace identify_reduced_model(const Table& table, const std::vector<std::string>& basis,
                                             const sysid::StepwiseConfig& config);

/// Iteration whose active set has `terms` operators; std::out_of_range when the trace never had it.
const sysid::Iteration& iteration_with_terms(const sysid::RegressionTrace& trace, std::size_t terms);

/// One row per iteration: iteration (1-based), terms, loss, then one coefficient column per
/// basis label (0 once dropped).
Table trace_table(const sysid::RegressionTrace& trace);

}  // namespace meso::obs
