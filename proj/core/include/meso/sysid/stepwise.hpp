#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "meso/ini.hpp"
#include "meso/weak/operators.hpp"

namespace meso::sysid {

enum class IdentifyStrategy { specified_target };
enum class DropStrategy { most_insignificant };
enum class RegressionMethod { ols, ridge };

/// Controls of one identification run. Defaults reproduce the reference configuration file
/// ([VSI] identify_strategy = specified_target, target_index = 0; [StepwiseRegression] ridge,
/// alpha_ridge = 1e-5, F_criteria = 1).
///
/// Columns are indexed over the augmented operator list [y, χ₀, χ₁, ...]: target_index = 0 puts the
/// time-derivative vector y on the left-hand side, target_index = k ≥ 1 moves column χ_{k-1} there
/// (the steady-state use, where y ≡ 0).
struct StepwiseConfig {
  std::string data_dir = "N/A";
  IdentifyStrategy identify_strategy = IdentifyStrategy::specified_target;
  std::size_t target_index = 0;
  DropStrategy basis_drop_strategy = DropStrategy::most_insignificant;
  RegressionMethod regression_method = RegressionMethod::ridge;
  double alpha_ridge = 1e-5;
  double F_criteria = 1.0;
  /// Keep eliminating after the stop rule fires, down to a single operator. The identified
  /// iteration is still the one selected by the stop rule.
  bool full_path = false;
  /// Relative tolerance of the confirmation test's coefficient-ratio comparison.
  double confirmation_tolerance = 0.05;

  /// ConfigError naming the offending field.
  void validate() const;
  double effective_alpha() const noexcept {
    return regression_method == RegressionMethod::ridge ? alpha_ridge : 0.0;
  }
};

StepwiseConfig parse_config(std::string_view text);
/// Reads the [VSI] and [StepwiseRegression] sections of an already parsed document; other
/// sections are ignored, unknown keys inside these two sections are rejected.
StepwiseConfig parse_config(const IniDocument& doc);
/// Round-trippable INI text of a configuration.
std::string dump_config(const StepwiseConfig& config);

/// The regression target and candidate columns in the augmented indexing described above.
struct RegressionProblem {
  Eigen::MatrixXd columns;
  std::vector<std::string> labels;
  std::size_t target = 0;
  std::vector<std::size_t> library;

  const std::string& target_label() const { return labels.at(target); }
  Eigen::VectorXd target_vector() const { return columns.col(static_cast<Eigen::Index>(target)); }
  Eigen::MatrixXd submatrix(const std::vector<std::size_t>& cols) const;
  std::vector<std::string> sublabels(const std::vector<std::size_t>& cols) const;
  std::size_t rows() const noexcept { return static_cast<std::size_t>(columns.rows()); }
};

/// The library's y is appended as column "y" (index 0) unless it is identically zero and not the
/// target. A target that is identically zero raises DataError.
RegressionProblem make_problem(const weak::OperatorLibrary& library, const StepwiseConfig& config);

struct Iteration {
  std::vector<std::size_t> active;  ///< augmented column indices
  std::vector<std::string> labels;
  Eigen::VectorXd coefficients;     ///< aligned with `active`
  double loss = 0.0;                ///< mean squared residual
  double f_statistic = std::numeric_limits<double>::quiet_NaN();
  std::string dropped;
};

struct RegressionTrace {
  std::string target_label;
  std::size_t target = 0;
  std::vector<std::string> labels;  ///< labels of the initial candidate set, in column order
  std::vector<std::size_t> library;
  std::vector<Iteration> iterations;
  std::size_t identified = 0;
  /// Statistic and label of the rejected drop that ended elimination (NaN / empty when the
  /// elimination ran down to a single operator without the stop rule firing).
  double stop_f = std::numeric_limits<double>::quiet_NaN();
  std::string stop_candidate;

  const Iteration& identified_model() const { return iterations.at(identified); }
  /// Coefficients of an iteration expanded over `labels`, zero on dropped operators.
  Eigen::VectorXd padded_coefficients(std::size_t iteration) const;
};

/// Backward elimination: at each iteration every active operator is tentatively removed, the
/// one whose removal raises the residual sum least is the candidate (residual sums equal to a
/// relative 1e-9 count as ties, which go to the lowest column), and it is dropped while its F
/// statistic stays below F_criteria.
RegressionTrace stepwise_eliminate(const RegressionProblem& problem, const StepwiseConfig& config);
RegressionTrace stepwise_eliminate(const weak::OperatorLibrary& library, const StepwiseConfig& config);

struct ConfirmationEntry {
  std::string target_label;
  std::vector<std::string> labels;
  Eigen::VectorXd expected;
  Eigen::VectorXd observed;
  double max_relative_error = 0.0;
  bool pass = true;
};

struct ConfirmationReport {
  std::vector<ConfirmationEntry> entries;
  bool all_pass() const noexcept;
};

/// Re-poses the identified model A_t = Σ ω_j A_j with each retained operator A_k as target and
/// {A_t} ∪ S∖{k} as library. The re-identified coefficients must match 1/ω_k on A_t and −ω_j/ω_k
/// elsewhere within config.confirmation_tolerance (relative).
ConfirmationReport confirmation_test(const RegressionProblem& problem, const RegressionTrace& trace,
                                     const StepwiseConfig& config);

/// iteration, dropped, loss, F, then one column per label (0 on dropped operators).
void write_trace_csv(const RegressionTrace& trace, const std::filesystem::path& path);
/// label, coefficient for the identified model.
void write_model_csv(const RegressionTrace& trace, const std::filesystem::path& path);

}  // namespace meso::sysid
