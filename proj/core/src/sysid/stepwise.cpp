#include "meso/sysid/stepwise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "meso/error.hpp"
#include "meso/sysid/regression.hpp"
#include "meso/table.hpp"

namespace meso::sysid {

namespace {

// Relative floor on the residual norm. Keeps F defined on exactly consistent systems, where the
// full-model residual is pure rounding noise.
constexpr double kResidualFloor = 1e-8;
// Candidate drops whose residual sums agree to this relative precision count as tied.
constexpr double kTieTolerance = 1e-9;

const char* method_name(RegressionMethod m) { return m == RegressionMethod::ols ? "ols" : "ridge"; }

struct Fit {
  Eigen::VectorXd w;
  double rss = 0.0;
};

Fit fit_columns(const RegressionProblem& p, const Eigen::VectorXd& target, const std::vector<std::size_t>& cols,
                double alpha) {
  Fit f;
  if (cols.empty()) {
    f.rss = target.squaredNorm();
    return f;
  }
  const Eigen::MatrixXd chi = p.submatrix(cols);
  const auto labels = p.sublabels(cols);
  f.w = ridge_fit(chi, target, alpha, labels);
  f.rss = residual_sum_squares(chi, target, f.w);
  return f;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void StepwiseConfig::validate() const {
  if (!(alpha_ridge >= 0.0) || !std::isfinite(alpha_ridge)) throw ConfigError("alpha_ridge must be finite and >= 0");
  if (!(F_criteria > 0.0) || !std::isfinite(F_criteria)) throw ConfigError("F_criteria must be finite and > 0");
  if (!(confirmation_tolerance > 0.0)) throw ConfigError("confirmation_tolerance must be > 0");
}

StepwiseConfig parse_config(std::string_view text) {
  const IniDocument doc = IniDocument::parse(text);
  doc.require_sections({"VSI", "StepwiseRegression"});
  return parse_config(doc);
}

StepwiseConfig parse_config(const IniDocument& doc) {
  doc.require_known("VSI", {"data_dir", "identify_strategy", "target_index", "confirmation_tolerance"});
  doc.require_known("StepwiseRegression",
                    {"basis_drop_strategy", "regression_method", "alpha_ridge", "F_criteria", "full_path"});
  StepwiseConfig c;
  c.data_dir = doc.get_string("VSI", "data_dir", c.data_dir);

  const std::string strategy = lower(doc.get_string("VSI", "identify_strategy", "specified_target"));
  if (strategy != "specified_target")
    throw ConfigError("identify_strategy: unsupported value '" + strategy + "' (expected specified_target)");

  const long target = doc.get_int("VSI", "target_index", 0);
  if (target < 0) throw ConfigError("target_index must be >= 0");
  c.target_index = static_cast<std::size_t>(target);
  c.confirmation_tolerance = doc.get_double("VSI", "confirmation_tolerance", c.confirmation_tolerance);

  const std::string drop = lower(doc.get_string("StepwiseRegression", "basis_drop_strategy", "most_insignificant"));
  if (drop != "most_insignificant" && drop != "most_inignificant")
    throw ConfigError("basis_drop_strategy: unsupported value '" + drop + "' (expected most_insignificant)");

  const std::string method = lower(doc.get_string("StepwiseRegression", "regression_method", "ridge"));
  if (method == "ols")
    c.regression_method = RegressionMethod::ols;
  else if (method == "ridge")
    c.regression_method = RegressionMethod::ridge;
  else
    throw ConfigError("regression_method: unsupported value '" + method + "' (expected ols or ridge)");

  c.alpha_ridge = doc.get_double("StepwiseRegression", "alpha_ridge", c.alpha_ridge);
  c.F_criteria = doc.get_double("StepwiseRegression", "F_criteria", c.F_criteria);
  c.full_path = doc.get_bool("StepwiseRegression", "full_path", c.full_path);
  c.validate();
  return c;
}

std::string dump_config(const StepwiseConfig& c) {
  IniDocument doc;
  doc.set("VSI", "data_dir", c.data_dir);
  doc.set("VSI", "identify_strategy", "specified_target");
  doc.set("VSI", "target_index", std::to_string(c.target_index));
  doc.set("VSI", "confirmation_tolerance", format_number(c.confirmation_tolerance));
  doc.set("StepwiseRegression", "basis_drop_strategy", "most_insignificant");
  doc.set("StepwiseRegression", "regression_method", method_name(c.regression_method));
  doc.set("StepwiseRegression", "alpha_ridge", format_number(c.alpha_ridge));
  doc.set("StepwiseRegression", "F_criteria", format_number(c.F_criteria));
  doc.set("StepwiseRegression", "full_path", c.full_path ? "true" : "false");
  return doc.dump();
}

Eigen::MatrixXd RegressionProblem::submatrix(const std::vector<std::size_t>& cols) const {
  Eigen::MatrixXd m(columns.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = columns.col(static_cast<Eigen::Index>(cols[j]));
  return m;
}

std::vector<std::string> RegressionProblem::sublabels(const std::vector<std::size_t>& cols) const {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(labels.at(c));
  return out;
}

RegressionProblem make_problem(const weak::OperatorLibrary& library, const StepwiseConfig& config) {
  library.validate();
  if (library.cols() == 0) throw PreconditionError("operator library is empty");
  const std::size_t ncols = library.cols();
  if (config.target_index > ncols)
    throw ConfigError("target_index " + std::to_string(config.target_index) + " out of range (library has " +
                      std::to_string(ncols) + " operators plus y)");

  const bool y_zero = library.y.size() == 0 || library.y.cwiseAbs().maxCoeff() == 0.0;
  if (config.target_index == 0 && y_zero) throw DataError("target column 'y' is all zero");
  if (config.target_index > 0 && library.chi.col(static_cast<Eigen::Index>(config.target_index - 1)).cwiseAbs().maxCoeff() == 0.0)
    throw DataError("target column '" + library.labels[config.target_index - 1] + "' is all zero");

  RegressionProblem p;
  const bool keep_y = !y_zero;
  p.columns.resize(static_cast<Eigen::Index>(library.rows()), static_cast<Eigen::Index>(ncols + (keep_y ? 1 : 0)));
  std::size_t c = 0;
  if (keep_y) {
    p.columns.col(0) = library.y;
    p.labels.push_back("y");
    ++c;
  }
  for (std::size_t j = 0; j < ncols; ++j, ++c) {
    p.columns.col(static_cast<Eigen::Index>(c)) = library.chi.col(static_cast<Eigen::Index>(j));
    p.labels.push_back(library.labels[j]);
  }
  // Augmented index of the target: y is 0; χ_j is j+1, shifted down when y is not stored.
  p.target = config.target_index == 0 ? 0 : config.target_index - (keep_y ? 0 : 1);
  for (std::size_t j = 0; j < p.labels.size(); ++j)
    if (j != p.target) p.library.push_back(j);
  if (!p.columns.allFinite()) throw DataError("operator library contains non-finite entries");
  return p;
}

Eigen::VectorXd RegressionTrace::padded_coefficients(std::size_t iteration) const {
  const Iteration& it = iterations.at(iteration);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(library.size()));
  for (std::size_t a = 0; a < it.active.size(); ++a) {
    auto pos = std::find(library.begin(), library.end(), it.active[a]);
    out(pos - library.begin()) = it.coefficients(static_cast<Eigen::Index>(a));
  }
  return out;
}

RegressionTrace stepwise_eliminate(const RegressionProblem& problem, const StepwiseConfig& config) {
  config.validate();
  if (problem.library.empty()) throw PreconditionError("stepwise_eliminate: empty operator library");
  const Eigen::VectorXd target = problem.target_vector();
  const std::size_t n = problem.rows();
  if (n <= problem.library.size())
    throw PreconditionError("stepwise_eliminate: need more rows (" + std::to_string(n) + ") than operators (" +
                            std::to_string(problem.library.size()) + ")");
  const double alpha = config.effective_alpha();
  const double floor = std::pow(kResidualFloor * target.norm(), 2);

  RegressionTrace trace;
  trace.target = problem.target;
  trace.target_label = problem.target_label();
  trace.library = problem.library;
  trace.labels = problem.sublabels(problem.library);

  std::vector<std::size_t> active = problem.library;
  Fit current = fit_columns(problem, target, active, alpha);
  auto record = [&](const Fit& fit, double F, std::string dropped) {
    Iteration it;
    it.active = active;
    it.labels = problem.sublabels(active);
    it.coefficients = fit.w;
    it.loss = fit.rss / static_cast<double>(n);
    it.f_statistic = F;
    it.dropped = std::move(dropped);
    trace.iterations.push_back(std::move(it));
  };
  record(current, std::numeric_limits<double>::quiet_NaN(), "");

  bool stopped = false;
  while (active.size() > 1) {
    std::size_t best = 0;
    Fit best_fit;
    double best_rss = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < active.size(); ++k) {
      std::vector<std::size_t> reduced = active;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(k));
      Fit f = fit_columns(problem, target, reduced, alpha);
      if (k == 0 || f.rss < best_rss - kTieTolerance * best_rss) {
        best_rss = f.rss;
        best = k;
        best_fit = std::move(f);
      }
    }
    const double F = f_statistic(std::max(best_rss, floor), std::max(current.rss, floor), active.size() - 1,
                                 active.size(), n);
    const std::string label = problem.labels[active[best]];
    if (!stopped && F >= config.F_criteria) {
      stopped = true;
      trace.identified = trace.iterations.size() - 1;
      trace.stop_f = F;
      trace.stop_candidate = label;
      if (!config.full_path) break;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
    current = std::move(best_fit);
    record(current, F, label);
  }
  if (!stopped) trace.identified = trace.iterations.size() - 1;
  return trace;
}

RegressionTrace stepwise_eliminate(const weak::OperatorLibrary& library, const StepwiseConfig& config) {
  return stepwise_eliminate(make_problem(library, config), config);
}

bool ConfirmationReport::all_pass() const noexcept {
  return std::all_of(entries.begin(), entries.end(), [](const ConfirmationEntry& e) { return e.pass; });
}

ConfirmationReport confirmation_test(const RegressionProblem& problem, const RegressionTrace& trace,
                                     const StepwiseConfig& config) {
  config.validate();
  if (trace.iterations.empty()) throw PreconditionError("confirmation_test: trace has no identified model");
  const Iteration& model = trace.identified_model();
  ConfirmationReport report;
  if (model.active.size() < 2) return report;

  const double alpha = config.effective_alpha();
  for (std::size_t k = 0; k < model.active.size(); ++k) {
    const double wk = model.coefficients(static_cast<Eigen::Index>(k));
    const std::size_t col = model.active[k];
    const Eigen::VectorXd tgt = problem.columns.col(static_cast<Eigen::Index>(col));
    if (tgt.cwiseAbs().maxCoeff() == 0.0)
      throw DataError("confirmation_test: target column '" + problem.labels[col] + "' is all zero");

    ConfirmationEntry e;
    e.target_label = problem.labels[col];
    std::vector<std::size_t> lib{trace.target};
    std::vector<double> expected{1.0 / wk};
    for (std::size_t j = 0; j < model.active.size(); ++j) {
      if (j == k) continue;
      lib.push_back(model.active[j]);
      expected.push_back(-model.coefficients(static_cast<Eigen::Index>(j)) / wk);
    }
    e.labels = problem.sublabels(lib);
    e.expected = Eigen::Map<const Eigen::VectorXd>(expected.data(), static_cast<Eigen::Index>(expected.size()));
    e.observed = fit_columns(problem, tgt, lib, alpha).w;
    for (Eigen::Index j = 0; j < e.expected.size(); ++j) {
      const double denom = std::abs(e.expected(j));
      const double err = denom > 0.0 ? std::abs(e.observed(j) - e.expected(j)) / denom
                                     : std::abs(e.observed(j) - e.expected(j));
      e.max_relative_error = std::max(e.max_relative_error, err);
    }
    e.pass = std::isfinite(e.max_relative_error) && e.max_relative_error <= config.confirmation_tolerance;
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_trace_csv(const RegressionTrace& trace, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "iteration,dropped,loss,F";
  for (const auto& l : trace.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    out << i << ',' << it.dropped << ',' << format_number(it.loss) << ','
        << (std::isnan(it.f_statistic) ? std::string("nan") : format_number(it.f_statistic));
    const Eigen::VectorXd w = trace.padded_coefficients(i);
    for (Eigen::Index j = 0; j < w.size(); ++j) out << ',' << format_number(w(j));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_model_csv(const RegressionTrace& trace, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto& model = trace.identified_model();
  out << "label,coefficient\n";
  for (std::size_t j = 0; j < model.labels.size(); ++j)
    out << model.labels[j] << ',' << format_number(model.coefficients(static_cast<Eigen::Index>(j))) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace meso::sysid
