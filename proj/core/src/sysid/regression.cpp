#include "meso/sysid/regression.hpp"

#include <algorithm>
#include <cmath>

#include "meso/error.hpp"

namespace meso::sysid {

namespace {

std::string column_name(Eigen::Index j, std::span<const std::string> labels) {
  std::string s = std::to_string(j);
  if (static_cast<std::size_t>(j) < labels.size()) s += " (" + labels[static_cast<std::size_t>(j)] + ")";
  return s;
}

}  // namespace

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& chi, const Eigen::VectorXd& y, double alpha,
                          std::span<const std::string> labels) {
  if (chi.rows() == 0 || chi.cols() == 0) throw PreconditionError("ridge_fit: empty operator matrix");
  if (chi.rows() != y.size())
    throw ShapeError("ridge_fit: chi has " + std::to_string(chi.rows()) + " rows but y has " +
                     std::to_string(y.size()));
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw PreconditionError("ridge_fit: alpha must be finite and >= 0");
  if (!chi.allFinite() || !y.allFinite()) throw DataError("ridge_fit: non-finite entries in chi or y");

  if (alpha > 0.0) {
    Eigen::MatrixXd gram = chi.transpose() * chi;
    gram.diagonal().array() += alpha;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd w = ldlt.solve(chi.transpose() * y);
      if (w.allFinite()) return w;
    }
    // Badly scaled normal equations: solve the same problem as [χ; √α I] w ≈ [y; 0].
    const Eigen::Index n = chi.rows(), p = chi.cols();
    Eigen::MatrixXd aug(n + p, p);
    aug.topRows(n) = chi;
    aug.bottomRows(p) = std::sqrt(alpha) * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p);
    rhs.head(n) = y;
    Eigen::VectorXd w = aug.colPivHouseholderQr().solve(rhs);
    if (!w.allFinite()) throw SolverError("ridge_fit: solution is not finite");
    return w;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(chi);
  if (qr.rank() < chi.cols()) {
    std::string msg = "ridge_fit: operator matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                      std::to_string(chi.cols()) + "); dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < chi.cols(); ++k) msg += " " + column_name(perm(k), labels);
    throw RankError(msg);
  }
  return qr.solve(y);
}

double f_statistic(double rss_reduced, double rss_full, std::size_t p_reduced, std::size_t p_full,
                   std::size_t n_rows) {
  if (!(rss_full > 0.0)) throw PreconditionError("f_statistic: rss_full must be positive");
  if (p_full <= p_reduced) throw PreconditionError("f_statistic: p_full must exceed p_reduced");
  if (n_rows <= p_full) throw PreconditionError("f_statistic: n_rows must exceed p_full");
  if (!std::isfinite(rss_reduced) || !std::isfinite(rss_full))
    throw PreconditionError("f_statistic: residual sums must be finite");
  const double gain = std::max(rss_reduced, rss_full) - rss_full;
  return (gain / static_cast<double>(p_full - p_reduced)) / (rss_full / static_cast<double>(n_rows - p_full));
}

double residual_sum_squares(const Eigen::MatrixXd& chi, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  if (chi.cols() == 0) return y.squaredNorm();
  return (y - chi * w).squaredNorm();
}

}  // namespace meso::sysid
