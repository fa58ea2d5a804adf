#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

namespace meso::sysid {

/// Minimizer of ‖y − χω‖² + α‖ω‖². For α > 0 the normal equations are solved with LDLᵀ; for α = 0 a
/// column-pivoting QR of χ is used and rank deficiency raises RankError naming the dependent columns
/// (by label when `labels` is supplied, by index otherwise).
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& chi, const Eigen::VectorXd& y, double alpha,
                          std::span<const std::string> labels = {});

/// Extra-sum-of-squares statistic
///   F = ((rss_reduced − rss_full)/(p_full − p_reduced)) / (rss_full/(n_rows − p_full)),
/// with rss_reduced clamped to at least rss_full so that F ≥ 0.
double f_statistic(double rss_reduced, double rss_full, std::size_t p_reduced, std::size_t p_full,
                   std::size_t n_rows);

/// Residual sum of squares ‖y − χω‖².
double residual_sum_squares(const Eigen::MatrixXd& chi, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

}  // namespace meso::sysid
