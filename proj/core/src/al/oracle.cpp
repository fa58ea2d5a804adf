#include "meso/al/oracle.hpp"

#include <cmath>
#include <string>

#include "meso/error.hpp"

namespace meso::al {

Oracle::Oracle(Eigen::VectorXd lower, Eigen::VectorXd upper, Field mu, Scalar energy)
    : lower_(std::move(lower)), upper_(std::move(upper)), mu_(std::move(mu)), energy_(std::move(energy)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) throw ConfigError("oracle bounds must be non-empty and of equal length");
  for (Eigen::Index i = 0; i < lower_.size(); ++i)
    if (!(lower_(i) < upper_(i))) throw ConfigError("oracle bound " + std::to_string(i) + " is empty");
  if (!mu_) throw ConfigError("oracle needs a chemical-potential function");
}

bool Oracle::contains(const Eigen::VectorXd& eta) const {
  if (eta.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (!(eta(i) >= lower_(i) && eta(i) <= upper_(i))) return false;
  return true;
}

void Oracle::check(const Eigen::VectorXd& eta) const {
  if (eta.size() != lower_.size())
    throw ShapeError("oracle expects " + std::to_string(lower_.size()) + " order parameters, got " + std::to_string(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (!(eta(i) >= lower_(i) && eta(i) <= upper_(i)))
      throw DomainError("eta_" + std::to_string(i) + " = " + std::to_string(eta(i)) + " lies outside [" +
                        std::to_string(lower_(i)) + ", " + std::to_string(upper_(i)) + "]");
}

Eigen::VectorXd Oracle::mu(const Eigen::VectorXd& eta) const {
  check(eta);
  return mu_(eta);
}

Eigen::MatrixXd Oracle::mu_batch(const Eigen::MatrixXd& etas) const {
  Eigen::MatrixXd out(etas.rows(), etas.cols());
  for (Eigen::Index c = 0; c < etas.cols(); ++c) out.col(c) = mu(Eigen::VectorXd(etas.col(c)));
  return out;
}

double Oracle::energy(const Eigen::VectorXd& eta) const {
  if (!energy_) throw CapabilityError("this oracle does not provide the free energy");
  check(eta);
  return energy_(eta);
}

namespace {

constexpr double kDisordered = 0.1;
constexpr double kOrderedComposition = 0.25;
constexpr double kOrderedSquare = 0.09;  // η_k = ±0.3
constexpr double kOrderedWeight = 10.0;

double p_term(const Eigen::VectorXd& e) {
  double p = (e(0) - kDisordered) * (e(0) - kDisordered);
  for (Eigen::Index k = 1; k < e.size(); ++k) p += e(k) * e(k);
  return p;
}

double q_term(const Eigen::VectorXd& e) {
  double q = (e(0) - kOrderedComposition) * (e(0) - kOrderedComposition);
  for (Eigen::Index k = 1; k < e.size(); ++k) {
    const double s = e(k) * e(k) - kOrderedSquare;
    q += kOrderedWeight * s * s;
  }
  return q;
}

Eigen::VectorXd ordered(double s1, double s2, double s3) {
  Eigen::VectorXd w(4);
  w << kOrderedComposition, 0.3 * s1, 0.3 * s2, 0.3 * s3;
  return w;
}

}  // namespace

Oracle synthetic_oracle() {
  Eigen::VectorXd lo(4), hi(4);
  lo << 0.0, -0.5, -0.5, -0.5;
  hi << 0.5, 0.5, 0.5, 0.5;
  auto mu = [](const Eigen::VectorXd& e) {
    const double P = p_term(e), Q = q_term(e);
    Eigen::VectorXd dP(4), dQ(4);
    dP(0) = 2.0 * (e(0) - kDisordered);
    dQ(0) = 2.0 * (e(0) - kOrderedComposition);
    for (Eigen::Index k = 1; k < 4; ++k) {
      dP(k) = 2.0 * e(k);
      dQ(k) = 4.0 * kOrderedWeight * (e(k) * e(k) - kOrderedSquare) * e(k);
    }
    return Eigen::VectorXd(Q * dP + P * dQ);
  };
  auto f = [](const Eigen::VectorXd& e) { return p_term(e) * q_term(e); };
  Oracle o(lo, hi, mu, f);
  Eigen::VectorXd d(4);
  d << kDisordered, 0.0, 0.0, 0.0;
  o.wells = {d};
  for (int s1 : {1, -1})
    for (int s2 : {1, -1})
      for (int s3 : {1, -1}) o.wells.push_back(ordered(s1, s2, s3));
  o.tracked_wells = {d, ordered(1, 1, 1), ordered(1, -1, -1), ordered(-1, 1, -1), ordered(-1, -1, 1)};
  return o;
}

}  // namespace meso::al
