#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace meso::nn {

/// Map X ∈ R^d → T(X) ∈ R^m applied ahead of the first dense layer. Each component carries its
/// first and second derivatives so gradients and Hessians can be chained analytically.
class InputTransform {
 public:
  enum class Kind { identity, square, product, custom };

  struct Component {
    Kind kind = Kind::identity;
    std::size_t i = 0, j = 0;
    std::string name;
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
  };

  static Component identity(std::size_t i) { return {Kind::identity, i, 0, {}, {}, {}, {}}; }
  static Component square(std::size_t i) { return {Kind::square, i, i, {}, {}, {}, {}}; }
  static Component product(std::size_t i, std::size_t j) { return {Kind::product, i, j, {}, {}, {}, {}}; }
  /// ConfigError when any of f, grad, hess is missing.
  static Component custom(std::string name, std::function<double(const Eigen::VectorXd&)> f,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad,
                          std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess);

  InputTransform() = default;
  /// ConfigError when a component references an input index ≥ input_dim.
  InputTransform(std::size_t input_dim, std::vector<Component> components);
  /// [x_0, ..., x_{d-1}].
  static InputTransform identity_map(std::size_t d);

  bool empty() const noexcept { return components_.empty(); }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return components_.size(); }
  const std::vector<Component>& components() const noexcept { return components_; }
  /// True when every component is a built-in kind (and so can be serialized).
  bool serializable() const noexcept;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// m × d.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  /// d × d Hessian of component c.
  Eigen::MatrixXd component_hessian(std::size_t c, const Eigen::VectorXd& x) const;
  /// Whether component c has a non-zero Hessian anywhere.
  bool curved(std::size_t c) const noexcept { return components_.at(c).kind != Kind::identity; }

  /// "identity:0;square:1;product:0:2". CapabilityError for custom components.
  std::string describe() const;
  /// Inverse of describe(); ParseError-free, raises ConfigError on malformed text.
  static InputTransform parse(std::string_view text, std::size_t input_dim);

 private:
  std::size_t input_dim_ = 0;
  std::vector<Component> components_;
};

}  // namespace meso::nn
