#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "meso/nn/activation.hpp"
#include "meso/nn/transform.hpp"

namespace meso::nn {

/// Weights and biases of every affine layer. Layer l maps width l to width l+1; the last one is
/// the linear output layer.
struct NetParameters {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t count() const noexcept;
  /// Layer by layer, W (column-major) then b.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

/// Fully connected scalar-output network with an optional input transform in front.
///
/// Copies share parameter storage, so a copy is a view of the same function; clone() detaches.
class DenseNet {
 public:
  DenseNet() = default;
  /// widths = {m, h_1, ..., h_n, 1}; all zero parameters. ConfigError when fewer than two
  /// widths are given, a width is zero, or the output width is not 1.
  explicit DenseNet(std::vector<std::size_t> widths, Activation activation = Activation::softplus);
  /// Same, with T applied to X first. ShapeError when T produces a different count than widths[0].
  DenseNet(InputTransform transform, std::vector<std::size_t> widths, Activation activation = Activation::softplus);

  /// Fan-in scaled uniform weights U(−√(3/fan_in), √(3/fan_in)) from a seeded mt19937_64; zero biases.
  /// An input_scale s ≠ 1 multiplies the first layer's weights by s and draws its biases from
  /// U(−s, s), so the first-layer features vary on a length scale about 1/s of the input range.
  void initialize(std::uint64_t seed, double input_scale = 1.0);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  Activation activation() const noexcept { return activation_; }
  const InputTransform& transform() const noexcept { return transform_; }
  bool has_transform() const noexcept { return !transform_.empty(); }
  /// Dimension of X (the transform's input when present).
  std::size_t input_dim() const noexcept;
  std::size_t layer_count() const noexcept { return widths_.size() - 1; }

  NetParameters& parameters() { return *params_; }
  const NetParameters& parameters() const { return *params_; }
  Eigen::MatrixXd& weight(std::size_t layer) { return params_->weights.at(layer); }
  Eigen::VectorXd& bias(std::size_t layer) { return params_->biases.at(layer); }
  const Eigen::MatrixXd& weight(std::size_t layer) const { return params_->weights.at(layer); }
  const Eigen::VectorXd& bias(std::size_t layer) const { return params_->biases.at(layer); }

  bool shares_parameters_with(const DenseNet& other) const noexcept { return params_ == other.params_; }
  DenseNet clone() const;

 private:
  std::vector<std::size_t> widths_;
  Activation activation_ = Activation::softplus;
  InputTransform transform_;
  std::shared_ptr<NetParameters> params_;
};

/// Y(X). ShapeError on a dimension mismatch.
double forward(const DenseNet& net, const Eigen::VectorXd& x);
/// Column-wise: X is d × B, result length B.
Eigen::VectorXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& xs);
/// ∂Y/∂X, length d.
Eigen::VectorXd gradient_out(const DenseNet& net, const Eigen::VectorXd& x);
/// Column-wise: d × B.
Eigen::MatrixXd gradient_batch(const DenseNet& net, const Eigen::MatrixXd& xs);
/// ∂²Y/∂X², exactly symmetric. CapabilityError when the activation has no second derivative.
Eigen::MatrixXd hessian_out(const DenseNet& net, const Eigen::VectorXd& x);

/// Text format: header line `mesokit-dense-net,1`, then activation, widths, transform and one
/// `W<l>` / `b<l>` line per layer with row-major values at 17 significant digits.
void save_net(const DenseNet& net, std::ostream& out);
void save_net(const DenseNet& net, const std::filesystem::path& path);
/// ParseError (with line) on malformed content.
DenseNet load_net(std::istream& in);
DenseNet load_net(const std::filesystem::path& path);

}  // namespace meso::nn
