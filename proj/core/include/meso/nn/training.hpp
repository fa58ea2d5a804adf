#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meso/nn/dense_net.hpp"

namespace meso::nn {

enum class Optimizer { sgd, rmsprop, adam };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 1000;
  std::size_t batch_size = 20;
  Optimizer optimizer = Optimizer::rmsprop;
  std::uint64_t seed = 0;  // mini-batch shuffling
  double weight_value = 1.0;
  double weight_gradient = 1.0;
  double weight_hessian = 1.0;
  double rho = 0.9;  // RMSprop accumulator decay
  double epsilon = 1e-7;
  /// Learning rate at epoch e is learning_rate / (1 + lr_decay · e).
  double lr_decay = 0.0;

  /// ConfigError unless learning_rate > 0, epochs ≥ 1, batch_size ≥ 1 and the weights are ≥ 0.
  void validate() const;
};

/// Samples are columns of `inputs` (d × N). Each data channel is optional but at least one
/// must be present: values (N), gradients (d × N), hessians (N matrices of d × d).
struct TrainingData {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd values;
  Eigen::MatrixXd gradients;
  std::vector<Eigen::MatrixXd> hessians;

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
  /// ShapeError on inconsistent sizes, PreconditionError when empty or no channel is present,
  /// DataError on non-finite entries.
  void validate(std::size_t dim) const;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean mini-batch loss of each epoch
  double final_loss = 0.0;           // full-data loss after the last update
};

/// Weighted loss over the given sample columns (all when `rows` is empty):
///   w_v·mean (Y − f)² + w_g·mean ‖∂Y/∂X − ŷ‖² + w_h·mean ‖∂²Y/∂X² − Ĥ‖²_F.
/// When `gradient` is non-null it receives ∂loss/∂θ in NetParameters::flatten order.
double evaluate_loss(const DenseNet& net, const TrainingData& data, const TrainConfig& cfg,
                     std::span<const std::size_t> rows = {}, Eigen::VectorXd* gradient = nullptr);

/// Mini-batch descent on evaluate_loss, updating the net's (shared) parameters in place.
/// TrainingError naming the epoch and batch when the loss or its gradient becomes non-finite.
TrainResult train(DenseNet& net, const TrainingData& data, const TrainConfig& cfg);

/// Integrable deep neural network: the trained quantity is ∂Y/∂X of a scalar dense net.
class IDNN {
 public:
  IDNN() = default;
  /// Seeded fan-in initialization of a d-[hidden]-1 net.
  IDNN(std::size_t dim, const std::vector<std::size_t>& hidden, Activation activation = Activation::softplus,
       std::uint64_t seed = 0);
  IDNN(InputTransform transform, const std::vector<std::size_t>& hidden,
       Activation activation = Activation::softplus, std::uint64_t seed = 0);
  explicit IDNN(DenseNet net) : net_(std::move(net)) {}

  DenseNet& net() noexcept { return net_; }
  const DenseNet& net() const noexcept { return net_; }
  std::size_t dim() const noexcept { return net_.input_dim(); }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const { return gradient_out(net_, x); }
  Eigen::MatrixXd evaluate_batch(const Eigen::MatrixXd& xs) const { return gradient_batch(net_, xs); }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const { return hessian_out(net_, x); }

 private:
  DenseNet net_;
};

/// Same as train() on the underlying net; gradient data is the primary channel.
TrainResult train_idnn(IDNN& idnn, const TrainingData& data, const TrainConfig& cfg);

/// The scalar function whose gradient the IDNN represents. Shares parameter storage.
DenseNet antiderivative(const IDNN& idnn);

/// Per point (columns of `points`): true iff the Hessian admits a Cholesky factorization.
std::vector<bool> is_convex(const DenseNet& net, const Eigen::MatrixXd& points);
std::vector<bool> is_convex(const IDNN& idnn, const Eigen::MatrixXd& points);

/// Base net plus a detail net fitted to what the base misses.
struct MultiResolutionModel {
  DenseNet base;
  DenseNet detail;
  TrainResult history;

  Eigen::VectorXd value(const Eigen::MatrixXd& xs) const;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& xs) const;
};

/// Trains `detail` (a freshly initialized net, parameters updated in place) on Ψ − base(X).
/// With beta > 0 the loss adds β‖∇(base + detail) − reference‖² per sample; that requires
/// `reference_gradients` (d × N), otherwise ConfigError. cfg.weight_value scales the label term.
MultiResolutionModel multi_resolution_fit(const DenseNet& base, DenseNet detail, const Eigen::MatrixXd& inputs,
                                          const Eigen::VectorXd& psi, const TrainConfig& cfg, double beta = 0.0,
                                          const Eigen::MatrixXd& reference_gradients = {});

}  // namespace meso::nn
