#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "meso/error.hpp"
#include "meso/nn/dense_net.hpp"
#include "meso/nn/training.hpp"

using namespace meso;
using namespace meso::nn;

namespace {

Eigen::VectorXd random_point(std::mt19937_64& rng, Eigen::Index d, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = u(rng);
  return x;
}

DenseNet random_net(std::vector<std::size_t> widths, std::uint64_t seed, Activation a = Activation::softplus) {
  DenseNet net(std::move(widths), a);
  net.initialize(seed);
  std::mt19937_64 rng(seed + 1000);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = u(rng);
  return net;
}

Eigen::VectorXd fd_gradient(const DenseNet& net, const Eigen::VectorXd& x, double h = 1e-4) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd p = x, m = x;
    p(k) += h;
    m(k) -= h;
    g(k) = (forward(net, p) - forward(net, m)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const DenseNet& net, const Eigen::VectorXd& x, double h = 1e-4) {
  Eigen::MatrixXd H(x.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd p = x, m = x;
    p(k) += h;
    m(k) -= h;
    H.col(k) = (gradient_out(net, p) - gradient_out(net, m)) / (2.0 * h);
  }
  return H;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

InputTransform even_in_x1() {
  return InputTransform(2, {InputTransform::identity(0), InputTransform::square(1)});
}

Eigen::MatrixXd line_grid(int n, double a, double b) {
  Eigen::MatrixXd X(1, n);
  for (int i = 0; i < n; ++i) X(0, i) = a + (b - a) * i / (n - 1);
  return X;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

TEST(Forward, ZeroNetGivesZero) {
  DenseNet net({3, 5, 4, 1});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(forward(net, random_point(rng, 3)), 0.0);
}

TEST(Forward, SingleLinearLayer) {
  DenseNet net({3, 1}, Activation::identity);
  net.weight(0) << 0.5, -2.0, 1.25;
  net.bias(0) << 0.75;
  Eigen::VectorXd x(3);
  x << 2.0, 1.0, -4.0;
  EXPECT_DOUBLE_EQ(forward(net, x), 0.5 * 2.0 - 2.0 * 1.0 + 1.25 * -4.0 + 0.75);
}

TEST(Forward, HandComputedTwoTwoOneNet) {
  DenseNet net({2, 2, 1}, Activation::tanh);
  net.weight(0) << 0.5, -1.0, 2.0, 0.25;
  net.bias(0) << 0.1, -0.2;
  net.weight(1) << 1.5, -0.7;
  net.bias(1) << 0.3;
  Eigen::VectorXd x(2);
  x << 0.4, -0.6;
  // 0.3 + 1.5·tanh(0.9) − 0.7·tanh(0.45)
  EXPECT_NEAR(forward(net, x), 1.0791175016235313, 1e-15);
}

TEST(Forward, DimensionMismatchIsShapeError) {
  DenseNet net({3, 4, 1});
  EXPECT_THROW(forward(net, Eigen::VectorXd::Zero(2)), ShapeError);
  EXPECT_THROW(gradient_out(net, Eigen::VectorXd::Zero(4)), ShapeError);
  EXPECT_THROW(hessian_out(net, Eigen::VectorXd::Zero(1)), ShapeError);
}

TEST(Forward, BatchMatchesPointwise) {
  auto net = random_net({3, 6, 5, 1}, 4);
  std::mt19937_64 rng(2);
  Eigen::MatrixXd X(3, 7);
  for (int c = 0; c < 7; ++c) X.col(c) = random_point(rng, 3);
  const auto Y = forward_batch(net, X);
  const auto G = gradient_batch(net, X);
  for (int c = 0; c < 7; ++c) {
    EXPECT_NEAR(Y(c), forward(net, Eigen::VectorXd(X.col(c))), 1e-14);
    EXPECT_LT((G.col(c) - gradient_out(net, Eigen::VectorXd(X.col(c)))).norm(), 1e-14);
  }
}

TEST(Forward, InvalidWidthsRejected) {
  EXPECT_THROW(DenseNet({3}), ConfigError);
  EXPECT_THROW(DenseNet({3, 0, 1}), ConfigError);
  EXPECT_THROW(DenseNet({3, 4, 2}), ConfigError);
}

TEST(GradientOut, ZeroNetHasZeroGradient) {
  DenseNet net({4, 6, 1});
  EXPECT_EQ(gradient_out(net, Eigen::VectorXd(Eigen::VectorXd::Constant(4, 0.3))), Eigen::VectorXd::Zero(4));
}

TEST(GradientOut, LinearNetGradientIsWeightRow) {
  DenseNet net({3, 1}, Activation::identity);
  net.weight(0) << 0.5, -2.0, 1.25;
  const Eigen::VectorXd g = gradient_out(net, Eigen::VectorXd(Eigen::VectorXd::Constant(3, 7.0)));
  EXPECT_EQ(g, Eigen::VectorXd(net.weight(0).transpose()));
}

TEST(GradientOut, MatchesFiniteDifferencesOnRandomNet) {
  auto net = random_net({4, 20, 20, 1}, 11);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_point(rng, 4);
    const auto g = gradient_out(net, x);
    EXPECT_LT((g - fd_gradient(net, x)).norm() / g.norm(), 1e-6) << "point " << i;
  }
}

TEST(GradientOut, TanhNetMatchesFiniteDifferences) {
  auto net = random_net({3, 8, 8, 1}, 3, Activation::tanh);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_point(rng, 3);
    EXPECT_LT(rel_err(gradient_out(net, x), fd_gradient(net, x)), 1e-6);
  }
}

TEST(HessianOut, LinearNetHasZeroHessian) {
  DenseNet net({3, 1}, Activation::identity);
  net.weight(0) << 0.5, -2.0, 1.25;
  EXPECT_EQ(hessian_out(net, Eigen::VectorXd::Ones(3)), Eigen::MatrixXd::Zero(3, 3));
}

TEST(HessianOut, SquareTransformGivesConstantHessian) {
  DenseNet net(InputTransform(1, {InputTransform::square(0)}), {1, 1}, Activation::identity);
  net.weight(0) << 1.5;
  for (double x : {-2.0, 0.0, 0.3, 5.0}) {
    const auto H = hessian_out(net, Eigen::VectorXd::Constant(1, x));
    EXPECT_DOUBLE_EQ(H(0, 0), 3.0);
  }
}

TEST(HessianOut, MatchesFiniteDifferencesAndIsExactlySymmetric) {
  auto net = random_net({4, 20, 20, 1}, 21);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_point(rng, 4);
    const auto H = hessian_out(net, x);
    EXPECT_LT(rel_err(H, fd_hessian(net, x)), 1e-5);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) EXPECT_TRUE(same_bits(H(r, c), H(c, r)));
  }
}

TEST(HessianOut, ChainsThroughCurvedTransforms) {
  InputTransform tr(3, {InputTransform::identity(0), InputTransform::square(1), InputTransform::product(0, 2)});
  DenseNet net(tr, {3, 7, 1}, Activation::tanh);
  net.initialize(9);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_point(rng, 3);
    EXPECT_LT(rel_err(gradient_out(net, x), fd_gradient(net, x)), 1e-6);
    const auto H = hessian_out(net, x);
    EXPECT_LT(rel_err(H, fd_hessian(net, x)), 1e-5);
    EXPECT_TRUE(same_bits(H(0, 2), H(2, 0)));
  }
}

TEST(HessianOut, ReluHasNoSecondDerivative) {
  DenseNet net({2, 3, 1}, Activation::relu);
  EXPECT_THROW(hessian_out(net, Eigen::VectorXd::Zero(2)), CapabilityError);
}

TEST(Transform, SquaredCoordinateMakesOutputExactlyEven) {
  DenseNet net(even_in_x1(), {2, 12, 12, 1});
  net.initialize(3);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    auto x = random_point(rng, 2, -2.0, 2.0);
    const double y = forward(net, x);
    x(1) = -x(1);
    EXPECT_TRUE(same_bits(y, forward(net, x)));
  }
}

TEST(Transform, IdentityTransformMatchesPlainNet) {
  DenseNet plain({3, 5, 1});
  plain.initialize(4);
  DenseNet wrapped(InputTransform::identity_map(3), {3, 5, 1});
  wrapped.parameters() = plain.parameters();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_point(rng, 3);
    EXPECT_EQ(forward(wrapped, x), forward(plain, x));
    EXPECT_LT((gradient_out(wrapped, x) - gradient_out(plain, x)).norm(), 1e-15);
  }
}

TEST(Transform, GradientVanishesOnSymmetryPlane) {
  DenseNet net(even_in_x1(), {2, 8, 1});
  net.initialize(5);
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20; ++i) {
    auto x = random_point(rng, 2);
    x(1) = 0.0;
    EXPECT_EQ(gradient_out(net, x)(1), 0.0);
  }
}

TEST(Transform, CountMismatchAndMissingDerivatives) {
  EXPECT_THROW(DenseNet(even_in_x1(), {3, 4, 1}), ShapeError);
  EXPECT_THROW(InputTransform::custom("f", [](const Eigen::VectorXd& x) { return x(0); },
                                      [](const Eigen::VectorXd& x) { return x; }, nullptr),
               ConfigError);
  EXPECT_THROW(InputTransform(2, {InputTransform::square(2)}), ConfigError);
}

TEST(Transform, CustomComponentChainsLikeBuiltIn) {
  auto sq = InputTransform::custom(
      "x1^2", [](const Eigen::VectorXd& x) { return x(1) * x(1); },
      [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(2);
        g(1) = 2.0 * x(1);
        return g;
      },
      [](const Eigen::VectorXd&) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        h(1, 1) = 2.0;
        return h;
      });
  DenseNet builtin(even_in_x1(), {2, 6, 1});
  builtin.initialize(6);
  DenseNet custom(InputTransform(2, {InputTransform::identity(0), sq}), {2, 6, 1});
  custom.parameters() = builtin.parameters();
  Eigen::VectorXd x(2);
  x << 0.3, -0.8;
  EXPECT_EQ(forward(custom, x), forward(builtin, x));
  EXPECT_LT((hessian_out(custom, x) - hessian_out(builtin, x)).norm(), 1e-14);
}

TEST(Training, ParameterGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int with_transform = 0; with_transform < 2; ++with_transform) {
    DenseNet net = with_transform ? DenseNet(even_in_x1(), {2, 3, 1}) : DenseNet({2, 3, 1});
    net.initialize(7);
    for (std::size_t l = 0; l < net.layer_count(); ++l)
      for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = u(rng);
    TrainingData data;
    const int n = 6;
    data.inputs.resize(2, n);
    data.values.resize(n);
    data.gradients.resize(2, n);
    for (int i = 0; i < n; ++i) {
      data.inputs.col(i) << u(rng), u(rng);
      data.values(i) = u(rng);
      data.gradients.col(i) << u(rng), u(rng);
      Eigen::MatrixXd h(2, 2);
      h << u(rng), 0.2, 0.2, u(rng);
      data.hessians.push_back(h);
    }
    // Each channel on its own, then all three with unequal weights.
    std::vector<TrainConfig> cfgs(4);
    cfgs[0].weight_gradient = cfgs[0].weight_hessian = 0.0;
    cfgs[1].weight_value = cfgs[1].weight_hessian = 0.0;
    cfgs[2].weight_value = cfgs[2].weight_gradient = 0.0;
    cfgs[3].weight_value = 0.7;
    cfgs[3].weight_gradient = 1.3;
    cfgs[3].weight_hessian = 0.4;
    for (const auto& cfg : cfgs) {
      Eigen::VectorXd grad;
      evaluate_loss(net, data, cfg, {}, &grad);
      const Eigen::VectorXd theta = net.parameters().flatten();
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-6;
        Eigen::VectorXd t = theta;
        t(i) += h;
        net.parameters().assign(t);
        const double lp = evaluate_loss(net, data, cfg);
        t(i) -= 2.0 * h;
        net.parameters().assign(t);
        const double lm = evaluate_loss(net, data, cfg);
        net.parameters().assign(theta);
        const double fd = (lp - lm) / (2.0 * h);
        EXPECT_NEAR(grad(i), fd, 1e-4 * std::max(1.0, std::abs(fd))) << "parameter " << i;
      }
    }
  }
}

TEST(Training, LearnsGradientOfSquare) {
  IDNN idnn(1, {10, 10}, Activation::softplus, 3);
  TrainingData data;
  data.inputs = line_grid(100, -1.0, 1.0);
  data.gradients = 2.0 * data.inputs;
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.lr_decay = 0.01;
  train_idnn(idnn, data, cfg);
  const Eigen::MatrixXd held = line_grid(37, -0.95, 0.95);
  const Eigen::VectorXd pred = idnn.evaluate_batch(held).row(0).transpose();
  EXPECT_LT(rmse(pred, Eigen::VectorXd(2.0 * held.row(0).transpose())), 1e-2);
}

TEST(Training, ZeroGradientDataDrivesLossToZero) {
  IDNN idnn(2, {8}, Activation::softplus, 4);
  TrainingData data;
  std::mt19937_64 rng(16);
  data.inputs.resize(2, 50);
  for (int i = 0; i < 50; ++i) data.inputs.col(i) = random_point(rng, 2);
  data.gradients = Eigen::MatrixXd::Zero(2, 50);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.lr_decay = 0.05;
  const double before = evaluate_loss(idnn.net(), data, cfg);
  const auto result = train_idnn(idnn, data, cfg);
  EXPECT_GT(before, 1e-2);
  EXPECT_LT(result.final_loss, 1e-6);
}

TEST(Training, EpochAveragedLossDecreasesOnChemicalPotentialData) {
  // μ = ∇f for f = P·Q, a four-variable surface with several wells.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u0(0.0, 0.5), u(-0.5, 0.5);
  TrainingData data;
  const int n = 200;
  data.inputs.resize(4, n);
  data.gradients.resize(4, n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector4d e(u0(rng), u(rng), u(rng), u(rng));
    data.inputs.col(i) = e;
    const double s = e(1) * e(1) + e(2) * e(2) + e(3) * e(3);
    const double P = (e(0) - 0.1) * (e(0) - 0.1) + s;
    double Q = (e(0) - 0.25) * (e(0) - 0.25);
    for (int k = 1; k < 4; ++k) Q += 10.0 * std::pow(e(k) * e(k) - 0.09, 2);
    Eigen::Vector4d dP(2.0 * (e(0) - 0.1), 2.0 * e(1), 2.0 * e(2), 2.0 * e(3)), dQ;
    dQ(0) = 2.0 * (e(0) - 0.25);
    for (int k = 1; k < 4; ++k) dQ(k) = 40.0 * (e(k) * e(k) - 0.09) * e(k);
    data.gradients.col(i) = dP * Q + P * dQ;
  }
  IDNN idnn(4, {20, 20}, Activation::softplus, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 1000;
  cfg.batch_size = 20;
  const auto result = train_idnn(idnn, data, cfg);
  ASSERT_EQ(result.loss_history.size(), 1000u);
  double previous = INFINITY;
  for (int block = 0; block < 10; ++block) {
    double mean = 0.0;
    for (int e = block * 100; e < (block + 1) * 100; ++e) mean += result.loss_history[static_cast<std::size_t>(e)] / 100.0;
    EXPECT_LT(mean, previous) << "block " << block;
    previous = mean;
  }
}

TEST(Training, DivergenceRaisesTrainingErrorWithLocation) {
  IDNN idnn(1, {5}, Activation::softplus, 2);
  TrainingData data;
  data.inputs = line_grid(40, -1.0, 1.0);
  data.gradients = 50.0 * data.inputs;
  TrainConfig cfg;
  cfg.optimizer = Optimizer::sgd;
  cfg.learning_rate = 1e8;
  cfg.epochs = 50;
  try {
    train_idnn(idnn, data, cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Training, SameSeedGivesIdenticalParameters) {
  TrainingData data;
  data.inputs = line_grid(30, -1.0, 1.0);
  data.gradients = data.inputs.array().cube().matrix();
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 9;
  IDNN a(1, {6, 6}, Activation::softplus, 5), b(1, {6, 6}, Activation::softplus, 5);
  train_idnn(a, data, cfg);
  train_idnn(b, data, cfg);
  EXPECT_EQ(a.net().parameters().flatten(), b.net().parameters().flatten());
}

TEST(Training, ConfigAndDataValidation) {
  IDNN idnn(2, {4}, Activation::softplus, 1);
  TrainingData data;
  data.inputs = Eigen::MatrixXd::Zero(2, 3);
  data.gradients = Eigen::MatrixXd::Zero(2, 3);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train_idnn(idnn, data, cfg), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(train_idnn(idnn, data, cfg), ConfigError);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(train_idnn(idnn, data, cfg), ConfigError);
  cfg = {};
  TrainingData empty;
  empty.inputs = Eigen::MatrixXd::Zero(2, 0);
  EXPECT_THROW(train_idnn(idnn, empty, cfg), PreconditionError);
  TrainingData bad = data;
  bad.gradients(1, 2) = NAN;
  EXPECT_THROW(train_idnn(idnn, bad, cfg), DataError);
  bad = data;
  bad.gradients = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_THROW(train_idnn(idnn, bad, cfg), ShapeError);
  DenseNet relu({2, 3, 1}, Activation::relu);
  EXPECT_THROW(train(relu, data, cfg), CapabilityError);
}

TEST(Antiderivative, SharesParametersWithIdnn) {
  IDNN idnn(2, {5}, Activation::softplus, 3);
  DenseNet f = antiderivative(idnn);
  EXPECT_TRUE(f.shares_parameters_with(idnn.net()));
  Eigen::VectorXd x(2);
  x << 0.2, -0.4;
  const double before = forward(f, x);
  idnn.net().bias(1)(0) += 2.5;
  EXPECT_DOUBLE_EQ(forward(f, x), before + 2.5);
  idnn.net().weight(0)(0, 0) += 0.1;
  EXPECT_EQ(forward(f, x), forward(idnn.net(), x));
  EXPECT_FALSE(f.clone().shares_parameters_with(f));
}

TEST(Antiderivative, FiniteDifferenceMatchesIdnnOutput) {
  IDNN idnn(3, {10, 10}, Activation::softplus, 8);
  const DenseNet f = antiderivative(idnn);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_point(rng, 3);
    EXPECT_LT(rel_err(fd_gradient(f, x), idnn.evaluate(x)), 1e-6);
  }
}

TEST(Antiderivative, ZeroNetIsZero) {
  IDNN idnn(DenseNet({2, 4, 1}));
  EXPECT_EQ(forward(antiderivative(idnn), Eigen::VectorXd(Eigen::VectorXd::Ones(2))), 0.0);
}

TEST(Antiderivative, RecoversQuarticFromItsDerivative) {
  IDNN idnn(1, {20, 20}, Activation::softplus, 1);
  TrainingData data;
  data.inputs = line_grid(200, -1.5, 1.5);
  data.gradients = (4.0 * data.inputs.array().cube() - 2.0 * data.inputs.array()).matrix();
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.lr_decay = 0.01;
  cfg.seed = 1;
  train_idnn(idnn, data, cfg);
  const Eigen::MatrixXd held = line_grid(301, -1.5, 1.5);
  const Eigen::VectorXd truth = (held.array().pow(4) - held.array().square()).row(0).transpose();
  const Eigen::VectorXd pred = forward_batch(antiderivative(idnn), held);
  const double shift = (truth - pred).mean();
  EXPECT_LT(rmse(pred.array() + shift, truth), 1e-2);
}

TEST(Convexity, SquareIsConvexAndNegativeSquareIsNot) {
  DenseNet up(InputTransform(1, {InputTransform::square(0)}), {1, 1}, Activation::identity);
  up.weight(0) << 1.0;
  DenseNet down = up.clone();
  down.weight(0) << -1.0;
  const Eigen::MatrixXd pts = line_grid(21, -2.0, 2.0);
  for (bool flag : is_convex(up, pts)) EXPECT_TRUE(flag);
  for (bool flag : is_convex(down, pts)) EXPECT_FALSE(flag);
}

TEST(Convexity, MatchesAnalyticEigenvaluesOnGrid) {
  // Y = Σ_j v_j softplus(w_j·x + c_j): H = Σ_j v_j σ(z_j)(1 − σ(z_j)) w_j w_jᵀ.
  Eigen::Matrix<double, 3, 2> W;
  W << 1.0, 0.5, -0.8, 1.2, 0.4, -1.0;
  const Eigen::Vector3d c(0.3, -0.2, 0.1), v(1.0, 0.8, -0.5);
  DenseNet net({2, 3, 1});
  net.weight(0) = W;
  net.bias(0) = c;
  net.weight(1) = v.transpose();
  const IDNN idnn(net);

  Eigen::MatrixXd pts(2, 100);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) pts.col(10 * i + j) << -3.0 + 6.0 * i / 9.0, -3.0 + 6.0 * j / 9.0;
  const auto flags = is_convex(idnn, pts);
  int convex = 0;
  for (int p = 0; p < 100; ++p) {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    for (int j = 0; j < 3; ++j) {
      const double z = W.row(j).dot(pts.col(p)) + c(j);
      const double s = 1.0 / (1.0 + std::exp(-z));
      H += v(j) * s * (1.0 - s) * W.row(j).transpose() * W.row(j);
    }
    const double tr = H.trace(), det = H.determinant();
    const double lmin = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
    EXPECT_EQ(flags[static_cast<std::size_t>(p)], lmin > 0.0) << "point " << p;
    convex += lmin > 0.0;
  }
  EXPECT_GT(convex, 0);
  EXPECT_LT(convex, 100);
}

TEST(MultiResolution, ExactBaseLeavesNearZeroDetail) {
  auto base = random_net({1, 6, 1}, 2);
  const Eigen::MatrixXd X = line_grid(100, 0.0, 1.0);
  const Eigen::VectorXd psi = forward_batch(base, X);
  DenseNet detail({1, 10, 10, 1});
  detail.initialize(3);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.lr_decay = 0.1;
  const auto model = multi_resolution_fit(base, detail, X, psi, cfg);
  const Eigen::VectorXd out = forward_batch(model.detail, X);
  EXPECT_LT(std::sqrt(out.squaredNorm() / 100.0), 1e-3);
}

namespace {

struct Hierarchical {
  static double f(double x) { return std::sin(3.0 * x) + x * x + 0.01 * std::sin(50.0 * x); }
  static double df(double x) { return 3.0 * std::cos(3.0 * x) + 2.0 * x + 0.5 * std::cos(50.0 * x); }
};

}  // namespace

TEST(MultiResolution, TwoStageBeatsSingleStageAndPenaltyHelpsGradients) {
  const int n = 400, m = 997;
  Eigen::MatrixXd X(1, n), Xt(1, m), G(1, n);
  Eigen::VectorXd y(n), yt(m), gt(m);
  for (int i = 0; i < n; ++i) {
    X(0, i) = (i + 0.5) / n;
    y(i) = Hierarchical::f(X(0, i));
    G(0, i) = Hierarchical::df(X(0, i));
  }
  for (int i = 0; i < m; ++i) {
    Xt(0, i) = (i + 0.25) / m;
    yt(i) = Hierarchical::f(Xt(0, i));
    gt(i) = Hierarchical::df(Xt(0, i));
  }
  TrainConfig cfg;
  cfg.lr_decay = 0.01;
  cfg.seed = 5;
  TrainingData data;
  data.inputs = X;
  data.values = y;

  DenseNet single({1, 20, 20, 1}, Activation::tanh);
  single.initialize(11);
  cfg.epochs = 2000;
  train(single, data, cfg);

  DenseNet base({1, 20, 20, 1}, Activation::tanh);
  base.initialize(11);
  cfg.epochs = 1000;
  train(base, data, cfg);
  DenseNet d0({1, 40, 40, 1}, Activation::tanh), d1({1, 40, 40, 1}, Activation::tanh);
  d0.initialize(12, 20.0);
  d1.initialize(12, 20.0);
  const auto plain = multi_resolution_fit(base, d0, X, y, cfg);
  const auto penalized = multi_resolution_fit(base, d1, X, y, cfg, 1e-3, G);

  const double single_rmse = rmse(forward_batch(single, Xt), yt);
  EXPECT_LE(rmse(plain.value(Xt), yt), 0.5 * single_rmse);
  const double g_plain = rmse(plain.gradient(Xt).row(0).transpose(), gt);
  const double g_pen = rmse(penalized.gradient(Xt).row(0).transpose(), gt);
  EXPECT_LT(g_pen, g_plain);
}

TEST(MultiResolution, PenaltyWithoutReferenceIsConfigError) {
  DenseNet base({1, 3, 1}), detail({1, 3, 1});
  const Eigen::MatrixXd X = line_grid(5, 0.0, 1.0);
  EXPECT_THROW(multi_resolution_fit(base, detail, X, Eigen::VectorXd::Zero(5), TrainConfig{}, 0.5), ConfigError);
}

TEST(Serialization, RoundTripIsExact) {
  DenseNet net(even_in_x1(), {2, 5, 4, 1}, Activation::tanh);
  net.initialize(31);
  net.bias(0)(1) = 1.0 / 3.0;
  std::stringstream ss;
  save_net(net, ss);
  EXPECT_EQ(ss.str().rfind("mesokit-dense-net,1\n", 0), 0u);
  const DenseNet back = load_net(ss);
  EXPECT_EQ(back.widths(), net.widths());
  EXPECT_EQ(back.activation(), Activation::tanh);
  EXPECT_EQ(back.parameters().flatten(), net.parameters().flatten());
  Eigen::VectorXd x(2);
  x << 0.1, 0.7;
  EXPECT_TRUE(same_bits(forward(back, x), forward(net, x)));
}

TEST(Serialization, MalformedInputReportsLine) {
  std::stringstream bad_header("not-a-net,1\n");
  try {
    load_net(bad_header);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  DenseNet net({2, 2, 1});
  std::stringstream ss;
  save_net(net, ss);
  std::string text = ss.str();
  text.replace(text.find("W1,1,2"), 6, "W1,1,3");
  std::stringstream truncated(text);
  try {
    load_net(truncated);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(Serialization, CustomTransformCannotBeSaved) {
  auto c = InputTransform::custom(
      "id", [](const Eigen::VectorXd& x) { return x(0); },
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); });
  DenseNet net(InputTransform(1, {c}), {1, 1});
  std::stringstream ss;
  EXPECT_THROW(save_net(net, ss), CapabilityError);
}
