#include "meso/nn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "meso/error.hpp"
#include "tape.hpp"

namespace meso::nn {

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::sgd: return "sgd";
    case Optimizer::rmsprop: return "rmsprop";
    case Optimizer::adam: return "adam";
  }
  return "?";
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "rmsprop" || name == "RMSprop") return Optimizer::rmsprop;
  if (name == "adam" || name == "Adam") return Optimizer::adam;
  throw ConfigError("optimizer: unknown value '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(weight_value >= 0.0) || !(weight_gradient >= 0.0) || !(weight_hessian >= 0.0))
    throw ConfigError("loss weights must be >= 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(lr_decay >= 0.0)) throw ConfigError("lr_decay must be >= 0");
}

void TrainingData::validate(std::size_t dim) const {
  const auto n = inputs.cols();
  if (n == 0) throw PreconditionError("training data is empty");
  if (static_cast<std::size_t>(inputs.rows()) != dim)
    throw ShapeError("training inputs have dimension " + std::to_string(inputs.rows()) + ", network expects " +
                     std::to_string(dim));
  if (values.size() == 0 && gradients.size() == 0 && hessians.empty())
    throw PreconditionError("training data has no value, gradient or Hessian channel");
  if (values.size() != 0 && values.size() != n)
    throw ShapeError("values has " + std::to_string(values.size()) + " entries for " + std::to_string(n) + " samples");
  if (gradients.size() != 0 && (gradients.rows() != inputs.rows() || gradients.cols() != n))
    throw ShapeError("gradients must be " + std::to_string(inputs.rows()) + " x " + std::to_string(n));
  if (!hessians.empty()) {
    if (static_cast<Eigen::Index>(hessians.size()) != n)
      throw ShapeError("hessians has " + std::to_string(hessians.size()) + " entries for " + std::to_string(n) + " samples");
    for (const auto& h : hessians)
      if (h.rows() != inputs.rows() || h.cols() != inputs.rows()) throw ShapeError("each Hessian must be d x d");
  }
  auto finite = [](const auto& m) { return m.size() == 0 || m.allFinite(); };
  if (!finite(inputs) || !finite(values) || !finite(gradients)) throw DataError("training data contains non-finite values");
  for (const auto& h : hessians)
    if (!h.allFinite()) throw DataError("training Hessians contain non-finite values");
}

double evaluate_loss(const DenseNet& net, const TrainingData& data, const TrainConfig& cfg,
                     std::span<const std::size_t> rows, Eigen::VectorXd* gradient) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  const bool use_v = data.values.size() != 0 && cfg.weight_value > 0.0;
  const bool use_g = data.gradients.size() != 0 && cfg.weight_gradient > 0.0;
  const bool use_h = !data.hessians.empty() && cfg.weight_hessian > 0.0;
  const int order = use_h ? 2 : (use_g ? 1 : 0);
  if (order >= 1 && !has_second_derivative(net.activation()))
    throw CapabilityError("derivative-data training needs an activation with a second derivative, not '" +
                          to_string(net.activation()) + "'");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd X(data.inputs.rows(), n);
  for (Eigen::Index b = 0; b < n; ++b) X.col(b) = data.inputs.col(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
  const bool tr = net.has_transform();
  const auto tb = detail::transform_batch(net, X, tr && order >= 1, tr && order >= 2);
  detail::Tape tape;
  detail::run_forward(net, tb.T, order, tape);

  const int m = tape.m;
  const auto pairs = detail::upper_pairs(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  Eigen::RowVectorXd Ybar = Eigen::RowVectorXd::Zero(n);
  std::vector<Eigen::RowVectorXd> Gbar, Hbar;
  if (order >= 1) Gbar.assign(static_cast<std::size_t>(m), Eigen::RowVectorXd::Zero(n));
  if (order >= 2) Hbar.assign(pairs.size(), Eigen::RowVectorXd::Zero(n));

  if (use_v) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double r = tape.Y(b) - data.values(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
      loss += cfg.weight_value * inv_n * r * r;
      Ybar(b) = 2.0 * cfg.weight_value * inv_n * r;
    }
  }
  Eigen::VectorXd gt(m), gx_bar, gt_bar(m);
  Eigen::MatrixXd Ht(m, m);
  for (Eigen::Index b = 0; b < n && order >= 1; ++b) {
    const auto col = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]);
    const auto sb = static_cast<std::size_t>(b);
    for (int k = 0; k < m; ++k) gt(k) = tape.G[static_cast<std::size_t>(k)](b);
    gt_bar.setZero();
    if (use_g) {
      const Eigen::VectorXd gx = tr ? Eigen::VectorXd(tb.J[sb].transpose() * gt) : gt;
      const Eigen::VectorXd r = gx - data.gradients.col(col);
      loss += cfg.weight_gradient * inv_n * r.squaredNorm();
      gx_bar = 2.0 * cfg.weight_gradient * inv_n * r;
      gt_bar += tr ? Eigen::VectorXd(tb.J[sb] * gx_bar) : gx_bar;
    }
    if (use_h) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        Ht(pairs[p].first, pairs[p].second) = tape.H[p](b);
        Ht(pairs[p].second, pairs[p].first) = tape.H[p](b);
      }
      Eigen::MatrixXd Hx = tr ? Eigen::MatrixXd(tb.J[sb].transpose() * Ht * tb.J[sb]) : Ht;
      if (tr)
        for (int c = 0; c < m; ++c)
          if (net.transform().curved(static_cast<std::size_t>(c))) Hx += gt(c) * tb.Hc[sb][static_cast<std::size_t>(c)];
      const Eigen::MatrixXd R = Hx - data.hessians[static_cast<std::size_t>(col)];
      loss += cfg.weight_hessian * inv_n * R.squaredNorm();
      const Eigen::MatrixXd Hx_bar = 2.0 * cfg.weight_hessian * inv_n * R;
      const Eigen::MatrixXd Ht_bar = tr ? Eigen::MatrixXd(tb.J[sb] * Hx_bar * tb.J[sb].transpose()) : Hx_bar;
      if (tr)
        for (int c = 0; c < m; ++c)
          if (net.transform().curved(static_cast<std::size_t>(c)))
            gt_bar(c) += Hx_bar.cwiseProduct(tb.Hc[sb][static_cast<std::size_t>(c)]).sum();
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const int k = pairs[p].first, q = pairs[p].second;
        Hbar[p](b) = Ht_bar(k, q) + (k != q ? Ht_bar(q, k) : 0.0);
      }
    }
    for (int k = 0; k < m; ++k) Gbar[static_cast<std::size_t>(k)](b) = gt_bar(k);
  }

  if (gradient) {
    detail::ParamGrad pg;
    detail::run_backward(net, tape, Ybar, Gbar, Hbar, pg);
    *gradient = pg.flatten();
  }
  return loss;
}

TrainResult train(DenseNet& net, const TrainingData& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate(net.input_dim());
  const std::size_t n = data.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto& params = net.parameters();
  Eigen::VectorXd theta = params.flatten();
  const auto np = theta.size();
  Eigen::VectorXd v1 = Eigen::VectorXd::Zero(np), v2 = Eigen::VectorXd::Zero(np), grad;
  std::size_t step = 0;

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * static_cast<double>(epoch));
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batches) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(batch, n - start));
      const double loss = evaluate_loss(net, data, cfg, rows, &grad);
      if (!std::isfinite(loss) || !grad.allFinite())
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches));
      sum += loss;
      ++step;
      switch (cfg.optimizer) {
        case Optimizer::sgd:
          theta -= lr * grad;
          break;
        case Optimizer::rmsprop:
          v2 = cfg.rho * v2 + (1.0 - cfg.rho) * grad.cwiseAbs2();
          theta.array() -= lr * grad.array() / (v2.array().sqrt() + cfg.epsilon);
          break;
        case Optimizer::adam: {
          constexpr double b1 = 0.9, b2 = 0.999;
          v1 = b1 * v1 + (1.0 - b1) * grad;
          v2 = b2 * v2 + (1.0 - b2) * grad.cwiseAbs2();
          const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
          theta.array() -= lr * (v1.array() / c1) / ((v2.array() / c2).sqrt() + cfg.epsilon);
          break;
        }
      }
      params.assign(theta);
    }
    result.loss_history.push_back(sum / static_cast<double>(batches));
  }
  result.final_loss = evaluate_loss(net, data, cfg);
  return result;
}

namespace {

std::vector<std::size_t> chain_widths(std::size_t in, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(1);
  return w;
}

}  // namespace

IDNN::IDNN(std::size_t dim, const std::vector<std::size_t>& hidden, Activation activation, std::uint64_t seed)
    : net_(chain_widths(dim, hidden), activation) {
  net_.initialize(seed);
}

IDNN::IDNN(InputTransform transform, const std::vector<std::size_t>& hidden, Activation activation, std::uint64_t seed)
    : net_(transform, chain_widths(transform.output_dim(), hidden), activation) {
  net_.initialize(seed);
}

TrainResult train_idnn(IDNN& idnn, const TrainingData& data, const TrainConfig& cfg) {
  return train(idnn.net(), data, cfg);
}

DenseNet antiderivative(const IDNN& idnn) { return idnn.net(); }

std::vector<bool> is_convex(const DenseNet& net, const Eigen::MatrixXd& points) {
  std::vector<bool> flags;
  flags.reserve(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const Eigen::MatrixXd H = hessian_out(net, Eigen::VectorXd(points.col(c)));
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    flags.push_back(H.allFinite() && llt.info() == Eigen::Success);
  }
  return flags;
}

std::vector<bool> is_convex(const IDNN& idnn, const Eigen::MatrixXd& points) { return is_convex(idnn.net(), points); }

Eigen::VectorXd MultiResolutionModel::value(const Eigen::MatrixXd& xs) const {
  return forward_batch(base, xs) + forward_batch(detail, xs);
}

Eigen::MatrixXd MultiResolutionModel::gradient(const Eigen::MatrixXd& xs) const {
  return gradient_batch(base, xs) + gradient_batch(detail, xs);
}

MultiResolutionModel multi_resolution_fit(const DenseNet& base, DenseNet detail, const Eigen::MatrixXd& inputs,
                                          const Eigen::VectorXd& psi, const TrainConfig& cfg, double beta,
                                          const Eigen::MatrixXd& reference_gradients) {
  if (!(beta >= 0.0)) throw ConfigError("gradient penalty beta must be >= 0");
  if (beta > 0.0 && reference_gradients.size() == 0)
    throw ConfigError("gradient penalty beta > 0 requires reference gradients");
  if (detail.input_dim() != base.input_dim())
    throw ShapeError("detail net input dimension differs from the base net");
  if (psi.size() != inputs.cols()) throw ShapeError("psi must have one entry per input column");

  // The detail is fitted to unit-RMS labels and its output layer rescaled afterwards, so the
  // optimizer sees the same label scale whatever the amplitude of the residual.
  TrainingData data;
  data.inputs = inputs;
  data.values = psi - forward_batch(base, inputs);
  const double rms = std::sqrt(data.values.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, data.values.size())));
  const double scale = rms > 0.0 && std::isfinite(rms) ? rms : 1.0;
  data.values /= scale;
  TrainConfig c = cfg;
  c.weight_gradient = beta;
  if (beta > 0.0) {
    if (reference_gradients.rows() != inputs.rows() || reference_gradients.cols() != inputs.cols())
      throw ShapeError("reference gradients must match the input shape");
    data.gradients = (reference_gradients - gradient_batch(base, inputs)) / scale;
  }
  MultiResolutionModel model{base, detail, {}};
  model.history = train(model.detail, data, c);
  const std::size_t out = model.detail.layer_count() - 1;
  model.detail.weight(out) *= scale;
  model.detail.bias(out) *= scale;
  return model;
}

}  // namespace meso::nn
