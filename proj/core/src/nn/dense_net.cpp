#include "meso/nn/dense_net.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "meso/error.hpp"
#include "meso/ini.hpp"
#include "meso/table.hpp"
#include "tape.hpp"

namespace meso::nn {

std::size_t NetParameters::count() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

Eigen::VectorXd NetParameters::flatten() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(count()));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    v.segment(at, weights[l].size()) = Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
    at += weights[l].size();
    v.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return v;
}

void NetParameters::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(count()))
    throw ShapeError("parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                     std::to_string(count()));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights[l].data(), weights[l].size()) = flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

DenseNet::DenseNet(std::vector<std::size_t> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation), params_(std::make_shared<NetParameters>()) {
  if (widths_.size() < 2) throw ConfigError("a dense net needs at least an input and an output width");
  for (auto w : widths_)
    if (w == 0) throw ConfigError("layer widths must be >= 1");
  if (widths_.back() != 1) throw ConfigError("the output layer must have width 1");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    params_->weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(widths_[l + 1]),
                                                     static_cast<Eigen::Index>(widths_[l])));
    params_->biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(widths_[l + 1])));
  }
}

DenseNet::DenseNet(InputTransform transform, std::vector<std::size_t> widths, Activation activation)
    : DenseNet(std::move(widths), activation) {
  if (!transform.empty() && transform.output_dim() != widths_.front())
    throw ShapeError("transform produces " + std::to_string(transform.output_dim()) +
                     " inputs but the first layer expects " + std::to_string(widths_.front()));
  transform_ = std::move(transform);
}

void DenseNet::initialize(std::uint64_t seed, double input_scale) {
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) throw ConfigError("input_scale must be > 0");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < params_->weights.size(); ++l) {
    auto& W = params_->weights[l];
    const double limit = std::sqrt(3.0 / static_cast<double>(W.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = u(rng);
    params_->biases[l].setZero();
  }
  if (input_scale != 1.0) {
    params_->weights[0] *= input_scale;
    std::uniform_real_distribution<double> u(-input_scale, input_scale);
    for (Eigen::Index r = 0; r < params_->biases[0].size(); ++r) params_->biases[0](r) = u(rng);
  }
}

std::size_t DenseNet::input_dim() const noexcept {
  return transform_.empty() ? (widths_.empty() ? 0 : widths_.front()) : transform_.input_dim();
}

DenseNet DenseNet::clone() const {
  DenseNet c = *this;
  if (params_) c.params_ = std::make_shared<NetParameters>(*params_);
  return c;
}

namespace detail {

std::vector<std::pair<int, int>> upper_pairs(int m) {
  std::vector<std::pair<int, int>> p;
  for (int k = 0; k < m; ++k)
    for (int q = k; q < m; ++q) p.emplace_back(k, q);
  return p;
}

namespace {

struct ActArrays {
  Eigen::MatrixXd g0, g1, g2, g3;
};

void activate(Activation a, const Eigen::MatrixXd& Z, ActArrays& out, bool want_g0, bool want_g3) {
  out.g1.resize(Z.rows(), Z.cols());
  out.g2.resize(Z.rows(), Z.cols());
  if (want_g0) out.g0.resize(Z.rows(), Z.cols());
  if (want_g3) out.g3.resize(Z.rows(), Z.cols());
  const Eigen::Index n = Z.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = activation_eval(a, Z.data()[i]);
    if (want_g0) out.g0.data()[i] = v.g;
    out.g1.data()[i] = v.d1;
    out.g2.data()[i] = v.d2;
    if (want_g3) out.g3.data()[i] = v.d3;
  }
}

}  // namespace

void run_forward(const DenseNet& net, const Eigen::MatrixXd& T, int order, Tape& tape) {
  const auto& P = net.parameters();
  const std::size_t L = net.layer_count();
  const int m = static_cast<int>(T.rows());
  const Eigen::Index B = T.cols();
  const auto pairs = upper_pairs(m);
  tape.order = order;
  tape.m = m;
  tape.batch = B;
  tape.A.assign(L, {});
  tape.Z.assign(L - 1, {});
  tape.dA.assign(L, {});
  tape.dZ.assign(L - 1, {});
  tape.ddA.assign(L, {});
  tape.ddZ.assign(L - 1, {});
  tape.A[0] = T;

  ActArrays act;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const auto& W = P.weights[l];
    tape.Z[l] = (W * tape.A[l]).colwise() + P.biases[l];
    activate(net.activation(), tape.Z[l], act, true, false);
    tape.A[l + 1] = act.g0;
    if (order >= 1) {
      tape.dZ[l].resize(static_cast<std::size_t>(m));
      tape.dA[l + 1].resize(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) {
        auto& dz = tape.dZ[l][static_cast<std::size_t>(k)];
        if (l == 0)
          dz = W.col(k).replicate(1, B);
        else
          dz = W * tape.dA[l][static_cast<std::size_t>(k)];
        tape.dA[l + 1][static_cast<std::size_t>(k)] = act.g1.cwiseProduct(dz);
      }
    }
    if (order >= 2) {
      tape.ddZ[l].resize(pairs.size());
      tape.ddA[l + 1].resize(pairs.size());
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& dzk = tape.dZ[l][static_cast<std::size_t>(pairs[p].first)];
        const auto& dzq = tape.dZ[l][static_cast<std::size_t>(pairs[p].second)];
        auto& ddz = tape.ddZ[l][p];
        if (l == 0)
          ddz = Eigen::MatrixXd::Zero(W.rows(), B);
        else
          ddz = W * tape.ddA[l][p];
        tape.ddA[l + 1][p] = (act.g2.array() * dzk.array() * dzq.array() + act.g1.array() * ddz.array()).matrix();
      }
    }
  }

  const std::size_t o = L - 1;
  const auto& Wo = P.weights[o];
  tape.Y = (Wo * tape.A[o]).array() + P.biases[o](0);
  if (order >= 1) {
    tape.G.assign(static_cast<std::size_t>(m), {});
    for (int k = 0; k < m; ++k)
      tape.G[static_cast<std::size_t>(k)] =
          o == 0 ? Eigen::RowVectorXd::Constant(B, Wo(0, k)) : Eigen::RowVectorXd(Wo * tape.dA[o][static_cast<std::size_t>(k)]);
  }
  if (order >= 2) {
    tape.H.assign(pairs.size(), {});
    for (std::size_t p = 0; p < pairs.size(); ++p)
      tape.H[p] = o == 0 ? Eigen::RowVectorXd::Zero(B) : Eigen::RowVectorXd(Wo * tape.ddA[o][p]);
  }
}

void ParamGrad::reset(const NetParameters& p) {
  dW.resize(p.weights.size());
  db.resize(p.biases.size());
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    dW[l] = Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols());
    db[l] = Eigen::VectorXd::Zero(p.biases[l].size());
  }
}

Eigen::VectorXd ParamGrad::flatten() const {
  NetParameters tmp{dW, db};
  return tmp.flatten();
}

void run_backward(const DenseNet& net, const Tape& tape, const Eigen::RowVectorXd& Ybar,
                  const std::vector<Eigen::RowVectorXd>& Gbar, const std::vector<Eigen::RowVectorXd>& Hbar,
                  ParamGrad& grad) {
  const auto& P = net.parameters();
  grad.reset(P);
  const std::size_t L = net.layer_count();
  const std::size_t o = L - 1;
  const int m = tape.m;
  const auto pairs = upper_pairs(m);
  const bool g_on = tape.order >= 1 && !Gbar.empty();
  const bool h_on = tape.order >= 2 && !Hbar.empty();
  const bool tangents = g_on || h_on;
  const auto mk = static_cast<std::size_t>(m);

  const auto& Wo = P.weights[o];
  grad.dW[o] = Ybar * tape.A[o].transpose();
  grad.db[o](0) = Ybar.sum();
  if (o == 0) {
    if (g_on)
      for (int k = 0; k < m; ++k) grad.dW[0](0, k) += Gbar[static_cast<std::size_t>(k)].sum();
    return;
  }

  Eigen::MatrixXd Abar = Wo.transpose() * Ybar;
  std::vector<Eigen::MatrixXd> dAbar, ddAbar;
  if (tangents) {
    dAbar.resize(mk);
    for (std::size_t k = 0; k < mk; ++k) {
      if (g_on) {
        grad.dW[o] += Gbar[k] * tape.dA[o][k].transpose();
        dAbar[k] = Wo.transpose() * Gbar[k];
      } else {
        dAbar[k] = Eigen::MatrixXd::Zero(Wo.cols(), tape.batch);
      }
    }
  }
  if (h_on) {
    ddAbar.resize(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      grad.dW[o] += Hbar[p] * tape.ddA[o][p].transpose();
      ddAbar[p] = Wo.transpose() * Hbar[p];
    }
  }

  ActArrays act;
  std::vector<Eigen::MatrixXd> dZbar(tangents ? mk : 0), ddZbar(h_on ? pairs.size() : 0);
  for (std::size_t l = o; l-- > 0;) {
    const auto& W = P.weights[l];
    activate(net.activation(), tape.Z[l], act, false, h_on);
    Eigen::MatrixXd Zbar = act.g1.cwiseProduct(Abar);
    if (tangents) {
      for (std::size_t k = 0; k < mk; ++k) {
        dZbar[k] = act.g1.cwiseProduct(dAbar[k]);
        Zbar.array() += act.g2.array() * tape.dZ[l][k].array() * dAbar[k].array();
      }
    }
    if (h_on) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto k = static_cast<std::size_t>(pairs[p].first), q = static_cast<std::size_t>(pairs[p].second);
        const auto& dzk = tape.dZ[l][k];
        const auto& dzq = tape.dZ[l][q];
        const auto& adj = ddAbar[p];
        ddZbar[p] = act.g1.cwiseProduct(adj);
        dZbar[k].array() += act.g2.array() * dzq.array() * adj.array();
        dZbar[q].array() += act.g2.array() * dzk.array() * adj.array();
        Zbar.array() += act.g3.array() * dzk.array() * dzq.array() * adj.array() +
                        act.g2.array() * tape.ddZ[l][p].array() * adj.array();
      }
    }
    grad.dW[l] = Zbar * tape.A[l].transpose();
    grad.db[l] = Zbar.rowwise().sum();
    if (l == 0) {
      if (tangents)
        for (std::size_t k = 0; k < mk; ++k) grad.dW[0].col(static_cast<Eigen::Index>(k)) += dZbar[k].rowwise().sum();
      break;
    }
    if (tangents)
      for (std::size_t k = 0; k < mk; ++k) grad.dW[l] += dZbar[k] * tape.dA[l][k].transpose();
    if (h_on)
      for (std::size_t p = 0; p < pairs.size(); ++p) grad.dW[l] += ddZbar[p] * tape.ddA[l][p].transpose();
    Abar = W.transpose() * Zbar;
    if (tangents)
      for (std::size_t k = 0; k < mk; ++k) dAbar[k] = W.transpose() * dZbar[k];
    if (h_on)
      for (std::size_t p = 0; p < pairs.size(); ++p) ddAbar[p] = W.transpose() * ddZbar[p];
  }
}

TransformedBatch transform_batch(const DenseNet& net, const Eigen::MatrixXd& X, bool need_jacobian, bool need_hessians) {
  TransformedBatch tb;
  if (!net.has_transform()) {
    tb.T = X;
    return tb;
  }
  const auto& tr = net.transform();
  tb.T.resize(static_cast<Eigen::Index>(tr.output_dim()), X.cols());
  if (need_jacobian) tb.J.resize(static_cast<std::size_t>(X.cols()));
  if (need_hessians) tb.Hc.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index b = 0; b < X.cols(); ++b) {
    const Eigen::VectorXd x = X.col(b);
    tb.T.col(b) = tr.apply(x);
    if (need_jacobian) tb.J[static_cast<std::size_t>(b)] = tr.jacobian(x);
    if (need_hessians) {
      auto& hs = tb.Hc[static_cast<std::size_t>(b)];
      hs.resize(tr.output_dim());
      for (std::size_t c = 0; c < tr.output_dim(); ++c)
        if (tr.curved(c)) hs[c] = tr.component_hessian(c, x);
    }
  }
  return tb;
}

}  // namespace detail

namespace {

void check_input(const DenseNet& net, Eigen::Index rows) {
  if (net.widths().empty()) throw PreconditionError("network has no layers");
  if (static_cast<std::size_t>(rows) != net.input_dim())
    throw ShapeError("input has dimension " + std::to_string(rows) + ", network expects " +
                     std::to_string(net.input_dim()));
}

}  // namespace

Eigen::VectorXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& xs) {
  check_input(net, xs.rows());
  const auto tb = detail::transform_batch(net, xs, false, false);
  detail::Tape tape;
  detail::run_forward(net, tb.T, 0, tape);
  return tape.Y.transpose();
}

double forward(const DenseNet& net, const Eigen::VectorXd& x) {
  return forward_batch(net, Eigen::MatrixXd(x))(0);
}

Eigen::MatrixXd gradient_batch(const DenseNet& net, const Eigen::MatrixXd& xs) {
  check_input(net, xs.rows());
  const auto tb = detail::transform_batch(net, xs, true, false);
  detail::Tape tape;
  detail::run_forward(net, tb.T, 1, tape);
  const auto m = static_cast<Eigen::Index>(tape.m);
  Eigen::MatrixXd Gt(m, xs.cols());
  for (Eigen::Index k = 0; k < m; ++k) Gt.row(k) = tape.G[static_cast<std::size_t>(k)];
  if (!net.has_transform()) return Gt;
  Eigen::MatrixXd Gx(xs.rows(), xs.cols());
  for (Eigen::Index b = 0; b < xs.cols(); ++b)
    Gx.col(b) = tb.J[static_cast<std::size_t>(b)].transpose() * Gt.col(b);
  return Gx;
}

Eigen::VectorXd gradient_out(const DenseNet& net, const Eigen::VectorXd& x) {
  return gradient_batch(net, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd hessian_out(const DenseNet& net, const Eigen::VectorXd& x) {
  if (!has_second_derivative(net.activation()))
    throw CapabilityError("activation '" + to_string(net.activation()) + "' has no second derivative");
  check_input(net, x.size());
  const Eigen::MatrixXd X = x;
  const auto tb = detail::transform_batch(net, X, true, true);
  detail::Tape tape;
  detail::run_forward(net, tb.T, 2, tape);
  const int m = tape.m;
  const auto pairs = detail::upper_pairs(m);
  Eigen::MatrixXd Ht(m, m);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Ht(pairs[p].first, pairs[p].second) = tape.H[p](0);
    Ht(pairs[p].second, pairs[p].first) = tape.H[p](0);
  }
  if (!net.has_transform()) return Ht;

  const auto& J = tb.J[0];
  Eigen::MatrixXd Hx = J.transpose() * Ht * J;
  for (std::size_t c = 0; c < net.transform().output_dim(); ++c)
    if (net.transform().curved(c)) Hx += tape.G[c](0) * tb.Hc[0][c];
  for (Eigen::Index i = 0; i < Hx.rows(); ++i)
    for (Eigen::Index j = i + 1; j < Hx.cols(); ++j) Hx(j, i) = Hx(i, j);
  return Hx;
}

void save_net(const DenseNet& net, std::ostream& out) {
  out << "mesokit-dense-net,1\n";
  out << "activation," << to_string(net.activation()) << '\n';
  out << "widths";
  for (auto w : net.widths()) out << ',' << w;
  out << '\n';
  if (net.has_transform())
    out << "transform," << net.transform().input_dim() << ',' << net.transform().describe() << '\n';
  else
    out << "transform,none\n";
  const auto& P = net.parameters();
  for (std::size_t l = 0; l < P.weights.size(); ++l) {
    const auto& W = P.weights[l];
    out << 'W' << l << ',' << W.rows() << ',' << W.cols();
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) out << ',' << format_number(W(r, c));
    out << '\n';
    out << 'b' << l << ',' << P.biases[l].size();
    for (Eigen::Index r = 0; r < P.biases[l].size(); ++r) out << ',' << format_number(P.biases[l](r));
    out << '\n';
  }
}

void save_net(const DenseNet& net, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  save_net(net, out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

DenseNet load_net(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const std::string& what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim_view(line).empty()) return split_list(line, ',');
    }
    throw ParseError(line_no + 1, "unexpected end of file, expected " + what);
  };
  auto to_size = [&](const std::string& s) {
    const double v = parse_double_field(s, line_no, "size");
    if (v < 0 || v != std::floor(v)) throw ParseError(line_no, "bad size '" + s + "'");
    return static_cast<std::size_t>(v);
  };

  auto f = next("header");
  if (f.size() != 2 || f[0] != "mesokit-dense-net") throw ParseError(line_no, "not a mesokit dense net file");
  if (f[1] != "1") throw ParseError(line_no, "unsupported format version '" + f[1] + "'");

  f = next("activation");
  if (f.size() != 2 || f[0] != "activation") throw ParseError(line_no, "expected 'activation,<name>'");
  Activation act{};
  try {
    act = parse_activation(f[1]);
  } catch (const ConfigError& e) {
    throw ParseError(line_no, e.what());
  }

  f = next("widths");
  if (f.size() < 3 || f[0] != "widths") throw ParseError(line_no, "expected 'widths,<w0>,...,1'");
  std::vector<std::size_t> widths;
  for (std::size_t i = 1; i < f.size(); ++i) widths.push_back(to_size(f[i]));

  f = next("transform");
  if (f.empty() || f[0] != "transform") throw ParseError(line_no, "expected 'transform,...'");
  InputTransform tr;
  if (!(f.size() == 2 && f[1] == "none")) {
    if (f.size() != 3) throw ParseError(line_no, "expected 'transform,<input dim>,<components>'");
    try {
      tr = InputTransform::parse(f[2], to_size(f[1]));
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }

  DenseNet net = [&] {
    try {
      return tr.empty() ? DenseNet(widths, act) : DenseNet(tr, widths, act);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }();
  auto& P = net.parameters();
  for (std::size_t l = 0; l < P.weights.size(); ++l) {
    auto& W = P.weights[l];
    f = next("W" + std::to_string(l));
    if (f.size() < 3 || f[0] != "W" + std::to_string(l)) throw ParseError(line_no, "expected W" + std::to_string(l));
    if (to_size(f[1]) != static_cast<std::size_t>(W.rows()) || to_size(f[2]) != static_cast<std::size_t>(W.cols()) ||
        f.size() != 3 + static_cast<std::size_t>(W.size()))
      throw ParseError(line_no, "weight block W" + std::to_string(l) + " does not match the declared widths");
    std::size_t at = 3;
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = parse_double_field(f[at++], line_no, "weight");
    auto& b = P.biases[l];
    f = next("b" + std::to_string(l));
    if (f.size() < 2 || f[0] != "b" + std::to_string(l)) throw ParseError(line_no, "expected b" + std::to_string(l));
    if (to_size(f[1]) != static_cast<std::size_t>(b.size()) || f.size() != 2 + static_cast<std::size_t>(b.size()))
      throw ParseError(line_no, "bias block b" + std::to_string(l) + " does not match the declared widths");
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = parse_double_field(f[2 + static_cast<std::size_t>(r)], line_no, "bias");
  }
  return net;
}

DenseNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load_net(in);
}

}  // namespace meso::nn
