#include "meso/nn/transform.hpp"

#include <cstdlib>

#include "meso/error.hpp"
#include "meso/ini.hpp"

namespace meso::nn {

InputTransform::Component InputTransform::custom(std::string name, std::function<double(const Eigen::VectorXd&)> f,
                                                 std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad,
                                                 std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess) {
  if (!f || !grad || !hess)
    throw ConfigError("custom transform '" + name + "' must supply its value, first and second derivatives");
  return {Kind::custom, 0, 0, std::move(name), std::move(f), std::move(grad), std::move(hess)};
}

InputTransform::InputTransform(std::size_t input_dim, std::vector<Component> components)
    : input_dim_(input_dim), components_(std::move(components)) {
  if (input_dim_ == 0) throw ConfigError("transform input dimension must be >= 1");
  if (components_.empty()) throw ConfigError("transform needs at least one component");
  for (const auto& c : components_)
    if (c.kind != Kind::custom && (c.i >= input_dim_ || c.j >= input_dim_))
      throw ConfigError("transform component references input " + std::to_string(std::max(c.i, c.j)) +
                        " but the input dimension is " + std::to_string(input_dim_));
}

InputTransform InputTransform::identity_map(std::size_t d) {
  std::vector<Component> c;
  for (std::size_t i = 0; i < d; ++i) c.push_back(identity(i));
  return InputTransform(d, std::move(c));
}

bool InputTransform::serializable() const noexcept {
  for (const auto& c : components_)
    if (c.kind == Kind::custom) return false;
  return true;
}

Eigen::VectorXd InputTransform::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t m = 0; m < components_.size(); ++m) {
    const auto& c = components_[m];
    const auto mi = static_cast<Eigen::Index>(m);
    switch (c.kind) {
      case Kind::identity: t(mi) = x(static_cast<Eigen::Index>(c.i)); break;
      case Kind::square:
      case Kind::product: t(mi) = x(static_cast<Eigen::Index>(c.i)) * x(static_cast<Eigen::Index>(c.j)); break;
      case Kind::custom: t(mi) = c.f(x); break;
    }
  }
  return t;
}

Eigen::MatrixXd InputTransform::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(components_.size()), static_cast<Eigen::Index>(input_dim_));
  for (std::size_t m = 0; m < components_.size(); ++m) {
    const auto& c = components_[m];
    const auto mi = static_cast<Eigen::Index>(m);
    const auto i = static_cast<Eigen::Index>(c.i), j = static_cast<Eigen::Index>(c.j);
    switch (c.kind) {
      case Kind::identity: J(mi, i) = 1.0; break;
      case Kind::square: J(mi, i) = 2.0 * x(i); break;
      case Kind::product:
        J(mi, i) += x(j);
        J(mi, j) += x(i);
        break;
      case Kind::custom: J.row(mi) = c.grad(x).transpose(); break;
    }
  }
  return J;
}

Eigen::MatrixXd InputTransform::component_hessian(std::size_t m, const Eigen::VectorXd& x) const {
  const auto& c = components_.at(m);
  const auto d = static_cast<Eigen::Index>(input_dim_);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  const auto i = static_cast<Eigen::Index>(c.i), j = static_cast<Eigen::Index>(c.j);
  switch (c.kind) {
    case Kind::identity: break;
    case Kind::square: H(i, i) = 2.0; break;
    case Kind::product:
      H(i, j) += 1.0;
      H(j, i) += 1.0;
      break;
    case Kind::custom: H = c.hess(x); break;
  }
  return H;
}

std::string InputTransform::describe() const {
  std::string s;
  for (const auto& c : components_) {
    if (!s.empty()) s += ';';
    switch (c.kind) {
      case Kind::identity: s += "identity:" + std::to_string(c.i); break;
      case Kind::square: s += "square:" + std::to_string(c.i); break;
      case Kind::product: s += "product:" + std::to_string(c.i) + ":" + std::to_string(c.j); break;
      case Kind::custom: throw CapabilityError("custom transform '" + c.name + "' cannot be serialized");
    }
  }
  return s;
}

InputTransform InputTransform::parse(std::string_view text, std::size_t input_dim) {
  std::vector<Component> comps;
  auto index = [&](const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || v < 0) throw ConfigError("transform: bad index '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  for (const auto& item : split_list(text, ';')) {
    const auto parts = split_list(item, ':');
    if (parts.size() == 2 && parts[0] == "identity")
      comps.push_back(identity(index(parts[1])));
    else if (parts.size() == 2 && parts[0] == "square")
      comps.push_back(square(index(parts[1])));
    else if (parts.size() == 3 && parts[0] == "product")
      comps.push_back(product(index(parts[1]), index(parts[2])));
    else
      throw ConfigError("transform: cannot parse component '" + item + "'");
  }
  return InputTransform(input_dim, std::move(comps));
}

}  // namespace meso::nn
