#include "meso/nn/activation.hpp"

#include <algorithm>
#include <cmath>

#include "meso/error.hpp"

namespace meso::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::softplus: return "softplus";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "softplus") return Activation::softplus;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "relu") return Activation::relu;
  throw ConfigError("activation: unknown value '" + std::string(name) + "'");
}

bool has_second_derivative(Activation a) noexcept { return a != Activation::relu; }

ActivationValues activation_eval(Activation a, double z) noexcept {
  switch (a) {
    case Activation::softplus: {
      // log(1 + e^z) without overflow; σ(z) evaluated on the stable branch.
      const double g = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
      const double e = std::exp(-std::abs(z));
      const double s = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      const double s1 = s * (1.0 - s);
      return {g, s, s1, s1 * (1.0 - 2.0 * s)};
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      const double u = 1.0 - t * t;
      return {t, u, -2.0 * t * u, -2.0 * u * (1.0 - 3.0 * t * t)};
    }
    case Activation::identity:
      return {z, 1.0, 0.0, 0.0};
    case Activation::relu:
      return {z > 0.0 ? z : 0.0, z > 0.0 ? 1.0 : 0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0, 0.0};
}

}  // namespace meso::nn
