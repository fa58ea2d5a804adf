#pragma once

#include <string>
#include <string_view>

namespace meso::nn {

/// Hidden-layer activation. ReLU is offered for plain regression; it has no second derivative,
/// so Hessian evaluation and derivative-data training reject it.
enum class Activation { softplus, tanh, identity, relu };

std::string to_string(Activation a);
/// ConfigError on unknown names.
Activation parse_activation(std::string_view name);
bool has_second_derivative(Activation a) noexcept;

/// g, g′, g″ and g‴ at z. Derivatives a given activation lacks are returned as 0.
struct ActivationValues {
  double g, d1, d2, d3;
};
ActivationValues activation_eval(Activation a, double z) noexcept;

}  // namespace meso::nn
