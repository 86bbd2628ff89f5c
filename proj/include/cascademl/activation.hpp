#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "cascademl/matrix.hpp"

namespace cascademl {

enum class Activation { Linear, Sigmoid, Tanh };

inline constexpr std::array<Activation, 3> kAllActivations{Activation::Linear, Activation::Sigmoid,
                                                          Activation::Tanh};

std::string_view to_string(Activation a) noexcept;
std::optional<Activation> parse_activation(std::string_view name) noexcept;

double activate(double x, Activation a) noexcept;
/// Derivative expressed through the activation's output value y = a(x).
double activation_slope(double y, Activation a) noexcept;

Matrix apply_activation(const Matrix& m, Activation a);
void apply_activation_inplace(Matrix& m, Activation a) noexcept;
/// Elementwise derivative. Input holds post-activation values.
Matrix activation_derivative(const Matrix& post, Activation a);

}  // namespace cascademl
