#include "cascademl/activation.hpp"

#include <cmath>

namespace cascademl {

std::string_view to_string(Activation a) noexcept {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) noexcept {
    for (auto a : kAllActivations)
        if (to_string(a) == name) return a;
    return std::nullopt;
}

double activate(double x, Activation a) noexcept {
    switch (a) {
        case Activation::Linear: return x;
        case Activation::Sigmoid:
            // Split by sign so exp never overflows.
            if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
            else {
                const double e = std::exp(x);
                return e / (1.0 + e);
            }
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

double activation_slope(double y, Activation a) noexcept {
    switch (a) {
        case Activation::Linear: return 1.0;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Tanh: return 1.0 - y * y;
    }
    return 1.0;
}

void apply_activation_inplace(Matrix& m, Activation a) noexcept {
    if (a == Activation::Linear) return;
    for (double& v : m.data()) v = activate(v, a);
}

Matrix apply_activation(const Matrix& m, Activation a) {
    Matrix out = m;
    apply_activation_inplace(out, a);
    return out;
}

Matrix activation_derivative(const Matrix& post, Activation a) {
    Matrix out = post;
    for (double& v : out.data()) v = activation_slope(v, a);
    return out;
}

}  // namespace cascademl
