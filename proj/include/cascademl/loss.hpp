#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cascademl/matrix.hpp"

namespace cascademl {

/// Pairwise ranking loss of one batch. `total` is the raw sum over
/// instances; divide by `n_effective` for per-instance reporting.
struct LossValue {
    double total = 0.0;
    std::vector<double> per_instance;
    /// Instances having at least one relevant and one irrelevant label.
    std::size_t n_effective = 0;

    double mean() const noexcept {
        return n_effective == 0 ? 0.0 : total / static_cast<double>(n_effective);
    }
};

struct LossGradient {
    Matrix d_outputs;  // n x q
};

/// Score differences are clamped to this magnitude before exponentiation.
inline constexpr double kMaxScoreGap = 50.0;

/// Sum over instances of (1/(|Y||Ybar|)) * sum_{k in Y, l in Ybar} exp(-(c_k - c_l)).
/// Instances whose relevant or irrelevant set is empty contribute zero.
LossValue bpmll_loss(const Matrix& outputs, const Matrix& bipolar_targets);
LossGradient bpmll_gradient(const Matrix& outputs, const Matrix& bipolar_targets);
/// Loss and gradient in one pass; the trainers use this.
LossValue bpmll_loss_and_gradient(const Matrix& outputs, const Matrix& bipolar_targets,
                                  Matrix& d_outputs);

/// (1/(n*q)) * sum (o - t)^2
double mse_loss(const Matrix& outputs, const Matrix& targets);
/// (2/(n*q)) * (o - t)
Matrix mse_gradient(const Matrix& outputs, const Matrix& targets);

struct L2Penalty {
    double value = 0.0;
    std::vector<Matrix> gradients;
};

/// (lambda/2) * sum ||W||^2 over every matrix, skipping column 0 (the bias
/// column in this code base's weight layout). Gradient is lambda * W with a
/// zero bias column.
L2Penalty l2_penalty(std::span<const Matrix> weights, double lambda);
/// Same, for callers that mark the bias column per matrix.
L2Penalty l2_penalty(std::span<const Matrix> weights, std::span<const bool> has_bias_column,
                     double lambda);

}  // namespace cascademl
