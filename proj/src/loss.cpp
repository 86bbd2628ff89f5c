#include "cascademl/loss.hpp"

#include <algorithm>
#include <cmath>

#include "cascademl/error.hpp"

namespace cascademl {

namespace {

void check_bpmll_inputs(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw DimensionError("bpmll: outputs " + outputs.shape_string() + " vs targets " +
                             targets.shape_string());
    for (double t : targets.data())
        if (t != 1.0 && t != -1.0)
            throw InvalidArgument("bpmll: target entry " + std::to_string(t) + " is not +1/-1");
}

LossValue accumulate(const Matrix& outputs, const Matrix& targets, Matrix* d_outputs) {
    check_bpmll_inputs(outputs, targets);
    const std::size_t n = outputs.rows();
    const std::size_t q = outputs.cols();
    LossValue result;
    result.per_instance.assign(n, 0.0);
    if (d_outputs) *d_outputs = Matrix(n, q);

    std::vector<std::size_t> relevant, irrelevant;
    relevant.reserve(q);
    irrelevant.reserve(q);
    for (std::size_t i = 0; i < n; ++i) {
        relevant.clear();
        irrelevant.clear();
        const auto t = targets.row(i);
        for (std::size_t j = 0; j < q; ++j) (t[j] > 0 ? relevant : irrelevant).push_back(j);
        if (relevant.empty() || irrelevant.empty()) continue;

        const auto c = outputs.row(i);
        const double norm =
            1.0 / (static_cast<double>(relevant.size()) * static_cast<double>(irrelevant.size()));
        double sum = 0.0;
        for (auto k : relevant)
            for (auto l : irrelevant) {
                const double gap = c[k] - c[l];
                const double clamped = std::clamp(gap, -kMaxScoreGap, kMaxScoreGap);
                const double e = std::exp(-clamped);
                sum += e;
                if (d_outputs && gap == clamped) {
                    auto g = d_outputs->row(i);
                    g[k] -= norm * e;
                    g[l] += norm * e;
                }
            }
        result.per_instance[i] = norm * sum;
        result.total += result.per_instance[i];
        ++result.n_effective;
    }
    return result;
}

}  // namespace

LossValue bpmll_loss(const Matrix& outputs, const Matrix& bipolar_targets) {
    return accumulate(outputs, bipolar_targets, nullptr);
}

LossGradient bpmll_gradient(const Matrix& outputs, const Matrix& bipolar_targets) {
    LossGradient g;
    accumulate(outputs, bipolar_targets, &g.d_outputs);
    return g;
}

LossValue bpmll_loss_and_gradient(const Matrix& outputs, const Matrix& bipolar_targets,
                                  Matrix& d_outputs) {
    return accumulate(outputs, bipolar_targets, &d_outputs);
}

double mse_loss(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw DimensionError("mse: outputs " + outputs.shape_string() + " vs targets " +
                             targets.shape_string());
    if (outputs.empty()) return 0.0;
    double acc = 0.0;
    auto o = outputs.data();
    auto t = targets.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double diff = o[i] - t[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(o.size());
}

Matrix mse_gradient(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw DimensionError("mse: outputs " + outputs.shape_string() + " vs targets " +
                             targets.shape_string());
    Matrix g(outputs.rows(), outputs.cols());
    if (outputs.empty()) return g;
    const double factor = 2.0 / static_cast<double>(outputs.size());
    auto o = outputs.data();
    auto t = targets.data();
    auto gd = g.data();
    for (std::size_t i = 0; i < o.size(); ++i) gd[i] = factor * (o[i] - t[i]);
    return g;
}

namespace {

template <typename BiasOf>
L2Penalty penalty_impl(std::span<const Matrix> weights, BiasOf has_bias, double lambda) {
    if (lambda < 0) throw InvalidArgument("l2_penalty: lambda must be non-negative");
    L2Penalty p;
    p.gradients.reserve(weights.size());
    double sq = 0.0;
    for (std::size_t m = 0; m < weights.size(); ++m) {
        const auto& w = weights[m];
        Matrix g(w.rows(), w.cols());
        const std::size_t first = has_bias(m) ? 1 : 0;
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t c = first; c < w.cols(); ++c) {
                sq += w(r, c) * w(r, c);
                g(r, c) = lambda * w(r, c);
            }
        p.gradients.push_back(std::move(g));
    }
    p.value = 0.5 * lambda * sq;
    return p;
}

}  // namespace

L2Penalty l2_penalty(std::span<const Matrix> weights, std::span<const bool> has_bias_column,
                     double lambda) {
    if (has_bias_column.size() != weights.size())
        throw DimensionError("l2_penalty: bias flags do not match weight list");
    return penalty_impl(weights, [&](std::size_t m) { return has_bias_column[m]; }, lambda);
}

L2Penalty l2_penalty(std::span<const Matrix> weights, double lambda) {
    return penalty_impl(weights, [](std::size_t) { return true; }, lambda);
}

}  // namespace cascademl
