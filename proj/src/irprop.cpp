#include "cascademl/irprop.hpp"

#include <algorithm>
#include <numeric>

#include "cascademl/error.hpp"

namespace cascademl {

namespace {

void check_params(const IRpropParams& p) {
    if (!(p.eta_minus > 0.0 && p.eta_minus < 1.0 && p.eta_plus > 1.0))
        throw InvalidArgument("irprop: require 0 < eta_minus < 1 < eta_plus");
    if (!(p.delta_min > 0.0 && p.delta_min <= p.delta_max))
        throw InvalidArgument("irprop: require 0 < delta_min <= delta_max");
    if (p.delta0 < p.delta_min || p.delta0 > p.delta_max)
        throw InvalidArgument("irprop: delta0 " + std::to_string(p.delta0) + " outside [" +
                              std::to_string(p.delta_min) + ", " + std::to_string(p.delta_max) +
                              "]");
}

}  // namespace

IRpropState irprop_init(std::span<const std::pair<std::size_t, std::size_t>> shapes,
                        const IRpropParams& params) {
    check_params(params);
    IRpropState s;
    s.eta_plus = params.eta_plus;
    s.eta_minus = params.eta_minus;
    s.delta_min = params.delta_min;
    s.delta_max = params.delta_max;
    for (auto [r, c] : shapes) {
        s.step_sizes.emplace_back(r, c, params.delta0);
        s.prev_grad.emplace_back(r, c, 0.0);
    }
    return s;
}

IRpropState irprop_init_like(std::span<const Matrix> weights, const IRpropParams& params) {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    shapes.reserve(weights.size());
    for (const auto& w : weights) shapes.emplace_back(w.rows(), w.cols());
    return irprop_init(shapes, params);
}

void irprop_step(std::span<Matrix> weights, std::span<const Matrix> grads, IRpropState& state) {
    if (weights.size() != grads.size() || weights.size() != state.step_sizes.size())
        throw DimensionError("irprop_step: " + std::to_string(weights.size()) + " weight blocks, " +
                             std::to_string(grads.size()) + " gradient blocks, " +
                             std::to_string(state.step_sizes.size()) + " state blocks");
    for (std::size_t m = 0; m < weights.size(); ++m) {
        auto& w = weights[m];
        const auto& g = grads[m];
        auto& step = state.step_sizes[m];
        auto& prev = state.prev_grad[m];
        if (w.rows() != g.rows() || w.cols() != g.cols() || w.rows() != step.rows() ||
            w.cols() != step.cols())
            throw DimensionError("irprop_step: block " + std::to_string(m) + " weights " +
                                 w.shape_string() + ", gradient " + g.shape_string() +
                                 ", state " + step.shape_string());
        auto wd = w.data();
        auto gd = g.data();
        auto sd = step.data();
        auto pd = prev.data();
        for (std::size_t i = 0; i < wd.size(); ++i) {
            const double grad = gd[i];
            const double product = grad * pd[i];
            if (product > 0.0) {
                sd[i] = std::min(sd[i] * state.eta_plus, state.delta_max);
            } else if (product < 0.0) {
                sd[i] = std::max(sd[i] * state.eta_minus, state.delta_min);
                pd[i] = 0.0;
                continue;
            }
            if (grad > 0.0) wd[i] -= sd[i];
            else if (grad < 0.0) wd[i] += sd[i];
            pd[i] = grad;
        }
    }
}

bool StopWindow::should_stop(double loss) {
    history_.push_back(loss);
    if (history_.size() > window_) history_.pop_front();
    if (history_.size() < window_ || window_ == 0) return false;
    const double mean =
        std::accumulate(history_.begin(), history_.end(), 0.0) / static_cast<double>(window_);
    const bool rising = prev_mean_ && mean > *prev_mean_;
    prev_mean_ = mean;
    return rising;
}

}  // namespace cascademl
