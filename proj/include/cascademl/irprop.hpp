#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cascademl/matrix.hpp"

namespace cascademl {

struct IRpropParams {
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double delta0 = 0.1;
    double delta_min = 1e-6;
    double delta_max = 50.0;
};

/// Per-weight step sizes and last gradients for iRProp-.
struct IRpropState {
    std::vector<Matrix> step_sizes;
    std::vector<Matrix> prev_grad;
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double delta_min = 1e-6;
    double delta_max = 50.0;
};

/// Throws InvalidArgument when delta0 lies outside [delta_min, delta_max] or
/// the factors violate 0 < eta_minus < 1 < eta_plus.
IRpropState irprop_init(std::span<const std::pair<std::size_t, std::size_t>> shapes,
                        const IRpropParams& params = {});
IRpropState irprop_init_like(std::span<const Matrix> weights, const IRpropParams& params = {});

/// One iRProp- update, in place. Per coordinate with gradient g and stored
/// previous gradient g':
///   g*g' > 0: grow the step, move against sign(g), store g
///   g*g' < 0: shrink the step, leave the weight, store 0
///   g*g' = 0: move against sign(g) with the current step, store g
void irprop_step(std::span<Matrix> weights, std::span<const Matrix> grads, IRpropState& state);

/// Rolling window of validation losses. Training stops once the window is
/// full and its mean rises relative to the previous epoch's window mean.
class StopWindow {
public:
    explicit StopWindow(std::size_t window) : window_(window) {}

    std::size_t window() const noexcept { return window_; }
    const std::deque<double>& history() const noexcept { return history_; }

    /// Records `loss`; returns true when training should stop.
    bool should_stop(double loss);

private:
    std::size_t window_;
    std::deque<double> history_;
    std::optional<double> prev_mean_;
};

inline bool should_stop(StopWindow& window, double new_loss) { return window.should_stop(new_loss); }

}  // namespace cascademl
