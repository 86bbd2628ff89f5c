#include <cmath>
#include <limits>

#include "cascademl/error.hpp"
#include "cascademl/irprop.hpp"
#include "cascademl/loss.hpp"
#include "cascademl/trainer.hpp"

namespace cascademl {

namespace {

constexpr std::uint64_t kBaselineStream = 4;

}  // namespace

NetworkObjective ranking_objective(const CascadeNetwork& net, const Matrix& x,
                                   const Matrix& bipolar_targets, double lambda, bool mask_skip) {
    const auto trace = forward(net, x);
    Matrix d_out;
    const auto loss = bpmll_loss_and_gradient(trace.output, bipolar_targets, d_out);

    NetworkObjective obj;
    obj.gradient = backpropagate(net, trace, d_out);
    obj.value = loss.total;

    auto add_l2 = [&](const Matrix& w, Matrix& g, std::size_t skip_first, std::size_t skip_last) {
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t c = 1; c < w.cols(); ++c) {
                if (c >= skip_first && c < skip_last) continue;
                obj.value += 0.5 * lambda * w(r, c) * w(r, c);
                g(r, c) += lambda * w(r, c);
            }
    };
    for (std::size_t li = 0; li < net.depth(); ++li)
        for (std::size_t bi = 0; bi < net.levels[li].blocks.size(); ++bi)
            add_l2(net.levels[li].blocks[bi].in_weights, obj.gradient.level_grads[li][bi], 0, 0);

    if (mask_skip) {
        for (std::size_t r = 0; r < obj.gradient.out_grad.rows(); ++r)
            for (std::size_t c = 1; c <= net.d; ++c) obj.gradient.out_grad(r, c) = 0.0;
        add_l2(net.out_weights, obj.gradient.out_grad, 1, 1 + net.d);
    } else {
        add_l2(net.out_weights, obj.gradient.out_grad, 0, 0);
    }
    return obj;
}

TrainResult train_bpmll_baseline(const MultiLabelDataset& ds, double hidden_fraction,
                                 const TrainConfig& config) {
    config.validate();
    ds.validate();
    if (!(hidden_fraction > 0.0)) throw InvalidArgument("baseline: hidden_fraction must be > 0");
    const std::size_t d = ds.inputs();
    const std::size_t q = ds.labels();
    if (q < 2) throw InvalidArgument("baseline: need at least two labels");
    const auto hidden =
        static_cast<std::size_t>(std::ceil(hidden_fraction * static_cast<double>(d)));

    Rng rng(derive_seed(config.seed, kBaselineStream));
    CascadeNetwork net;
    net.d = d;
    net.q = q;
    net.levels.emplace_back(Activation::Tanh,
                            rand_matrix(rng, hidden, d + 1, -config.init_range, config.init_range));
    net.out_weights = rand_matrix(rng, q, 1 + d + hidden, -config.init_range, config.init_range);
    // No input-to-output connections in this architecture.
    for (std::size_t r = 0; r < q; ++r)
        for (std::size_t c = 1; c <= d; ++c) net.out_weights(r, c) = 0.0;

    Standardizer scaler;
    if (config.standardize) scaler = Standardizer::fit(ds.x);
    const Matrix x = scaler.apply(ds.x);
    const Matrix t = to_bipolar(ds.y);

    std::vector<Matrix> weights{net.levels[0].blocks[0].in_weights, net.out_weights};
    auto state = irprop_init_like(weights, config.irprop);
    std::vector<Matrix> grads(2);

    TrainResult result;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t epoch = 0;; ++epoch) {
        net.levels[0].blocks[0].in_weights = weights[0];
        net.out_weights = weights[1];
        auto obj = ranking_objective(net, x, t, config.lambda, true);
        const auto loss = bpmll_loss(forward(net, x).output, t);
        result.log.epochs.push_back({Phase::One, 0, epoch, loss.mean(), nan});
        if (epoch == config.baseline_epoch_cap) break;
        grads[0] = std::move(obj.gradient.level_grads[0][0]);
        grads[1] = std::move(obj.gradient.out_grad);
        irprop_step(weights, grads, state);
    }

    result.model.net = std::move(net);
    result.model.input_scaling = std::move(scaler);
    return result;
}

}  // namespace cascademl
