#include <cmath>
#include <limits>

#include "cascademl/error.hpp"
#include "cascademl/irprop.hpp"
#include "cascademl/loss.hpp"
#include "cascademl/parallel.hpp"
#include "cascademl/trainer.hpp"

namespace cascademl {

namespace {

// Streams under a candidate's own seed.
constexpr std::uint64_t kWidthStream = 0;
constexpr std::uint64_t kWeightStream = 1;

Matrix hidden_forward(const Matrix& inputs, const Matrix& in_weights, Activation act) {
    Matrix h = matmul_nt(inputs, in_weights);
    apply_activation_inplace(h, act);
    return h;
}

}  // namespace

CandidateContext make_candidate_context(const CascadeNetwork& net, const TrainingData& data) {
    CandidateContext ctx;
    ctx.train_trace = forward(net, data.x_train);
    ctx.val_trace = forward(net, data.x_val);
    ctx.train_residuals = residual_targets(ctx.train_trace, data.t_train);
    ctx.val_residuals = residual_targets(ctx.val_trace, data.t_val);
    ctx.depth = net.depth();
    ctx.successor_fan_in = net.fan_in_at(net.depth());
    ctx.sibling_fan_in = net.depth() == 0 ? 0 : net.fan_in_at(net.depth() - 1);
    return ctx;
}

std::vector<CandidateSpec> build_candidate_pool(std::size_t depth, std::size_t d,
                                                const TrainConfig& config, std::uint64_t pool_seed) {
    config.validate();
    std::vector<CandidateKind> kinds{CandidateKind::Successor};
    if (depth > 0) kinds.push_back(CandidateKind::Sibling);

    std::vector<CandidateSpec> pool;
    for (auto kind : kinds)
        for (auto act : config.activations)
            for (std::size_t k = 0; k < config.pool_per_combo; ++k) {
                CandidateSpec spec;
                spec.kind = kind;
                spec.activation = act;
                spec.seed = derive_seed(pool_seed, pool.size());
                Rng width_rng(derive_seed(spec.seed, kWidthStream));
                const double u = width_rng.uniform_open_closed() * config.width_fraction_max;
                spec.units = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil(u * static_cast<double>(d))));
                pool.push_back(spec);
            }
    return pool;
}

CandidateResult train_candidate(const CandidateSpec& spec, const CandidateContext& ctx,
                                const TrainConfig& config, std::vector<EpochRecord>* epoch_log) {
    if (spec.units == 0) throw InvalidArgument("train_candidate: candidate has no units");
    if (spec.kind == CandidateKind::Sibling && ctx.depth == 0)
        throw InvalidArgument("train_candidate: sibling candidate needs a network with a hidden level");
    const std::size_t fan_in =
        spec.kind == CandidateKind::Successor ? ctx.successor_fan_in : ctx.sibling_fan_in;
    const std::size_t q = ctx.train_residuals.cols();

    const Matrix in_train = column_block(ctx.train_trace.layer_inputs, 0, fan_in);
    const Matrix in_val = column_block(ctx.val_trace.layer_inputs, 0, fan_in);
    const Matrix& r_train = ctx.train_residuals;
    const Matrix& r_val = ctx.val_residuals;

    Rng rng(derive_seed(spec.seed, kWeightStream));
    std::vector<Matrix> weights;
    weights.push_back(rand_matrix(rng, spec.units, fan_in, -config.init_range, config.init_range));
    weights.push_back(rand_matrix(rng, q, spec.units, -config.init_range, config.init_range));
    auto state = irprop_init_like(weights, config.irprop);
    StopWindow window(config.stop_window);

    CandidateResult result;
    result.spec = spec;
    std::vector<Matrix> best = weights;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Matrix> grads(2);

    for (std::size_t epoch = 0;; ++epoch) {
        const Matrix& v = weights[0];
        const Matrix& u = weights[1];
        const Matrix h = hidden_forward(in_train, v, spec.activation);
        const Matrix out = matmul_nt(h, u);
        const double train_mse = mse_loss(out, r_train);
        const double val_mse =
            mse_loss(matmul_nt(hidden_forward(in_val, v, spec.activation), u), r_val);

        if (epoch_log) epoch_log->push_back({Phase::Two, 0, epoch, train_mse, val_mse});
        if (epoch == 0) result.initial_val_mse = val_mse;
        if (val_mse < best_val) {
            best_val = val_mse;
            best = weights;
        }
        result.epochs = epoch;
        if (epoch == config.phase_epoch_cap || window.should_stop(val_mse)) break;

        const Matrix d_out = mse_gradient(out, r_train);
        grads[1] = matmul_tn(d_out, h);
        Matrix d_hidden = matmul(d_out, u);
        {
            auto dh = d_hidden.data();
            auto hv = h.data();
            for (std::size_t i = 0; i < dh.size(); ++i)
                dh[i] *= activation_slope(hv[i], spec.activation);
        }
        grads[0] = matmul_tn(d_hidden, in_train);
        if (config.lambda > 0) {
            for (std::size_t r = 0; r < grads[0].rows(); ++r)
                for (std::size_t c = 1; c < grads[0].cols(); ++c)
                    grads[0](r, c) += config.lambda * v(r, c);
            auto gu = grads[1].data();
            auto ud = u.data();
            for (std::size_t i = 0; i < gu.size(); ++i) gu[i] += config.lambda * ud[i];
        }
        irprop_step(weights, grads, state);
    }

    result.in_weights = std::move(best[0]);
    result.out_block = std::move(best[1]);
    result.val_mse = best_val;
    return result;
}

PhaseTwoResult select_best(std::vector<CandidateSpec> specs, const CandidateContext& ctx,
                           const TrainConfig& config) {
    if (specs.empty()) throw InvalidArgument("phase2: candidate pool is empty");
    PhaseTwoResult out;
    out.pool.resize(specs.size());
    std::vector<std::vector<EpochRecord>> logs(specs.size());
    parallel_for(specs.size(), config.jobs, [&](std::size_t i) {
        out.pool[i] = train_candidate(specs[i], ctx, config, &logs[i]);
    });
    for (std::size_t i = 1; i < out.pool.size(); ++i)
        if (out.pool[i].val_mse < out.pool[out.best_index].val_mse) out.best_index = i;
    out.best = out.pool[out.best_index];
    out.best_epochs = std::move(logs[out.best_index]);
    return out;
}

PhaseTwoResult phase2(const CascadeNetwork& net, const TrainingData& data, const TrainConfig& config,
                      std::uint64_t pool_seed) {
    const auto ctx = make_candidate_context(net, data);
    return select_best(build_candidate_pool(net.depth(), net.d, config, pool_seed), ctx, config);
}

}  // namespace cascademl
