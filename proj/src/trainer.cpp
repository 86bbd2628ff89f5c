#include "cascademl/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "cascademl/error.hpp"
#include "cascademl/irprop.hpp"
#include "cascademl/loss.hpp"

namespace cascademl {

namespace {

// Stream indices for derive_seed(config.seed, ...).
constexpr std::uint64_t kValidationStream = 1;
constexpr std::uint64_t kPerceptronStream = 2;
constexpr std::uint64_t kPoolStream = 3;

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string_view to_string(CandidateKind kind) noexcept {
    return kind == CandidateKind::Successor ? "successor" : "sibling";
}

void write_epoch_csv(const GrowthLog& log, std::ostream& out) {
    out << "phase,growth_iter,epoch,train_loss,val_loss\n";
    for (const auto& e : log.epochs)
        out << static_cast<int>(e.phase) << ',' << e.growth_iter << ',' << e.epoch << ','
            << fixed6(e.train_loss) << ',' << fixed6(e.val_loss) << '\n';
}

void write_iteration_csv(const GrowthLog& log, std::ostream& out) {
    out << "growth_iter,kind,activation,units,val_before,val_after,accepted\n";
    for (const auto& it : log.iterations)
        out << it.growth_iter << ',' << to_string(it.chosen.kind) << ','
            << to_string(it.chosen.activation) << ',' << it.chosen.units << ','
            << fixed6(it.val_before) << ',' << fixed6(it.val_after) << ','
            << (it.accepted ? 1 : 0) << '\n';
}

std::pair<TrainingData, Standardizer> prepare_training_data(const MultiLabelDataset& ds,
                                                             const TrainConfig& config) {
    ds.validate();
    std::vector<std::size_t> all(ds.instances());
    std::iota(all.begin(), all.end(), 0);
    const auto [train_rows, val_rows] =
        split_validation(all, config.validation_fraction, derive_seed(config.seed, kValidationStream));

    Standardizer scaler;
    if (config.standardize) scaler = Standardizer::fit(ds.x);
    const Matrix bipolar = to_bipolar(ds.y);

    TrainingData data;
    data.x_train = scaler.apply(select_rows(ds.x, train_rows));
    data.t_train = select_rows(bipolar, train_rows);
    data.x_val = scaler.apply(select_rows(ds.x, val_rows));
    data.t_val = select_rows(bipolar, val_rows);
    return {std::move(data), std::move(scaler)};
}

PhaseOneResult phase1(const CascadeNetwork& net, const TrainingData& data, const TrainConfig& config,
                      std::size_t growth_iter, GrowthLog* log) {
    if (data.x_train.cols() != net.d || data.t_train.cols() != net.q)
        throw DimensionError("phase1: data " + data.x_train.shape_string() + " / " +
                             data.t_train.shape_string() + " does not fit network d=" +
                             std::to_string(net.d) + ", q=" + std::to_string(net.q));
    // Hidden activations are frozen in this phase, so the output layer's
    // inputs are computed once.
    const Matrix a_train = forward(net, data.x_train).layer_inputs;
    const Matrix a_val = forward(net, data.x_val).layer_inputs;

    Matrix weights = net.out_weights;
    auto state = irprop_init_like(std::span<const Matrix>(&weights, 1), config.irprop);
    StopWindow window(config.stop_window);

    PhaseOneResult result;
    Matrix best = weights;
    double best_val = std::numeric_limits<double>::infinity();
    Matrix d_out;

    for (std::size_t epoch = 0;; ++epoch) {
        Matrix out_train = matmul_nt(a_train, weights);
        apply_activation_inplace(out_train, net.output_activation);
        const auto train_loss = bpmll_loss_and_gradient(out_train, data.t_train, d_out);

        Matrix out_val = matmul_nt(a_val, weights);
        apply_activation_inplace(out_val, net.output_activation);
        const double val_loss = bpmll_loss(out_val, data.t_val).mean();

        if (log) log->epochs.push_back({Phase::One, growth_iter, epoch, train_loss.mean(), val_loss});
        if (epoch == 0) result.initial_val_loss = val_loss;
        if (val_loss < best_val) {
            best_val = val_loss;
            best = weights;
        }
        result.epochs = epoch;
        if (epoch == config.phase_epoch_cap || window.should_stop(val_loss)) break;

        // d/d(pre-activation), then weight gradient plus L2 off the bias column.
        auto dd = d_out.data();
        auto od = out_train.data();
        for (std::size_t i = 0; i < dd.size(); ++i)
            dd[i] *= activation_slope(od[i], net.output_activation);
        Matrix grad = matmul_tn(d_out, a_train);
        if (config.lambda > 0)
            for (std::size_t r = 0; r < grad.rows(); ++r)
                for (std::size_t c = 1; c < grad.cols(); ++c)
                    grad(r, c) += config.lambda * weights(r, c);
        irprop_step(std::span<Matrix>(&weights, 1), std::span<const Matrix>(&grad, 1), state);
    }

    result.net = net;
    result.net.out_weights = std::move(best);
    result.best_val_loss = best_val;
    return result;
}

Matrix residual_targets(const ForwardTrace& trace, const Matrix& bipolar_targets) {
    return subtract(trace.output, bipolar_targets);
}

Matrix residual_targets(const CascadeNetwork& net, const Matrix& x, const Matrix& bipolar_targets) {
    return residual_targets(forward(net, x), bipolar_targets);
}

HiddenLevel to_level(const CandidateResult& candidate) {
    return HiddenLevel(candidate.spec.activation, candidate.in_weights);
}

TrainResult train_cascademl(const MultiLabelDataset& ds, const TrainConfig& config) {
    config.validate();
    auto [data, scaler] = prepare_training_data(ds, config);

    Rng init_rng(derive_seed(config.seed, kPerceptronStream));
    TrainResult result;
    auto& log = result.log;

    auto first = phase1(new_perceptron(ds.inputs(), ds.labels(), init_rng, config.init_range), data,
                        config, 0, &log);
    CascadeNetwork net = std::move(first.net);
    double val_before = first.best_val_loss;

    const std::uint64_t pool_root = derive_seed(config.seed, kPoolStream);
    for (std::size_t g = 1; g <= config.max_growth_iterations; ++g) {
        auto p2 = phase2(net, data, config, derive_seed(pool_root, g));
        for (auto e : p2.best_epochs) {
            e.growth_iter = g;
            log.epochs.push_back(e);
        }
        const auto& best = p2.best;
        const bool sibling = best.spec.kind == CandidateKind::Sibling;
        const auto tentative = install_level(net, to_level(best), best.out_block, sibling);
        auto p1 = phase1(tentative, data, config, g, &log);

        IterationRecord rec;
        rec.growth_iter = g;
        rec.chosen = best.spec;
        rec.val_before = val_before;
        rec.val_install = p1.initial_val_loss;
        rec.val_after = p1.best_val_loss;
        rec.accepted = p1.best_val_loss <= val_before;
        log.iterations.push_back(rec);
        if (!rec.accepted) break;  // keep the pre-growth network
        net = std::move(p1.net);
        val_before = p1.best_val_loss;
    }

    result.model.net = std::move(net);
    result.model.input_scaling = std::move(scaler);
    return result;
}

}  // namespace cascademl
