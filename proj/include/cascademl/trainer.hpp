#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cascademl/cascade_net.hpp"
#include "cascademl/config.hpp"
#include "cascademl/dataset.hpp"

namespace cascademl {

enum class CandidateKind { Successor, Sibling };

std::string_view to_string(CandidateKind kind) noexcept;

struct CandidateSpec {
    CandidateKind kind = CandidateKind::Successor;
    Activation activation = Activation::Tanh;
    std::size_t units = 1;
    std::uint64_t seed = 0;

    friend bool operator==(const CandidateSpec&, const CandidateSpec&) = default;
};

struct CandidateResult {
    CandidateSpec spec;
    Matrix in_weights;  // units x fan_in
    Matrix out_block;   // q x units; linear output, no bias
    double val_mse = 0.0;
    /// Residual MSE on the validation rows before any training step.
    double initial_val_mse = 0.0;
    std::size_t epochs = 0;
};

enum class Phase { One = 1, Two = 2 };

struct EpochRecord {
    Phase phase = Phase::One;
    std::size_t growth_iter = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct IterationRecord {
    std::size_t growth_iter = 0;
    CandidateSpec chosen;
    double val_before = 0.0;
    /// Whole-network validation loss right after installing, before Phase I.
    double val_install = 0.0;
    double val_after = 0.0;
    bool accepted = false;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Phase I losses are the pairwise ranking loss averaged over effective
/// instances; Phase II losses are the candidate's residual MSE.
struct GrowthLog {
    std::vector<EpochRecord> epochs;
    std::vector<IterationRecord> iterations;

    friend bool operator==(const GrowthLog&, const GrowthLog&) = default;
};

/// `phase,growth_iter,epoch,train_loss,val_loss`, six decimals.
void write_epoch_csv(const GrowthLog& log, std::ostream& out);
/// `growth_iter,kind,activation,units,val_before,val_after,accepted`.
void write_iteration_csv(const GrowthLog& log, std::ostream& out);

/// Standardized inputs and bipolar targets for the fitting and validation
/// parts of a training set.
struct TrainingData {
    Matrix x_train;
    Matrix t_train;
    Matrix x_val;
    Matrix t_val;
};

/// Carves the validation part off `ds` and standardizes with statistics of
/// the full `ds` when requested. Returns the data and the fitted scaling.
std::pair<TrainingData, Standardizer> prepare_training_data(const MultiLabelDataset& ds,
                                                             const TrainConfig& config);

struct PhaseOneResult {
    CascadeNetwork net;
    double best_val_loss = 0.0;
    double initial_val_loss = 0.0;
    std::size_t epochs = 0;
};

/// Trains only out_weights on the ranking loss + L2 with iRProp-, early
/// stopping on validation loss. Returns the lowest-validation-loss snapshot.
PhaseOneResult phase1(const CascadeNetwork& net, const TrainingData& data, const TrainConfig& config,
                      std::size_t growth_iter = 0, GrowthLog* log = nullptr);

/// c - t on post-activation outputs.
Matrix residual_targets(const CascadeNetwork& net, const Matrix& x, const Matrix& bipolar_targets);
Matrix residual_targets(const ForwardTrace& trace, const Matrix& bipolar_targets);

/// Frozen inputs shared by every candidate of one growth iteration.
struct CandidateContext {
    ForwardTrace train_trace;
    ForwardTrace val_trace;
    Matrix train_residuals;
    Matrix val_residuals;
    std::size_t depth = 0;
    /// Fan-in for successor and sibling candidates.
    std::size_t successor_fan_in = 0;
    std::size_t sibling_fan_in = 0;
};

CandidateContext make_candidate_context(const CascadeNetwork& net, const TrainingData& data);

/// Trains one candidate layer (spec.activation units feeding q linear
/// outputs) to predict the residuals with MSE + L2 and iRProp-.
/// `epoch_log`, when given, receives the per-epoch losses.
CandidateResult train_candidate(const CandidateSpec& spec, const CandidateContext& ctx,
                                const TrainConfig& config,
                                std::vector<EpochRecord>* epoch_log = nullptr);

/// Pool for one iteration: pool_per_combo per (kind, activation), siblings
/// only when depth >= 1. Widths and seeds derive from `pool_seed`.
std::vector<CandidateSpec> build_candidate_pool(std::size_t depth, std::size_t d,
                                                const TrainConfig& config, std::uint64_t pool_seed);

struct PhaseTwoResult {
    CandidateResult best;
    std::size_t best_index = 0;
    std::vector<CandidateResult> pool;
    std::vector<EpochRecord> best_epochs;
};

/// Trains every candidate (in parallel up to config.jobs) and returns the
/// lowest validation MSE, ties to the lowest pool index.
PhaseTwoResult phase2(const CascadeNetwork& net, const TrainingData& data, const TrainConfig& config,
                      std::uint64_t pool_seed);
PhaseTwoResult select_best(std::vector<CandidateSpec> specs, const CandidateContext& ctx,
                           const TrainConfig& config);

HiddenLevel to_level(const CandidateResult& candidate);

struct TrainResult {
    Model model;
    GrowthLog log;
};

/// Full growth run: Phase I on the perceptron, then Phase II / install /
/// Phase I until a growth step raises validation loss or the iteration cap
/// is hit. The returned network always comes from a completed Phase I.
TrainResult train_cascademl(const MultiLabelDataset& data, const TrainConfig& config);

/// One tanh hidden layer of ceil(hidden_fraction * d) units and no
/// input-to-output connections, all weights trained jointly on the ranking
/// loss + L2 for config.baseline_epoch_cap epochs.
TrainResult train_bpmll_baseline(const MultiLabelDataset& data, double hidden_fraction,
                                 const TrainConfig& config);

/// Objective used by the baseline: ranking loss plus L2 over non-bias
/// weights, with the gradient routed through the full network. The
/// input-to-output block is excluded when `mask_skip` is set.
struct NetworkObjective {
    double value = 0.0;
    NetworkGradient gradient;
};
NetworkObjective ranking_objective(const CascadeNetwork& net, const Matrix& x,
                                   const Matrix& bipolar_targets, double lambda, bool mask_skip);

}  // namespace cascademl
