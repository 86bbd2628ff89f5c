#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cascademl/activation.hpp"
#include "cascademl/dataset.hpp"
#include "cascademl/matrix.hpp"
#include "cascademl/rng.hpp"

namespace cascademl {

/// Units sharing one activation inside a level. in_weights is
/// (units x fan_in); column 0 multiplies the constant bias input.
struct UnitBlock {
    Activation activation = Activation::Tanh;
    Matrix in_weights;

    std::size_t units() const noexcept { return in_weights.rows(); }
    std::size_t fan_in() const noexcept { return in_weights.cols(); }
};

/// One depth position of the cascade. A level starts as a single block and
/// grows in breadth when sibling units join; every block reads the same
/// inputs [1, x, outputs of all shallower levels].
struct HiddenLevel {
    std::vector<UnitBlock> blocks;

    HiddenLevel() = default;
    HiddenLevel(Activation activation, Matrix in_weights) {
        blocks.push_back({activation, std::move(in_weights)});
    }

    std::size_t units() const noexcept;
    std::size_t fan_in() const noexcept { return blocks.empty() ? 0 : blocks.front().fan_in(); }
    /// The shared activation, or nullopt when sibling blocks differ.
    std::optional<Activation> uniform_activation() const noexcept;
};

/// Cascade network with skip connections. Output unit j computes
/// tanh(out_weights.row(j) . [1, x, h_1 .. h_L]).
struct CascadeNetwork {
    std::size_t d = 0;
    std::size_t q = 0;
    std::vector<HiddenLevel> levels;
    Matrix out_weights;  // q x (1 + d + hidden_units())
    Activation output_activation = Activation::Tanh;

    std::size_t depth() const noexcept { return levels.size(); }
    std::size_t hidden_units() const noexcept;
    /// Inputs seen by a level placed at `level_index`: 1 + d + units of all
    /// levels before it.
    std::size_t fan_in_at(std::size_t level_index) const noexcept;
    /// (d+1)q + sum units*fan_in + q*sum units.
    std::size_t parameter_count() const noexcept;

    friend bool operator==(const CascadeNetwork&, const CascadeNetwork&);
};

/// Values computed by one forward pass.
struct ForwardTrace {
    /// n x (1 + d + hidden units): bias column, inputs, then every hidden
    /// unit in level order. Level i reads the leading fan_in_at(i) columns.
    Matrix layer_inputs;
    std::vector<Matrix> hidden_outputs;  // per level, n x units
    Matrix output_pre;                   // n x q
    Matrix output;                       // n x q, tanh(output_pre)
};

/// Zero-depth network with out_weights ~ U[-init_range, init_range].
CascadeNetwork new_perceptron(std::size_t d, std::size_t q, Rng& rng, double init_range = 0.5);

ForwardTrace forward(const CascadeNetwork& net, const Matrix& x);
/// 1 where the output score is > 0, else 0.
Matrix predict_labels(const CascadeNetwork& net, const Matrix& x);
Matrix threshold_scores(const Matrix& scores);

/// Adds a trained level. A successor is appended as a new depth position;
/// a sibling's blocks join the deepest level. In both cases out_weights
/// gains level.units() trailing columns set to -out_block.
CascadeNetwork install_level(const CascadeNetwork& net, const HiddenLevel& level,
                             const Matrix& out_block, bool as_sibling);

/// Gradients of a loss w.r.t. every weight, given dLoss/d(output) (n x q).
struct NetworkGradient {
    /// grads[level][block], same shapes as in_weights.
    std::vector<std::vector<Matrix>> level_grads;
    Matrix out_grad;
};
NetworkGradient backpropagate(const CascadeNetwork& net, const ForwardTrace& trace,
                              const Matrix& d_output);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json serialize(const CascadeNetwork& net);
/// Throws ParseError on a version mismatch or inconsistent shapes.
CascadeNetwork deserialize(const nlohmann::json& doc);

/// A network plus the input standardization it was trained with.
struct Model {
    CascadeNetwork net;
    Standardizer input_scaling;

    ForwardTrace forward(const Matrix& raw_x) const;
    Matrix predict(const Matrix& raw_x) const;
};

nlohmann::json serialize(const Model& model);
Model deserialize_model(const nlohmann::json& doc);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace cascademl
