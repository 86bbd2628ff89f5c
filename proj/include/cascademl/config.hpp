#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cascademl/activation.hpp"
#include "cascademl/irprop.hpp"

namespace cascademl {

/// Every knob of a training run. Defaults are the reference configuration;
/// nothing here is meant to be tuned per dataset.
struct TrainConfig {
    // Candidate pool: pool_per_combo candidates for each (kind, activation).
    std::size_t pool_per_combo = 2;
    std::vector<Activation> activations{kAllActivations.begin(), kAllActivations.end()};
    /// Candidate width is ceil(u * d) with u ~ U(0, width_fraction_max].
    double width_fraction_max = 1.0;

    std::size_t max_growth_iterations = 20;
    std::size_t phase_epoch_cap = 2000;
    std::size_t stop_window = 20;
    double lambda = 1e-5;
    double validation_fraction = 0.2;
    bool standardize = true;
    double init_range = 0.5;
    IRpropParams irprop;

    // Fixed-architecture baseline.
    std::size_t baseline_epoch_cap = 10000;
    double hidden_fraction = 0.2;

    std::uint64_t seed = 1;
    /// Worker threads for candidate and fold training. Results never depend
    /// on this value.
    std::size_t jobs = 1;

    /// Pool size at a given depth (siblings need an existing level).
    std::size_t pool_size(std::size_t depth) const noexcept;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Applies one `key = value` setting. Keys are the field names above;
/// `activations` takes a comma list, `irprop.*` the optimizer constants.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

/// Flat key-value document: one `key = value` per line, `#` comments,
/// optional quotes around values, optional `[section]` headers ignored.
void apply_config_text(TrainConfig& config, std::string_view text);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& doc);

}  // namespace cascademl
