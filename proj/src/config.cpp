#include "cascademl/config.hpp"

#include <charconv>
#include <cmath>

#include "text_util.hpp"

namespace cascademl {

std::size_t TrainConfig::pool_size(std::size_t depth) const noexcept {
    const std::size_t kinds = depth == 0 ? 1 : 2;
    return pool_per_combo * kinds * activations.size();
}

void TrainConfig::validate() const {
    if (pool_per_combo == 0) throw ConfigError("pool_per_combo must be at least 1");
    if (activations.empty()) throw ConfigError("activations must name at least one function");
    if (!(width_fraction_max > 0.0 && width_fraction_max <= 1.0))
        throw ConfigError("width_fraction_max must lie in (0, 1]");
    if (phase_epoch_cap == 0) throw ConfigError("phase_epoch_cap must be at least 1");
    if (stop_window == 0) throw ConfigError("stop_window must be at least 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ConfigError("validation_fraction must lie in (0, 1)");
    if (!(init_range >= 0.0)) throw ConfigError("init_range must be >= 0");
    if (!(hidden_fraction > 0.0)) throw ConfigError("hidden_fraction must be > 0");
    if (baseline_epoch_cap == 0) throw ConfigError("baseline_epoch_cap must be at least 1");
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
    const auto& p = irprop;
    if (!(p.eta_minus > 0.0 && p.eta_minus < 1.0 && p.eta_plus > 1.0))
        throw ConfigError("irprop factors must satisfy 0 < eta_minus < 1 < eta_plus");
    if (!(p.delta_min > 0.0 && p.delta_min <= p.delta0 && p.delta0 <= p.delta_max))
        throw ConfigError("irprop steps must satisfy 0 < delta_min <= delta0 <= delta_max");
}

namespace {

std::string unquote_value(std::string_view v) {
    v = detail::trim(v);
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        v = v.substr(1, v.size() - 2);
    return std::string(v);
}

double as_double(std::string_view key, const std::string& v) {
    const auto parsed = detail::parse_double(v);
    if (!parsed || !std::isfinite(*parsed))
        throw ConfigError("config key '" + std::string(key) + "': '" + v + "' is not a number");
    return *parsed;
}

std::uint64_t as_unsigned(std::string_view key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config key '" + std::string(key) + "': '" + v +
                          "' is not a non-negative integer");
    return out;
}

bool as_bool(std::string_view key, const std::string& v) {
    const auto l = detail::lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw ConfigError("config key '" + std::string(key) + "': '" + v + "' is not a boolean");
}

std::vector<Activation> as_activations(std::string_view key, const std::string& v) {
    std::vector<Activation> out;
    std::string_view rest = v;
    if (rest.size() >= 2 && rest.front() == '[' && rest.back() == ']')
        rest = rest.substr(1, rest.size() - 2);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = unquote_value(rest.substr(0, comma));
        const auto a = parse_activation(detail::lower(item));
        if (!a)
            throw ConfigError("config key '" + std::string(key) + "': unknown activation '" +
                              item + "'");
        out.push_back(*a);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

}  // namespace

void set_config_value(TrainConfig& c, std::string_view raw_key, std::string_view raw_value) {
    std::string key(detail::trim(raw_key));
    for (char& ch : key)
        if (ch == '-') ch = '_';
    const std::string v = unquote_value(raw_value);

    if (key == "pool_per_combo") c.pool_per_combo = as_unsigned(key, v);
    else if (key == "activations") c.activations = as_activations(key, v);
    else if (key == "width_fraction_max") c.width_fraction_max = as_double(key, v);
    else if (key == "max_growth_iterations" || key == "max_growth") c.max_growth_iterations = as_unsigned(key, v);
    else if (key == "phase_epoch_cap") c.phase_epoch_cap = as_unsigned(key, v);
    else if (key == "stop_window") c.stop_window = as_unsigned(key, v);
    else if (key == "lambda") c.lambda = as_double(key, v);
    else if (key == "validation_fraction") c.validation_fraction = as_double(key, v);
    else if (key == "standardize") c.standardize = as_bool(key, v);
    else if (key == "init_range") c.init_range = as_double(key, v);
    else if (key == "baseline_epoch_cap") c.baseline_epoch_cap = as_unsigned(key, v);
    else if (key == "hidden_fraction") c.hidden_fraction = as_double(key, v);
    else if (key == "seed") c.seed = as_unsigned(key, v);
    else if (key == "jobs") c.jobs = as_unsigned(key, v);
    else if (key == "irprop.eta_plus") c.irprop.eta_plus = as_double(key, v);
    else if (key == "irprop.eta_minus") c.irprop.eta_minus = as_double(key, v);
    else if (key == "irprop.delta0") c.irprop.delta0 = as_double(key, v);
    else if (key == "irprop.delta_min") c.irprop.delta_min = as_double(key, v);
    else if (key == "irprop.delta_max") c.irprop.delta_max = as_double(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(TrainConfig& config, std::string_view text) {
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            set_config_value(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

nlohmann::json to_json(const TrainConfig& c) {
    std::vector<std::string> acts;
    for (auto a : c.activations) acts.emplace_back(to_string(a));
    return {{"pool_per_combo", c.pool_per_combo},
            {"activations", acts},
            {"width_fraction_max", c.width_fraction_max},
            {"max_growth_iterations", c.max_growth_iterations},
            {"phase_epoch_cap", c.phase_epoch_cap},
            {"stop_window", c.stop_window},
            {"lambda", c.lambda},
            {"validation_fraction", c.validation_fraction},
            {"standardize", c.standardize},
            {"init_range", c.init_range},
            {"baseline_epoch_cap", c.baseline_epoch_cap},
            {"hidden_fraction", c.hidden_fraction},
            {"seed", c.seed},
            {"jobs", c.jobs},
            {"irprop",
             {{"eta_plus", c.irprop.eta_plus},
              {"eta_minus", c.irprop.eta_minus},
              {"delta0", c.irprop.delta0},
              {"delta_min", c.irprop.delta_min},
              {"delta_max", c.irprop.delta_max}}}};
}

TrainConfig config_from_json(const nlohmann::json& doc) {
    TrainConfig c;
    try {
        c.pool_per_combo = doc.value("pool_per_combo", c.pool_per_combo);
        if (doc.contains("activations")) {
            c.activations.clear();
            for (const auto& name : doc.at("activations")) {
                const auto a = parse_activation(name.get<std::string>());
                if (!a) throw ConfigError("unknown activation '" + name.get<std::string>() + "'");
                c.activations.push_back(*a);
            }
        }
        c.width_fraction_max = doc.value("width_fraction_max", c.width_fraction_max);
        c.max_growth_iterations = doc.value("max_growth_iterations", c.max_growth_iterations);
        c.phase_epoch_cap = doc.value("phase_epoch_cap", c.phase_epoch_cap);
        c.stop_window = doc.value("stop_window", c.stop_window);
        c.lambda = doc.value("lambda", c.lambda);
        c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
        c.standardize = doc.value("standardize", c.standardize);
        c.init_range = doc.value("init_range", c.init_range);
        c.baseline_epoch_cap = doc.value("baseline_epoch_cap", c.baseline_epoch_cap);
        c.hidden_fraction = doc.value("hidden_fraction", c.hidden_fraction);
        c.seed = doc.value("seed", c.seed);
        c.jobs = doc.value("jobs", c.jobs);
        if (doc.contains("irprop")) {
            const auto& p = doc.at("irprop");
            c.irprop.eta_plus = p.value("eta_plus", c.irprop.eta_plus);
            c.irprop.eta_minus = p.value("eta_minus", c.irprop.eta_minus);
            c.irprop.delta0 = p.value("delta0", c.irprop.delta0);
            c.irprop.delta_min = p.value("delta_min", c.irprop.delta_min);
            c.irprop.delta_max = p.value("delta_max", c.irprop.delta_max);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config document: ") + e.what());
    }
    return c;
}

}  // namespace cascademl
