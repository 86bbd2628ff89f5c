#include <fstream>

#include "cascademl/cascade_net.hpp"
#include "cascademl/error.hpp"
#include "text_util.hpp"

namespace cascademl {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const std::string& what) {
    if (!j.is_array() || j.size() != rows)
        throw ParseError(ParseError::Kind::Syntax,
                         what + ": expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != cols)
            throw ParseError(ParseError::Kind::Syntax, what + ": row " + std::to_string(r) +
                                                           " does not have " +
                                                           std::to_string(cols) + " entries");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ParseError(ParseError::Kind::NonNumeric,
                                 what + ": non-numeric entry at (" + std::to_string(r) + ", " +
                                     std::to_string(c) + ")");
            m(r, c) = row[c].get<double>();
        }
    }
    return m;
}

template <typename T>
T required(const json& doc, const char* key) {
    if (!doc.contains(key))
        throw ParseError(ParseError::Kind::Syntax, std::string("model document lacks '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(ParseError::Kind::Syntax,
                         std::string("model field '") + key + "' has the wrong type: " + e.what());
    }
}

Activation activation_from(const std::string& name) {
    const auto a = parse_activation(name);
    if (!a) throw ParseError(ParseError::Kind::Unsupported, "unknown activation '" + name + "'");
    return *a;
}

}  // namespace

json serialize(const CascadeNetwork& net) {
    json doc;
    doc["version"] = kModelFormatVersion;
    doc["d"] = net.d;
    doc["q"] = net.q;
    doc["output_activation"] = std::string(to_string(net.output_activation));
    json levels = json::array();
    for (std::size_t i = 0; i < net.levels.size(); ++i) {
        const auto& level = net.levels[i];
        json lj;
        lj["units"] = level.units();
        lj["fan_in"] = net.fan_in_at(i);
        const auto uniform = level.uniform_activation();
        lj["activation"] = uniform ? std::string(to_string(*uniform)) : std::string("mixed");
        json blocks = json::array();
        for (const auto& b : level.blocks)
            blocks.push_back({{"units", b.units()},
                              {"activation", std::string(to_string(b.activation))},
                              {"in_weights", matrix_to_json(b.in_weights)}});
        lj["blocks"] = std::move(blocks);
        levels.push_back(std::move(lj));
    }
    doc["levels"] = std::move(levels);
    doc["out_weights"] = matrix_to_json(net.out_weights);
    return doc;
}

CascadeNetwork deserialize(const json& doc) {
    if (!doc.is_object()) throw ParseError(ParseError::Kind::Syntax, "model document is not an object");
    const int version = required<int>(doc, "version");
    if (version != kModelFormatVersion)
        throw ParseError(ParseError::Kind::Unsupported,
                         "model format version " + std::to_string(version) + ", expected " +
                             std::to_string(kModelFormatVersion));
    CascadeNetwork net;
    net.d = required<std::size_t>(doc, "d");
    net.q = required<std::size_t>(doc, "q");
    if (net.d < 1 || net.q < 1)
        throw ParseError(ParseError::Kind::Syntax, "model dimensions must be positive");
    if (doc.contains("output_activation"))
        net.output_activation = activation_from(required<std::string>(doc, "output_activation"));

    const auto levels = required<json>(doc, "levels");
    if (!levels.is_array()) throw ParseError(ParseError::Kind::Syntax, "'levels' is not an array");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& lj = levels[i];
        const std::string where = "level " + std::to_string(i);
        const std::size_t fan_in = net.fan_in_at(i);
        if (lj.contains("fan_in") && required<std::size_t>(lj, "fan_in") != fan_in)
            throw ParseError(ParseError::Kind::Syntax,
                             where + ": recorded fan_in " + lj["fan_in"].dump() + ", position has " +
                                 std::to_string(fan_in));
        const auto blocks = required<json>(lj, "blocks");
        if (!blocks.is_array() || blocks.empty())
            throw ParseError(ParseError::Kind::Syntax, where + ": no unit blocks");
        HiddenLevel level;
        for (const auto& bj : blocks) {
            const auto units = required<std::size_t>(bj, "units");
            if (units == 0) throw ParseError(ParseError::Kind::Syntax, where + ": empty block");
            level.blocks.push_back({activation_from(required<std::string>(bj, "activation")),
                                    matrix_from_json(required<json>(bj, "in_weights"), units, fan_in,
                                                     where + " in_weights")});
        }
        if (required<std::size_t>(lj, "units") != level.units())
            throw ParseError(ParseError::Kind::Syntax,
                             where + ": 'units' disagrees with its blocks");
        net.levels.push_back(std::move(level));
    }
    net.out_weights = matrix_from_json(required<json>(doc, "out_weights"), net.q,
                                       1 + net.d + net.hidden_units(), "out_weights");
    return net;
}

json serialize(const Model& model) {
    json doc = serialize(model.net);
    if (!model.input_scaling.empty())
        doc["input_scaling"] = {{"mean", model.input_scaling.mean},
                                {"scale", model.input_scaling.scale}};
    return doc;
}

Model deserialize_model(const json& doc) {
    Model model;
    model.net = deserialize(doc);
    if (doc.contains("input_scaling")) {
        const auto& s = doc["input_scaling"];
        model.input_scaling.mean = required<std::vector<double>>(s, "mean");
        model.input_scaling.scale = required<std::vector<double>>(s, "scale");
        if (model.input_scaling.mean.size() != model.net.d ||
            model.input_scaling.scale.size() != model.net.d)
            throw ParseError(ParseError::Kind::Syntax, "input_scaling length differs from d");
    }
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file: " + path.string());
    out << serialize(model).dump(1) << '\n';
}

Model load_model(const std::filesystem::path& path) {
    const auto text = detail::read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(ParseError::Kind::Syntax, "model file " + path.string() + ": " + e.what());
    }
    return deserialize_model(doc);
}

}  // namespace cascademl
