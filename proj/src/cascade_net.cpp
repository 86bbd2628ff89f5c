#include "cascademl/cascade_net.hpp"

#include <algorithm>

#include "cascademl/error.hpp"

namespace cascademl {

namespace {

double dot(const double* a, const double* b, std::size_t len) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) acc += a[k] * b[k];
    return acc;
}

}  // namespace

std::size_t HiddenLevel::units() const noexcept {
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.units();
    return total;
}

std::optional<Activation> HiddenLevel::uniform_activation() const noexcept {
    if (blocks.empty()) return std::nullopt;
    const auto first = blocks.front().activation;
    for (const auto& b : blocks)
        if (b.activation != first) return std::nullopt;
    return first;
}

std::size_t CascadeNetwork::hidden_units() const noexcept {
    std::size_t total = 0;
    for (const auto& l : levels) total += l.units();
    return total;
}

std::size_t CascadeNetwork::fan_in_at(std::size_t level_index) const noexcept {
    std::size_t fan_in = 1 + d;
    for (std::size_t i = 0; i < level_index && i < levels.size(); ++i) fan_in += levels[i].units();
    return fan_in;
}

std::size_t CascadeNetwork::parameter_count() const noexcept {
    std::size_t count = (d + 1) * q;
    for (std::size_t i = 0; i < levels.size(); ++i)
        count += levels[i].units() * fan_in_at(i) + q * levels[i].units();
    return count;
}

bool operator==(const CascadeNetwork& a, const CascadeNetwork& b) {
    if (a.d != b.d || a.q != b.q || a.output_activation != b.output_activation ||
        a.out_weights != b.out_weights || a.levels.size() != b.levels.size())
        return false;
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
        const auto& la = a.levels[i].blocks;
        const auto& lb = b.levels[i].blocks;
        if (la.size() != lb.size()) return false;
        for (std::size_t k = 0; k < la.size(); ++k)
            if (la[k].activation != lb[k].activation || la[k].in_weights != lb[k].in_weights)
                return false;
    }
    return true;
}

CascadeNetwork new_perceptron(std::size_t d, std::size_t q, Rng& rng, double init_range) {
    if (d < 1) throw InvalidArgument("new_perceptron: need at least one input");
    if (q < 2) throw InvalidArgument("new_perceptron: need at least two labels, got " +
                                     std::to_string(q));
    if (init_range < 0) throw InvalidArgument("new_perceptron: negative init range");
    CascadeNetwork net;
    net.d = d;
    net.q = q;
    net.out_weights = rand_matrix(rng, q, d + 1, -init_range, init_range);
    return net;
}

ForwardTrace forward(const CascadeNetwork& net, const Matrix& x) {
    if (x.cols() != net.d)
        throw DimensionError("forward: network expects " + std::to_string(net.d) +
                             " inputs, data has " + std::to_string(x.cols()) + " columns");
    const std::size_t n = x.rows();
    const std::size_t width = 1 + net.d + net.hidden_units();
    if (net.out_weights.rows() != net.q || net.out_weights.cols() != width)
        throw DimensionError("forward: out_weights " + net.out_weights.shape_string() +
                             " inconsistent with " + std::to_string(net.q) + "x" +
                             std::to_string(width));

    ForwardTrace trace;
    trace.layer_inputs = Matrix(n, width);
    auto& a = trace.layer_inputs;
    for (std::size_t r = 0; r < n; ++r) {
        auto row = a.row(r);
        row[0] = 1.0;
        auto src = x.row(r);
        std::copy(src.begin(), src.end(), row.begin() + 1);
    }

    std::size_t offset = 1 + net.d;
    for (const auto& level : net.levels) {
        const std::size_t fan_in = offset;
        const std::size_t level_start = offset;
        for (const auto& block : level.blocks) {
            if (block.fan_in() != fan_in)
                throw DimensionError("forward: block fan-in " + std::to_string(block.fan_in()) +
                                     " at a depth position that supplies " +
                                     std::to_string(fan_in) + " inputs");
            for (std::size_t r = 0; r < n; ++r) {
                double* row = a.row(r).data();
                for (std::size_t u = 0; u < block.units(); ++u)
                    row[offset + u] =
                        activate(dot(row, block.in_weights.row(u).data(), fan_in), block.activation);
            }
            offset += block.units();
        }
        trace.hidden_outputs.push_back(column_block(a, level_start, level.units()));
    }

    trace.output_pre = matmul_nt(a, net.out_weights);
    trace.output = apply_activation(trace.output_pre, net.output_activation);
    return trace;
}

Matrix threshold_scores(const Matrix& scores) {
    Matrix out(scores.rows(), scores.cols());
    auto s = scores.data();
    auto o = out.data();
    for (std::size_t i = 0; i < s.size(); ++i) o[i] = s[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

Matrix predict_labels(const CascadeNetwork& net, const Matrix& x) {
    return threshold_scores(forward(net, x).output);
}

CascadeNetwork install_level(const CascadeNetwork& net, const HiddenLevel& level,
                             const Matrix& out_block, bool as_sibling) {
    if (level.blocks.empty() || level.units() == 0)
        throw InvalidArgument("install_level: level has no units");
    const std::size_t units = level.units();
    if (out_block.rows() != net.q || out_block.cols() != units)
        throw DimensionError("install_level: out_block " + out_block.shape_string() +
                             " does not match " + std::to_string(net.q) + " outputs x " +
                             std::to_string(units) + " units");
    std::size_t expected_fan_in = 0;
    if (as_sibling) {
        if (net.levels.empty())
            throw InvalidArgument("install_level: sibling install needs an existing level");
        expected_fan_in = net.fan_in_at(net.depth() - 1);
    } else {
        expected_fan_in = net.fan_in_at(net.depth());
    }
    for (const auto& b : level.blocks)
        if (b.fan_in() != expected_fan_in)
            throw DimensionError("install_level: block fan-in " + std::to_string(b.fan_in()) +
                                 ", target position expects " + std::to_string(expected_fan_in));

    CascadeNetwork out = net;
    if (as_sibling) {
        auto& deepest = out.levels.back().blocks;
        deepest.insert(deepest.end(), level.blocks.begin(), level.blocks.end());
    } else {
        out.levels.push_back(level);
    }

    const std::size_t old_cols = net.out_weights.cols();
    Matrix widened(net.q, old_cols + units);
    for (std::size_t r = 0; r < net.q; ++r) {
        auto src = net.out_weights.row(r);
        auto dst = widened.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
        for (std::size_t u = 0; u < units; ++u) dst[old_cols + u] = -out_block(r, u);
    }
    out.out_weights = std::move(widened);
    return out;
}

NetworkGradient backpropagate(const CascadeNetwork& net, const ForwardTrace& trace,
                              const Matrix& d_output) {
    const auto& a = trace.layer_inputs;
    if (d_output.rows() != a.rows() || d_output.cols() != net.q)
        throw DimensionError("backpropagate: output gradient " + d_output.shape_string() +
                             " does not match trace with " + std::to_string(a.rows()) + " rows");
    const std::size_t n = a.rows();

    // Through the output squashing.
    Matrix d_pre = d_output;
    {
        auto dp = d_pre.data();
        auto out = trace.output.data();
        for (std::size_t i = 0; i < dp.size(); ++i)
            dp[i] *= activation_slope(out[i], net.output_activation);
    }

    NetworkGradient grad;
    grad.out_grad = matmul_tn(d_pre, a);
    // d loss / d layer_inputs, accumulated from the output layer and then
    // from deeper levels into shallower columns.
    Matrix d_inputs = matmul(d_pre, net.out_weights);

    grad.level_grads.resize(net.depth());
    std::vector<std::size_t> level_start(net.depth());
    for (std::size_t i = 0; i < net.depth(); ++i) level_start[i] = net.fan_in_at(i);

    for (std::size_t li = net.depth(); li-- > 0;) {
        const auto& level = net.levels[li];
        const std::size_t fan_in = level.fan_in();
        auto& block_grads = grad.level_grads[li];
        block_grads.resize(level.blocks.size());
        std::size_t col = level_start[li];
        for (std::size_t bi = 0; bi < level.blocks.size(); ++bi) {
            const auto& block = level.blocks[bi];
            const std::size_t units = block.units();
            Matrix local(n, units);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t u = 0; u < units; ++u)
                    local(r, u) = d_inputs(r, col + u) * activation_slope(a(r, col + u), block.activation);

            Matrix g(units, fan_in);
            for (std::size_t r = 0; r < n; ++r) {
                const double* arow = a.row(r).data();
                double* drow = d_inputs.row(r).data();
                for (std::size_t u = 0; u < units; ++u) {
                    const double delta = local(r, u);
                    if (delta == 0.0) continue;
                    double* grow = g.row(u).data();
                    const double* wrow = block.in_weights.row(u).data();
                    for (std::size_t k = 0; k < fan_in; ++k) {
                        grow[k] += delta * arow[k];
                        drow[k] += delta * wrow[k];
                    }
                }
            }
            block_grads[bi] = std::move(g);
            col += units;
        }
    }
    return grad;
}

ForwardTrace Model::forward(const Matrix& raw_x) const {
    return cascademl::forward(net, input_scaling.apply(raw_x));
}

Matrix Model::predict(const Matrix& raw_x) const { return threshold_scores(forward(raw_x).output); }

}  // namespace cascademl
