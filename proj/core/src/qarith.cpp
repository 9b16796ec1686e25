#include "axgen/qarith.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

#include "axgen/error.hpp"

namespace axgen::qarith {

int signed_width_for_magnitude(std::uint64_t magnitude) {
    return static_cast<int>(std::bit_width(magnitude)) + 1;
}

int worst_case_acc_width(const MlpConfig& config, std::size_t fan_in, int act_width) {
    const std::uint64_t summand = ((std::uint64_t{1} << act_width) - 1) << config.max_shift();
    const auto bias = static_cast<std::uint64_t>(-config.bias_min());
    return signed_width_for_magnitude(fan_in * summand + bias);
}

int default_qrelu_shift(const MlpConfig& config, std::size_t fan_in, int act_width) {
    return std::max(0, worst_case_acc_width(config, fan_in, act_width) - config.w_hidden);
}

MlpConfig resolve_config(MlpConfig config, std::span<const int> topology) {
    if (topology.size() < 2) throw ConfigError("topology needs at least an input and an output layer");
    const std::size_t hidden = topology.size() - 2;
    if (!config.qrelu_shift.empty() && config.qrelu_shift.size() != hidden)
        throw ConfigError(fmt::format("{} qrelu shifts given for {} hidden layers", config.qrelu_shift.size(), hidden));
    if (config.qrelu_shift.empty()) {
        for (std::size_t l = 0; l < hidden; ++l) {
            const int act = l == 0 ? config.w_in : config.w_hidden;
            config.qrelu_shift.push_back(default_qrelu_shift(config, static_cast<std::size_t>(topology[l]), act));
        }
    }
    return config;
}

ApproxMlp make_mlp(std::span<const int> topology, const MlpConfig& config) {
    for (int width : topology)
        if (width < 1) throw ConfigError(fmt::format("layer width {} must be positive", width));
    if (config.w_in < 1 || config.w_in > 16 || config.w_hidden < 1 || config.w_hidden > 16)
        throw ConfigError("activation widths must lie in [1, 16]");
    if (config.n_bits < 2 || config.n_bits > 24) throw ConfigError("weight bits must lie in [2, 24]");
    if (config.bias_bits < 2 || config.bias_bits > 24) throw ConfigError("bias bits must lie in [2, 24]");

    ApproxMlp mlp;
    mlp.topology.assign(topology.begin(), topology.end());
    mlp.config = resolve_config(config, topology);
    for (std::size_t l = 0; l + 1 < topology.size(); ++l) {
        ApproxNeuron proto;
        proto.inputs.resize(static_cast<std::size_t>(topology[l]));
        mlp.layers.emplace_back(static_cast<std::size_t>(topology[l + 1]), proto);
    }
    return mlp;
}

void validate(const ApproxMlp& mlp) {
    const auto& cfg = mlp.config;
    if (mlp.topology.size() < 2 || mlp.layers.size() + 1 != mlp.topology.size())
        throw DataError("layer count does not match topology");
    if (cfg.qrelu_shift.size() + 2 != mlp.topology.size())
        throw DataError("qrelu shift count does not match hidden layer count");
    for (int r : cfg.qrelu_shift)
        if (r < 0) throw DataError("qrelu shift must be non-negative");
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const auto& layer = mlp.layers[l];
        if (layer.size() != static_cast<std::size_t>(mlp.topology[l + 1]))
            throw DataError(fmt::format("layer {} has {} neurons, topology says {}", l, layer.size(), mlp.topology[l + 1]));
        for (std::size_t j = 0; j < layer.size(); ++j) {
            const auto& n = layer[j];
            if (n.fan_in() != static_cast<std::size_t>(mlp.topology[l]))
                throw DataError(fmt::format("neuron {}/{} has fan-in {}, expected {}", l, j, n.fan_in(), mlp.topology[l]));
            if (n.bias < cfg.bias_min() || n.bias > cfg.bias_max())
                throw DataError(fmt::format("neuron {}/{} bias {} out of range", l, j, n.bias));
            for (const auto& s : n.inputs) {
                if (s.mask > mlp.full_mask(l)) throw DataError(fmt::format("neuron {}/{} mask {} too wide", l, j, s.mask));
                if (s.sign != 1 && s.sign != -1) throw DataError(fmt::format("neuron {}/{} sign {} invalid", l, j, s.sign));
                if (s.shift < 0 || s.shift > cfg.max_shift())
                    throw DataError(fmt::format("neuron {}/{} shift {} out of range", l, j, s.shift));
            }
        }
    }
}

std::int64_t neuron_preact(const ApproxNeuron& neuron, std::span<const std::uint32_t> x) {
    if (x.size() != neuron.fan_in())
        throw DataError(fmt::format("neuron expects {} inputs, got {}", neuron.fan_in(), x.size()));
    std::int64_t acc = neuron.bias;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& s = neuron.inputs[i];
        const auto term = static_cast<std::int64_t>(masked_shift(x[i], s.mask, s.shift));
        acc += s.sign < 0 ? -term : term;
    }
    return acc;
}

std::uint32_t qrelu(std::int64_t v, int shift, int w_out) {
    if (v <= 0) return 0;
    const auto top = (std::uint64_t{1} << w_out) - 1;
    const auto scaled = shift >= 63 ? std::uint64_t{0} : static_cast<std::uint64_t>(v) >> shift;
    return static_cast<std::uint32_t>(std::min(scaled, top));
}

namespace {

int argmax(std::span<const std::int64_t> scores) {
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

// Runs all layers; scores of the output layer end up in ws.scores.
void run(const ApproxMlp& mlp, std::span<const std::uint32_t> x, Workspace& ws) {
    if (x.size() != static_cast<std::size_t>(mlp.topology.front()))
        throw DataError(fmt::format("network expects {} inputs, got {}", mlp.topology.front(), x.size()));
    ws.acts.assign(x.begin(), x.end());
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const auto& layer = mlp.layers[l];
        if (mlp.is_output_layer(l)) {
            ws.scores.resize(layer.size());
            for (std::size_t j = 0; j < layer.size(); ++j) ws.scores[j] = neuron_preact(layer[j], ws.acts);
        } else {
            ws.next.resize(layer.size());
            const int r = mlp.config.qrelu_shift[l];
            for (std::size_t j = 0; j < layer.size(); ++j)
                ws.next[j] = qrelu(neuron_preact(layer[j], ws.acts), r, mlp.config.w_hidden);
            std::swap(ws.acts, ws.next);
        }
    }
}

}  // namespace

Inference forward(const ApproxMlp& mlp, std::span<const std::uint32_t> x) {
    Workspace ws;
    run(mlp, x, ws);
    Inference out;
    out.argmax = argmax(ws.scores);
    out.scores = std::move(ws.scores);
    return out;
}

int predict(const ApproxMlp& mlp, std::span<const std::uint32_t> x, Workspace& ws) {
    run(mlp, x, ws);
    return argmax(ws.scores);
}

double accuracy(const ApproxMlp& mlp, const datio::QuantDataset& ds, datio::Part part) {
    if (ds.cols() != static_cast<std::size_t>(mlp.topology.front()))
        throw DataError(fmt::format("dataset has {} features, network expects {}", ds.cols(), mlp.topology.front()));
    const auto& idx = ds.indices(part);
    if (idx.empty()) return 0.0;
    Workspace ws;
    std::size_t hits = 0;
    for (std::size_t i : idx)
        if (predict(mlp, ds.features[i], ws) == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace axgen::qarith
