#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "axgen/datio.hpp"

namespace axgen::qarith {

/// One connection of an approximate neuron: the input is masked bitwise,
/// shifted left by `shift` and added (sign = +1) or subtracted (sign = -1).
/// A zero mask removes the summand entirely.
struct Synapse {
    std::uint32_t mask = 0;
    int sign = +1;
    int shift = 0;

    friend bool operator==(const Synapse&, const Synapse&) = default;
};

struct ApproxNeuron {
    std::vector<Synapse> inputs;
    int bias = 0;

    std::size_t fan_in() const { return inputs.size(); }
    friend bool operator==(const ApproxNeuron&, const ApproxNeuron&) = default;
};

/// Bit widths and QReLU scaling shared by every neuron of a network.
struct MlpConfig {
    int w_in = 4;       // first-layer activation bits
    int w_hidden = 8;   // QReLU output bits
    int n_bits = 8;     // weight bits: shifts live in [0, n_bits - 1)
    int bias_bits = 8;  // signed bias width
    /// Right shift applied before QReLU saturation, one per hidden layer.
    /// Empty means "derive from the worst-case accumulator width".
    std::vector<int> qrelu_shift;
    /// When set, the shifts are carried in the genome instead of fixed.
    bool evolve_qrelu_shift = false;

    int max_shift() const { return n_bits - 2; }
    int bias_min() const { return -(1 << (bias_bits - 1)); }
    int bias_max() const { return (1 << (bias_bits - 1)) - 1; }

    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// Power-of-two quantized, bit-mask pruned multilayer perceptron.
struct ApproxMlp {
    std::vector<int> topology;                      // {inputs, hidden..., outputs}
    std::vector<std::vector<ApproxNeuron>> layers;  // layers[l][j], l = 0 .. topology.size()-2
    MlpConfig config;                               // qrelu_shift always resolved

    std::size_t num_layers() const { return layers.size(); }
    bool is_output_layer(std::size_t l) const { return l + 1 == layers.size(); }
    /// Bit width of the activations feeding layer l.
    int act_width(std::size_t l) const { return l == 0 ? config.w_in : config.w_hidden; }
    std::uint32_t full_mask(std::size_t l) const { return (1u << act_width(l)) - 1; }

    friend bool operator==(const ApproxMlp&, const ApproxMlp&) = default;
};

struct Inference {
    std::vector<std::int64_t> scores;
    int argmax = 0;
};

/// Bits needed to hold any value of magnitude <= `magnitude` in two's complement.
int signed_width_for_magnitude(std::uint64_t magnitude);

/// Worst-case accumulator width of a layer: all-ones masks, largest shift and
/// extreme bias on every input.
int worst_case_acc_width(const MlpConfig& config, std::size_t fan_in, int act_width);

/// QReLU shift used when none is configured: max(0, worst-case width - w_hidden).
int default_qrelu_shift(const MlpConfig& config, std::size_t fan_in, int act_width);

/// Fills config.qrelu_shift for `topology` where it is left empty.
MlpConfig resolve_config(MlpConfig config, std::span<const int> topology);

/// Network of the given shape with all masks zero, sign +1, shift 0, bias 0.
ApproxMlp make_mlp(std::span<const int> topology, const MlpConfig& config = {});

/// Throws DataError if shapes, masks, shifts or biases are out of range.
void validate(const ApproxMlp& mlp);

inline std::uint64_t masked_shift(std::uint32_t x, std::uint32_t mask, int shift) {
    return static_cast<std::uint64_t>(x & mask) << shift;
}

/// Sum of signed masked shifts plus bias. Throws DataError on fan-in mismatch.
std::int64_t neuron_preact(const ApproxNeuron& neuron, std::span<const std::uint32_t> x);

/// clamp(max(0, v) >> shift, 0, 2^w_out - 1)
std::uint32_t qrelu(std::int64_t v, int shift, int w_out);

/// Hidden layers go through QReLU; the output layer returns raw sums.
/// Ties in the argmax resolve to the lowest class id.
Inference forward(const ApproxMlp& mlp, std::span<const std::uint32_t> x);

/// Reusable buffers for predict().
struct Workspace {
    std::vector<std::uint32_t> acts;
    std::vector<std::uint32_t> next;
    std::vector<std::int64_t> scores;
};

/// Argmax of forward() without per-call allocation.
int predict(const ApproxMlp& mlp, std::span<const std::uint32_t> x, Workspace& ws);

double accuracy(const ApproxMlp& mlp, const datio::QuantDataset& ds, datio::Part part);

}  // namespace axgen::qarith
