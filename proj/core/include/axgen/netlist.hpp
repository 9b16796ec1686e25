#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "axgen/qarith.hpp"
#include "axgen/summands.hpp"

namespace axgen::netlist {

enum class NodeKind { Input, Output, Const0, Const1, Not, And, Or, FA, HA };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view name);

using WireId = std::uint32_t;
using NodeId = std::uint32_t;

/// FA/HA inputs are (a, b[, cin]); outputs are (sum, carry).
struct Node {
    NodeId id = 0;
    NodeKind kind = NodeKind::Const0;
    std::vector<WireId> inputs;
    std::vector<WireId> outputs;
};

struct Wire {
    WireId id = 0;
    std::string name;
    NodeId driver = 0;
};

/// Multi-bit port, least significant bit first.
struct Port {
    std::string name;
    std::vector<WireId> bits;
    bool is_signed = false;
};

struct NeuronStats {
    int layer = 0;
    int index = 0;
    int acc_width = 0;
    std::int64_t folded_bias = 0;
    std::int64_t reduction_fa = 0;
    std::int64_t final_fa = 0;
    std::int64_t final_ha = 0;
};

struct Metadata {
    std::int64_t fa_count_reduction = 0;
    std::int64_t fa_count_final_adder = 0;
    std::int64_t ha_count_final_adder = 0;
    std::vector<NeuronStats> neurons;
};

/// Gate-level DAG of full/half adders, inverters and QReLU saturation gates.
struct Netlist {
    std::vector<Node> nodes;
    std::vector<Wire> wires;
    std::vector<Port> inputs;
    std::vector<Port> outputs;
    Metadata metadata;

    std::size_t count(NodeKind kind) const;
};

/// Compiles every neuron into a wired summand array, a 3:2 FA reduction tree
/// and a ripple-carry adder; hidden layers get QReLU shift/saturate logic.
/// Validates the result before returning.
Netlist build(const qarith::ApproxMlp& mlp);

/// Netlist of a single neuron: one input port per activation, one signed
/// output port holding the preactivation at its accumulator width.
Netlist build_neuron(const qarith::ApproxNeuron& neuron, int act_width);

/// Single driver per wire, well-formed node arities, no cycles. Returns a
/// topological node order. Throws InvariantError.
std::vector<NodeId> check_well_formed(const Netlist& net);

/// Bit-parallel evaluation (64 vectors per sweep) of the DAG. Each input
/// vector must have one value per input port, within that port's width.
/// Returns one score vector per input (sign-extended output ports).
std::vector<std::vector<std::int64_t>> simulate_batch(const Netlist& net,
                                                      std::span<const std::vector<std::uint32_t>> xs);

std::vector<std::int64_t> simulate(const Netlist& net, std::span<const std::uint32_t> x);

/// Preactivation computed as sum of complemented summands plus the folded
/// bias, modulo 2^acc_width, then sign-extended. Word-level, no netlist.
std::int64_t folded_preact(const qarith::ApproxNeuron& neuron, int act_width, std::span<const std::uint32_t> x);

}  // namespace axgen::netlist
