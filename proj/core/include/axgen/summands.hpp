#pragma once

#include <cstdint>
#include <vector>

#include "axgen/qarith.hpp"

namespace axgen::netlist {

/// Minimal two's-complement width that holds every achievable preactivation
/// of the neuron: bit_width(sum of largest summands + |bias|) + 1.
int acc_width(const qarith::ApproxNeuron& neuron, int act_width);

struct FoldedNegations {
    std::vector<bool> complemented;  // per input: summand is inverted bitwise
    std::int64_t folded_bias = 0;    // bias + one per live negative summand
};

/// Two's-complement negation as NOT plus a '+1' that is pushed into the bias.
FoldedNegations fold_negations(const qarith::ApproxNeuron& neuron);

/// A live (input-driven) bit of the neuron's adder tree.
struct SummandBit {
    std::size_t input = 0;  // which activation
    int bit = 0;            // bit position inside that activation
    bool inverted = false;  // routed through a NOT
};

/// Column-wise placement of every bit entering the multi-operand adder.
///
/// Every summand is taken at `width` bits. Masked-out bits and the sign
/// extension of positive summands are constant 0; for complemented summands
/// they are constant 1. All constants, together with the folded bias, are
/// summed into the single word `constant` (mod 2^width); each of its 1 bits
/// is one extra bit in its column.
struct NeuronLayout {
    int width = 1;
    std::vector<std::vector<SummandBit>> columns;  // columns[c], input order then bit order
    std::uint64_t constant = 0;
    FoldedNegations folding;

    bool constant_bit(int c) const { return (constant >> c) & 1u; }
};

NeuronLayout layout_neuron(const qarith::ApproxNeuron& neuron, int act_width);

}  // namespace axgen::netlist
