#include "axgen/summands.hpp"

#include <cstdlib>

namespace axgen::netlist {

int acc_width(const qarith::ApproxNeuron& neuron, int act_width) {
    std::uint64_t magnitude = static_cast<std::uint64_t>(std::llabs(neuron.bias));
    const std::uint32_t full = (1u << act_width) - 1;
    for (const auto& s : neuron.inputs) magnitude += qarith::masked_shift(full, s.mask, s.shift);
    return qarith::signed_width_for_magnitude(magnitude);
}

FoldedNegations fold_negations(const qarith::ApproxNeuron& neuron) {
    FoldedNegations f;
    f.folded_bias = neuron.bias;
    f.complemented.reserve(neuron.fan_in());
    for (const auto& s : neuron.inputs) {
        const bool neg = s.sign < 0 && s.mask != 0;
        f.complemented.push_back(neg);
        if (neg) ++f.folded_bias;
    }
    return f;
}

NeuronLayout layout_neuron(const qarith::ApproxNeuron& neuron, int act_width) {
    NeuronLayout layout;
    layout.width = acc_width(neuron, act_width);
    layout.folding = fold_negations(neuron);
    layout.columns.resize(static_cast<std::size_t>(layout.width));

    const std::uint64_t modulus_mask =
        layout.width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << layout.width) - 1;
    std::uint64_t constant = static_cast<std::uint64_t>(layout.folding.folded_bias);
    for (std::size_t i = 0; i < neuron.fan_in(); ++i) {
        const auto& s = neuron.inputs[i];
        if (s.mask == 0) continue;
        const bool inv = layout.folding.complemented[i];
        std::uint64_t live = 0;
        for (int b = 0; b < act_width; ++b) {
            if (!((s.mask >> b) & 1u)) continue;
            layout.columns[b + s.shift].push_back({i, b, inv});
            live |= std::uint64_t{1} << (b + s.shift);
        }
        // ~summand: every non-live position is a constant 1.
        if (inv) constant += modulus_mask & ~live;
    }
    layout.constant = constant & modulus_mask;
    return layout;
}

}  // namespace axgen::netlist
