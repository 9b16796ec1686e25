#include "axgen/areamodel.hpp"

#include "axgen/summands.hpp"

namespace axgen::area {

ColumnProfile column_profile(const qarith::ApproxNeuron& neuron, int act_width) {
    const auto layout = netlist::layout_neuron(neuron, act_width);
    ColumnProfile p;
    p.width = layout.width;
    p.counts.resize(static_cast<std::size_t>(layout.width));
    for (int c = 0; c < layout.width; ++c)
        p.counts[c] = static_cast<int>(layout.columns[c].size()) + (layout.constant_bit(c) ? 1 : 0);
    while (!p.counts.empty() && p.counts.back() == 0) p.counts.pop_back();
    return p;
}

ReductionCost reduction_cost(const ColumnProfile& profile) {
    std::vector<std::int64_t> cols(profile.counts.begin(), profile.counts.end());
    const auto bounded = [&](std::size_t c) { return profile.width == 0 || c < static_cast<std::size_t>(profile.width); };

    ReductionCost cost;
    std::vector<std::int64_t> fas;
    for (;;) {
        fas.assign(cols.size(), 0);
        bool any = false;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            fas[c] = cols[c] / 3;
            any = any || fas[c] > 0;
        }
        if (!any) break;
        for (std::size_t c = 0; c < fas.size(); ++c) {
            if (fas[c] == 0) continue;
            cost.reduction_fa += fas[c];
            cols[c] -= 2 * fas[c];
            if (bounded(c + 1)) {
                if (c + 1 == cols.size()) cols.push_back(0);
                cols[c + 1] += fas[c];
            }
        }
    }

    // Ripple stage over the two remaining rows.
    std::int64_t carry = 0;
    const std::size_t top = profile.width == 0 ? cols.size() + 1 : static_cast<std::size_t>(profile.width);
    for (std::size_t c = 0; c < top; ++c) {
        const std::int64_t bits = (c < cols.size() ? cols[c] : 0) + carry;
        if (bits == 3) ++cost.final_fa;
        if (bits == 2) ++cost.final_ha;
        carry = bits >= 2 ? 1 : 0;
    }
    return cost;
}

std::int64_t fa_count(const ColumnProfile& profile) { return reduction_cost(profile).reduction_fa; }

std::int64_t mlp_area(const qarith::ApproxMlp& mlp) {
    std::int64_t total = 0;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l)
        for (const auto& neuron : mlp.layers[l]) total += fa_count(column_profile(neuron, mlp.act_width(l)));
    return total;
}

std::int64_t full_mask_area(const qarith::ApproxMlp& shape) {
    qarith::ApproxMlp full = shape;
    for (std::size_t l = 0; l < full.layers.size(); ++l)
        for (auto& neuron : full.layers[l]) {
            neuron.bias = 0;
            for (auto& s : neuron.inputs) s = {full.full_mask(l), +1, 0};
        }
    return mlp_area(full);
}

}  // namespace axgen::area
