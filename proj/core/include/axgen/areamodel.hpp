#pragma once

#include <cstdint>
#include <vector>

#include "axgen/qarith.hpp"

namespace axgen::area {

/// Non-constant bits per column of a neuron's adder tree.
struct ColumnProfile {
    std::vector<int> counts;  // counts[c]; trailing zero columns trimmed
    /// Carries into column >= width are discarded (mod 2^width arithmetic).
    /// 0 means unbounded.
    int width = 0;

    friend bool operator==(const ColumnProfile&, const ColumnProfile&) = default;
};

struct ReductionCost {
    std::int64_t reduction_fa = 0;  // 3:2 tree, the area figure
    std::int64_t final_fa = 0;      // ripple-carry stage, reported separately
    std::int64_t final_ha = 0;
};

/// Live bits per column: one per set mask bit at column bit + shift, one per
/// 1 bit of the folded constant word. Negative summands count like positive
/// ones (inverters are free).
ColumnProfile column_profile(const qarith::ApproxNeuron& neuron, int act_width);

/// Repeated synchronous 3:2 passes until every column holds at most two bits;
/// returns the number of full adders used.
std::int64_t fa_count(const ColumnProfile& profile);

/// fa_count plus the cost of the final two-row ripple adder.
ReductionCost reduction_cost(const ColumnProfile& profile);

/// Sum of fa_count over all neurons.
std::int64_t mlp_area(const qarith::ApproxMlp& mlp);

/// Area of the unpruned reference: every mask all ones, sign +1, shift 0,
/// bias 0, same topology and widths.
std::int64_t full_mask_area(const qarith::ApproxMlp& shape);

}  // namespace axgen::area
