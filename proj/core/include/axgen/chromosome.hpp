#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "axgen/qarith.hpp"

namespace axgen::evolver {

enum class GeneKind : std::uint8_t { Mask, Sign, Shift, Bias, QreluShift };

/// Inclusive bounds of one gene. Sign genes use 0 for +1 and 1 for -1.
struct GeneSpec {
    GeneKind kind;
    int lo;
    int hi;
};

struct Chromosome {
    std::vector<int> genes;
    friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

/// Gene order: per layer, per neuron, per input (mask, sign, shift), then the
/// neuron's bias. Evolved QReLU shifts, when enabled, follow at the end, one
/// per hidden layer.
class GenomeLayout {
public:
    GenomeLayout(std::span<const int> topology, const qarith::MlpConfig& config);

    std::size_t size() const { return genes_.size(); }
    const GeneSpec& operator[](std::size_t i) const { return genes_[i]; }
    std::span<const GeneSpec> genes() const { return genes_; }

    /// Start index of every crossover group: one per (mask, sign, shift)
    /// triple, one per bias, one per evolved shift. Always begins with 0.
    std::span<const std::size_t> group_starts() const { return group_starts_; }

    const std::vector<int>& topology() const { return topology_; }
    const qarith::MlpConfig& config() const { return config_; }

    bool in_bounds(const Chromosome& c) const;

    /// Shape of the phenotype; decode() fills in the parameters.
    const qarith::ApproxMlp& prototype() const { return prototype_; }

private:
    std::vector<int> topology_;
    qarith::MlpConfig config_;
    std::vector<GeneSpec> genes_;
    std::vector<std::size_t> group_starts_;
    qarith::ApproxMlp prototype_;
};

/// sum_l fan_in(l) * width(l) * 3 + sum_l width(l)
std::size_t genome_length(std::span<const int> topology);

Chromosome encode(const qarith::ApproxMlp& mlp);

/// Throws DataError on a length mismatch or an out-of-bounds gene.
qarith::ApproxMlp decode(const Chromosome& chrom, const GenomeLayout& layout);

/// decode() into an existing network of the right shape, reusing storage.
void decode_into(const Chromosome& chrom, const GenomeLayout& layout, qarith::ApproxMlp& out);

}  // namespace axgen::evolver
