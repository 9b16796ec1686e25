#include "axgen/chromosome.hpp"

#include <numeric>

#include <fmt/format.h>

#include "axgen/error.hpp"

namespace axgen::evolver {

GenomeLayout::GenomeLayout(std::span<const int> topology, const qarith::MlpConfig& config)
    : topology_(topology.begin(), topology.end()),
      config_(qarith::resolve_config(config, topology)),
      prototype_(qarith::make_mlp(topology, config_)) {
    for (std::size_t l = 0; l + 1 < topology_.size(); ++l) {
        const int mask_hi = static_cast<int>(prototype_.full_mask(l));
        for (int j = 0; j < topology_[l + 1]; ++j) {
            for (int i = 0; i < topology_[l]; ++i) {
                group_starts_.push_back(genes_.size());
                genes_.push_back({GeneKind::Mask, 0, mask_hi});
                genes_.push_back({GeneKind::Sign, 0, 1});
                genes_.push_back({GeneKind::Shift, 0, config_.max_shift()});
            }
            group_starts_.push_back(genes_.size());
            genes_.push_back({GeneKind::Bias, config_.bias_min(), config_.bias_max()});
        }
    }
    if (config_.evolve_qrelu_shift) {
        for (std::size_t l = 0; l + 2 < topology_.size(); ++l) {
            const int act = l == 0 ? config_.w_in : config_.w_hidden;
            group_starts_.push_back(genes_.size());
            genes_.push_back({GeneKind::QreluShift, 0,
                              qarith::worst_case_acc_width(config_, static_cast<std::size_t>(topology_[l]), act)});
        }
    }
}

bool GenomeLayout::in_bounds(const Chromosome& c) const {
    if (c.genes.size() != genes_.size()) return false;
    for (std::size_t i = 0; i < genes_.size(); ++i)
        if (c.genes[i] < genes_[i].lo || c.genes[i] > genes_[i].hi) return false;
    return true;
}

std::size_t genome_length(std::span<const int> topology) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < topology.size(); ++l)
        n += static_cast<std::size_t>(topology[l]) * static_cast<std::size_t>(topology[l + 1]) * 3 +
             static_cast<std::size_t>(topology[l + 1]);
    return n;
}

Chromosome encode(const qarith::ApproxMlp& mlp) {
    Chromosome c;
    c.genes.reserve(genome_length(mlp.topology));
    for (const auto& layer : mlp.layers)
        for (const auto& neuron : layer) {
            for (const auto& s : neuron.inputs) {
                c.genes.push_back(static_cast<int>(s.mask));
                c.genes.push_back(s.sign < 0 ? 1 : 0);
                c.genes.push_back(s.shift);
            }
            c.genes.push_back(neuron.bias);
        }
    if (mlp.config.evolve_qrelu_shift)
        c.genes.insert(c.genes.end(), mlp.config.qrelu_shift.begin(), mlp.config.qrelu_shift.end());
    return c;
}

void decode_into(const Chromosome& chrom, const GenomeLayout& layout, qarith::ApproxMlp& out) {
    if (chrom.genes.size() != layout.size())
        throw DataError(fmt::format("chromosome has {} genes, layout expects {}", chrom.genes.size(), layout.size()));
    for (std::size_t i = 0; i < chrom.genes.size(); ++i) {
        const auto& spec = layout[i];
        if (chrom.genes[i] < spec.lo || chrom.genes[i] > spec.hi)
            throw DataError(fmt::format("gene {} = {} outside [{}, {}]", i, chrom.genes[i], spec.lo, spec.hi));
    }
    if (out.topology != layout.topology()) out = layout.prototype();
    out.config = layout.config();

    std::size_t g = 0;
    for (auto& layer : out.layers)
        for (auto& neuron : layer) {
            for (auto& s : neuron.inputs) {
                s.mask = static_cast<std::uint32_t>(chrom.genes[g]);
                s.sign = chrom.genes[g + 1] ? -1 : +1;
                s.shift = chrom.genes[g + 2];
                g += 3;
            }
            neuron.bias = chrom.genes[g++];
        }
    if (layout.config().evolve_qrelu_shift)
        for (auto& r : out.config.qrelu_shift) r = chrom.genes[g++];
}

qarith::ApproxMlp decode(const Chromosome& chrom, const GenomeLayout& layout) {
    qarith::ApproxMlp mlp = layout.prototype();
    decode_into(chrom, layout, mlp);
    return mlp;
}

}  // namespace axgen::evolver
