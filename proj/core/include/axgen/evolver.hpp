#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "axgen/chromosome.hpp"
#include "axgen/datio.hpp"
#include "axgen/nsga2.hpp"
#include "axgen/qarith.hpp"
#include "axgen/random.hpp"

namespace axgen::evolver {

struct GaConfig {
    std::size_t population = 100;
    std::size_t generations = 1000;
    double mutation = 0.2;   // per-gene probability
    double crossover = 0.7;  // per-pair probability
    double dope = 0.10;      // share of all-ones-mask individuals in the first generation
    std::uint64_t seed = 1;
    double baseline_accuracy = 0.0;
    double max_accuracy_loss = 0.10;
    /// Worker threads for fitness evaluation; 0 = hardware concurrency.
    /// AXGEN_THREADS caps it further.
    std::size_t threads = 0;

    /// Throws ConfigError.
    void validate() const;
    friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

struct Fitness {
    double error = 1.0;  // 1 - train accuracy
    std::int64_t area = 0;
    bool feasible = false;
    double violation = 0.0;  // (baseline - max loss) - accuracy, clipped at 0

    Objectives objectives() const { return {error, area, violation}; }
    friend bool operator==(const Fitness&, const Fitness&) = default;
};

struct ArchiveEntry {
    double train_error = 1.0;
    double test_accuracy = 0.0;
    std::int64_t area = 0;
    std::size_t generation = 0;
    qarith::ApproxMlp mlp;

    double train_accuracy() const { return 1.0 - train_error; }
};

/// Non-dominated (train error, area) solutions, sorted by area ascending.
struct ParetoArchive {
    std::string dataset;
    std::vector<int> topology;
    qarith::MlpConfig mlp_config;
    GaConfig ga_config;
    /// False when no feasible solution was ever found; the entries are then the
    /// least-violating individuals of the final population.
    bool feasible = true;
    std::int64_t reference_area = 0;  // all-ones-mask network, hypervolume reference
    double hypervolume = 0.0;
    std::vector<ArchiveEntry> entries;
};

struct GenerationStats {
    std::size_t generation = 0;
    double best_error = 1.0;     // lowest train error among feasible individuals seen so far
    std::int64_t min_area = 0;   // smallest area in the current population
    std::size_t archive_size = 0;
    std::size_t feasible_count = 0;  // in the current population
    double hypervolume = 0.0;
};

using ProgressSink = std::function<void(const GenerationStats&)>;

/// First round(dope * N) individuals have every mask all ones with random
/// sign, shift and bias; the rest are uniform over the gene bounds.
std::vector<Chromosome> init_population(const GaConfig& cfg, const GenomeLayout& layout);

/// Each gene is altered with probability p: masks flip one random bit, signs
/// flip, shifts and biases move to a different uniform value in bounds.
Chromosome mutate(const Chromosome& chrom, const GenomeLayout& layout, double p, Rng& rng);

/// With probability p, single-point crossover at a random group boundary
/// (never inside a mask/sign/shift triple); otherwise copies of the parents.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, const GenomeLayout& layout,
                                            double p, Rng& rng);

/// Objectives on the training split. Pure.
Fitness evaluate(const Chromosome& chrom, const GenomeLayout& layout, const datio::QuantDataset& ds,
                 const GaConfig& cfg);

Fitness evaluate(const qarith::ApproxMlp& mlp, const datio::QuantDataset& ds, const GaConfig& cfg);

/// Generational NSGA-II with constrained domination. Deterministic for a
/// fixed seed regardless of thread count.
ParetoArchive evolve(const datio::QuantDataset& ds, std::span<const int> topology, const GaConfig& cfg,
                     const qarith::MlpConfig& mlp_config = {}, const ProgressSink& progress = {});

/// Effective worker count: cfg.threads (or hardware) capped by AXGEN_THREADS.
std::size_t worker_count(std::size_t requested);

}  // namespace axgen::evolver
