#include "axgen/evolver.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "axgen/areamodel.hpp"
#include "axgen/error.hpp"

namespace axgen::evolver {

void GaConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} = {} is not a probability", name, p));
    };
    prob(mutation, "mutation");
    prob(crossover, "crossover");
    prob(dope, "dope");
    prob(baseline_accuracy, "baseline accuracy");
    prob(max_accuracy_loss, "max accuracy loss");
    if (population < 2) throw ConfigError("population must hold at least 2 individuals");
}

std::size_t worker_count(std::size_t requested) {
    std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AXGEN_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
    }
    return std::max<std::size_t>(n, 1);
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
}

int random_gene(const GeneSpec& spec, Rng& rng) { return static_cast<int>(rng.between(spec.lo, spec.hi)); }

}  // namespace

std::vector<Chromosome> init_population(const GaConfig& cfg, const GenomeLayout& layout) {
    cfg.validate();
    const auto doped = static_cast<std::size_t>(
        std::clamp<long>(datio::round_half_up(cfg.dope * static_cast<double>(cfg.population)), 0,
                         static_cast<long>(cfg.population)));
    std::vector<Chromosome> pop(cfg.population);
    for (std::size_t n = 0; n < cfg.population; ++n) {
        Rng rng = Rng::derive(cfg.seed, 0, n);
        auto& genes = pop[n].genes;
        genes.resize(layout.size());
        for (std::size_t g = 0; g < layout.size(); ++g) {
            const auto& spec = layout[g];
            genes[g] = (n < doped && spec.kind == GeneKind::Mask) ? spec.hi : random_gene(spec, rng);
        }
    }
    return pop;
}

Chromosome mutate(const Chromosome& chrom, const GenomeLayout& layout, double p, Rng& rng) {
    Chromosome out = chrom;
    for (std::size_t g = 0; g < out.genes.size(); ++g) {
        if (!rng.bernoulli(p)) continue;
        const auto& spec = layout[g];
        int& v = out.genes[g];
        switch (spec.kind) {
            case GeneKind::Mask: {
                const auto width = std::bit_width(static_cast<unsigned>(spec.hi));
                v ^= 1 << rng.below(width);
                break;
            }
            case GeneKind::Sign: v ^= 1; break;
            case GeneKind::Shift:
            case GeneKind::Bias:
            case GeneKind::QreluShift: {
                if (spec.hi == spec.lo) break;
                // Uniform over the other values in range.
                const int r = static_cast<int>(rng.between(spec.lo, spec.hi - 1));
                v = r >= v ? r + 1 : r;
                break;
            }
        }
    }
    return out;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, const GenomeLayout& layout,
                                            double p, Rng& rng) {
    if (a.genes.size() != b.genes.size())
        throw DataError(fmt::format("crossover parents differ in length ({} vs {})", a.genes.size(), b.genes.size()));
    if (a.genes.size() != layout.size()) throw DataError("crossover parents do not match the genome layout");
    const auto starts = layout.group_starts();
    if (starts.size() < 2 || !rng.bernoulli(p)) return {a, b};
    const std::size_t cut = starts[1 + rng.below(starts.size() - 1)];
    Chromosome c1 = a, c2 = b;
    std::copy(b.genes.begin() + static_cast<std::ptrdiff_t>(cut), b.genes.end(),
              c1.genes.begin() + static_cast<std::ptrdiff_t>(cut));
    std::copy(a.genes.begin() + static_cast<std::ptrdiff_t>(cut), a.genes.end(),
              c2.genes.begin() + static_cast<std::ptrdiff_t>(cut));
    return {std::move(c1), std::move(c2)};
}

Fitness evaluate(const qarith::ApproxMlp& mlp, const datio::QuantDataset& ds, const GaConfig& cfg) {
    Fitness f;
    const double acc = qarith::accuracy(mlp, ds, datio::Part::Train);
    f.error = 1.0 - acc;
    f.area = area::mlp_area(mlp);
    const double bound = cfg.baseline_accuracy - cfg.max_accuracy_loss;
    // Tolerate representation error in `baseline - loss`.
    f.violation = std::max(0.0, bound - acc);
    if (f.violation < 1e-12) f.violation = 0.0;
    f.feasible = f.violation == 0.0;
    return f;
}

Fitness evaluate(const Chromosome& chrom, const GenomeLayout& layout, const datio::QuantDataset& ds,
                 const GaConfig& cfg) {
    return evaluate(decode(chrom, layout), ds, cfg);
}

namespace {

struct Individual {
    Chromosome chrom;
    Fitness fit;
    std::size_t generation = 0;
};

struct Ranking {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
};

Ranking rank_population(std::span<const Individual> pop) {
    std::vector<Objectives> objs;
    objs.reserve(pop.size());
    for (const auto& ind : pop) objs.push_back(ind.fit.objectives());
    Ranking r{std::vector<std::size_t>(pop.size()), std::vector<double>(pop.size())};
    const auto fronts = nondominated_sort(objs);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        const auto dist = crowding_distance(objs, fronts[f]);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            r.rank[fronts[f][k]] = f;
            r.crowding[fronts[f][k]] = dist[k];
        }
    }
    return r;
}

// Binary tournament: rank, then crowding, then area, then index.
std::size_t tournament(std::span<const Individual> pop, const Ranking& r, Rng& rng) {
    const std::size_t a = rng.below(pop.size());
    const std::size_t b = rng.below(pop.size());
    auto key = [&](std::size_t i) {
        return std::make_tuple(r.rank[i], -r.crowding[i], pop[i].fit.area, i);
    };
    return key(a) <= key(b) ? a : b;
}

class Archive {
public:
    void offer(const Individual& ind) {
        if (!ind.fit.feasible) return;
        const Objectives o = ind.fit.objectives();
        for (const auto& e : entries_) {
            const Objectives eo = e.fit.objectives();
            if (pareto_dominates(eo, o) || (eo.error == o.error && eo.area == o.area)) return;
        }
        std::erase_if(entries_, [&](const Individual& e) { return pareto_dominates(o, e.fit.objectives()); });
        entries_.push_back(ind);
    }

    const std::vector<Individual>& entries() const { return entries_; }

    double hypervolume(double ref_area) const {
        std::vector<Objectives> objs;
        for (const auto& e : entries_) objs.push_back(e.fit.objectives());
        return evolver::hypervolume(objs, 1.0, ref_area);
    }

private:
    std::vector<Individual> entries_;
};

void evaluate_all(std::span<Individual> inds, const GenomeLayout& layout, const datio::QuantDataset& ds,
                  const GaConfig& cfg, std::size_t workers) {
    parallel_for(inds.size(), workers, [&](std::size_t i) { inds[i].fit = evaluate(inds[i].chrom, layout, ds, cfg); });
}

GenerationStats stats_for(std::size_t generation, std::span<const Individual> pop, const Archive& archive,
                          double ref_area) {
    GenerationStats s;
    s.generation = generation;
    s.archive_size = archive.entries().size();
    s.min_area = std::numeric_limits<std::int64_t>::max();
    for (const auto& ind : pop) {
        s.min_area = std::min(s.min_area, ind.fit.area);
        if (ind.fit.feasible) ++s.feasible_count;
    }
    for (const auto& e : archive.entries()) s.best_error = std::min(s.best_error, e.fit.error);
    s.hypervolume = archive.hypervolume(ref_area);
    return s;
}

}  // namespace

ParetoArchive evolve(const datio::QuantDataset& ds, std::span<const int> topology, const GaConfig& cfg,
                     const qarith::MlpConfig& mlp_config, const ProgressSink& progress) {
    cfg.validate();
    if (ds.cols() != static_cast<std::size_t>(topology.front()))
        throw ConfigError(fmt::format("topology expects {} inputs, dataset has {} features", topology.front(), ds.cols()));
    if (ds.num_classes() > topology.back())
        throw ConfigError(fmt::format("dataset has {} classes, output layer only {}", ds.num_classes(), topology.back()));
    if (ds.w_in != mlp_config.w_in)
        throw ConfigError(fmt::format("dataset is quantized to {} bits, network expects {}", ds.w_in, mlp_config.w_in));

    const GenomeLayout layout(topology, mlp_config);
    const std::size_t workers = worker_count(cfg.threads);
    const std::size_t n = cfg.population;

    ParetoArchive result;
    result.dataset = ds.name;
    result.topology = layout.topology();
    result.mlp_config = layout.config();
    result.ga_config = cfg;
    result.reference_area = area::full_mask_area(layout.prototype());
    const auto ref_area = static_cast<double>(result.reference_area);

    std::vector<Individual> pop;
    for (auto& c : init_population(cfg, layout)) pop.push_back({std::move(c), {}, 0});
    evaluate_all(pop, layout, ds, cfg, workers);
    Archive archive;
    for (const auto& ind : pop) archive.offer(ind);
    if (progress) progress(stats_for(0, pop, archive, ref_area));

    Ranking ranking = rank_population(pop);
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<Individual> offspring(n);
        for (std::size_t pair = 0; 2 * pair < n; ++pair) {
            Rng rng = Rng::derive(cfg.seed, gen, pair);
            const auto& p1 = pop[tournament(pop, ranking, rng)].chrom;
            const auto& p2 = pop[tournament(pop, ranking, rng)].chrom;
            auto [c1, c2] = crossover(p1, p2, layout, cfg.crossover, rng);
            offspring[2 * pair] = {mutate(c1, layout, cfg.mutation, rng), {}, gen};
            if (2 * pair + 1 < n) offspring[2 * pair + 1] = {mutate(c2, layout, cfg.mutation, rng), {}, gen};
        }
        evaluate_all(offspring, layout, ds, cfg, workers);
        for (const auto& ind : offspring) archive.offer(ind);

        // Elitist environmental selection over parents + offspring.
        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                      std::make_move_iterator(offspring.end()));
        std::vector<Objectives> objs;
        objs.reserve(merged.size());
        for (const auto& ind : merged) objs.push_back(ind.fit.objectives());

        pop.clear();
        for (const auto& front : nondominated_sort(objs)) {
            if (pop.size() + front.size() <= n) {
                for (std::size_t i : front) pop.push_back(merged[i]);
                if (pop.size() == n) break;
                continue;
            }
            const auto dist = crowding_distance(objs, front);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
            for (std::size_t k = 0; pop.size() < n; ++k) pop.push_back(merged[front[order[k]]]);
            break;
        }
        ranking = rank_population(pop);
        if (progress) progress(stats_for(gen, pop, archive, ref_area));
    }

    std::vector<const Individual*> chosen;
    for (const auto& e : archive.entries()) chosen.push_back(&e);
    if (chosen.empty()) {
        result.feasible = false;
        std::vector<Objectives> objs;
        for (const auto& ind : pop) objs.push_back(ind.fit.objectives());
        const auto fronts = nondominated_sort(objs);
        for (std::size_t i : fronts.front()) chosen.push_back(&pop[i]);
        // Equal violation ties leave duplicates in front 0; keep one per objective pair.
        std::vector<const Individual*> unique;
        for (const auto* ind : chosen)
            if (std::none_of(unique.begin(), unique.end(), [&](const Individual* u) {
                    return u->fit.error == ind->fit.error && u->fit.area == ind->fit.area;
                }))
                unique.push_back(ind);
        chosen = std::move(unique);
    }
    for (const auto* ind : chosen) {
        ArchiveEntry e;
        e.train_error = ind->fit.error;
        e.area = ind->fit.area;
        e.generation = ind->generation;
        e.mlp = decode(ind->chrom, layout);
        e.test_accuracy = qarith::accuracy(e.mlp, ds, datio::Part::Test);
        result.entries.push_back(std::move(e));
    }
    std::sort(result.entries.begin(), result.entries.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return std::tie(a.area, a.train_error) < std::tie(b.area, b.train_error);
    });
    result.hypervolume = archive.hypervolume(ref_area);
    return result;
}

}  // namespace axgen::evolver
