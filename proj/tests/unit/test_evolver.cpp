#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "axgen/areamodel.hpp"
#include "axgen/error.hpp"
#include "axgen/evolver.hpp"
#include "axgen/serialize.hpp"
#include "oracles.hpp"

using namespace axgen;
using namespace axgen::evolver;

namespace {

// Two features, label = (x0 > x1); 70/30 split by index.
datio::QuantDataset toy_dataset(std::size_t rows = 80) {
    datio::QuantDataset ds;
    ds.name = "toy";
    ds.feature_names = {"a", "b"};
    ds.class_names = {"no", "yes"};
    Rng rng(1234);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto a = static_cast<std::uint32_t>(rng.below(16));
        const auto b = static_cast<std::uint32_t>(rng.below(16));
        ds.features.push_back({a, b});
        ds.labels.push_back(a > b ? 1 : 0);
        (i % 10 < 7 ? ds.split.train : ds.split.test).push_back(i);
    }
    return ds;
}

Objectives obj(double e, std::int64_t a, double v = 0.0) { return {e, a, v}; }

}  // namespace

TEST(Genome, LengthFormula) {
    EXPECT_EQ(genome_length(std::vector<int>{1, 1}), 4u);
    EXPECT_EQ(genome_length(std::vector<int>{10, 3, 2}), 113u);
    EXPECT_EQ(genome_length(std::vector<int>{11, 2, 6}), 3u * 22 + 3u * 12 + 8);
    const std::vector<int> topo{10, 3, 2};
    const GenomeLayout layout(topo, {});
    EXPECT_EQ(layout.size(), 113u);
    EXPECT_EQ(encode(qarith::make_mlp(topo)).genes.size(), 113u);
}

TEST(Genome, OrderAndBounds) {
    auto mlp = qarith::make_mlp(std::vector<int>{2, 1});
    mlp.layers[0][0].inputs = {{0b1010, -1, 3}, {0b0001, 1, 6}};
    mlp.layers[0][0].bias = -128;
    EXPECT_EQ(encode(mlp).genes, (std::vector<int>{10, 1, 3, 1, 0, 6, -128}));
    const GenomeLayout layout(std::vector<int>{2, 1}, {});
    EXPECT_EQ(layout[0].kind, GeneKind::Mask);
    EXPECT_EQ(layout[0].hi, 15);
    EXPECT_EQ(layout[1].kind, GeneKind::Sign);
    EXPECT_EQ(layout[2].hi, 6);
    EXPECT_EQ(layout[6].kind, GeneKind::Bias);
    EXPECT_EQ(layout[6].lo, -128);
    EXPECT_EQ(layout[6].hi, 127);
    EXPECT_EQ(std::vector<std::size_t>(layout.group_starts().begin(), layout.group_starts().end()),
              (std::vector<std::size_t>{0, 3, 6}));
    Chromosome bad{{16, 0, 0, 0, 0, 0, 0}};
    EXPECT_THROW(decode(bad, layout), DataError);
    EXPECT_THROW(decode(Chromosome{{1, 0, 0}}, layout), DataError);
}

TEST(Genome, RoundTrip) {
    Rng rng(55);
    const std::vector<int> topo{5, 4, 3};
    const GenomeLayout layout(topo, {});
    for (int t = 0; t < 1000; ++t) {
        const auto mlp = oracle::random_mlp(topo, {}, rng, 0.2);
        const auto c = encode(mlp);
        EXPECT_TRUE(layout.in_bounds(c));
        ASSERT_EQ(decode(c, layout), mlp);
    }
}

TEST(Genome, EvolvedQreluShift) {
    qarith::MlpConfig cfg;
    cfg.evolve_qrelu_shift = true;
    const std::vector<int> topo{10, 3, 2};
    const GenomeLayout layout(topo, cfg);
    ASSERT_EQ(layout.size(), 114u);
    EXPECT_EQ(layout[113].kind, GeneKind::QreluShift);
    EXPECT_EQ(layout[113].hi, qarith::worst_case_acc_width(cfg, 10, 4));
    auto c = encode(layout.prototype());
    c.genes.back() = 3;
    EXPECT_EQ(decode(c, layout).config.qrelu_shift, std::vector<int>{3});
}

TEST(Init, DopingAndDeterminism) {
    GaConfig cfg;
    cfg.population = 50;
    cfg.dope = 0.1;
    const GenomeLayout layout(std::vector<int>{4, 3, 2}, {});
    const auto pop = init_population(cfg, layout);
    ASSERT_EQ(pop.size(), 50u);
    for (std::size_t n = 0; n < pop.size(); ++n) {
        EXPECT_TRUE(layout.in_bounds(pop[n]));
        bool all_ones = true;
        for (std::size_t g = 0; g < layout.size(); ++g)
            if (layout[g].kind == GeneKind::Mask) all_ones = all_ones && pop[n].genes[g] == layout[g].hi;
        EXPECT_EQ(all_ones, n < 5) << "individual " << n;
    }
    EXPECT_EQ(init_population(cfg, layout), pop);
    cfg.seed = 2;
    EXPECT_NE(init_population(cfg, layout), pop);
    cfg.dope = 0.0;
    for (const auto& c : init_population(cfg, layout)) {
        bool all_ones = true;
        for (std::size_t g = 0; g < layout.size(); ++g)
            if (layout[g].kind == GeneKind::Mask) all_ones = all_ones && c.genes[g] == layout[g].hi;
        EXPECT_FALSE(all_ones);
    }
}

TEST(Mutate, Extremes) {
    const GenomeLayout layout(std::vector<int>{4, 3, 2}, {});
    GaConfig cfg;
    const auto c = init_population(cfg, layout)[7];
    Rng rng(1);
    EXPECT_EQ(mutate(c, layout, 0.0, rng), c);
    const auto m = mutate(c, layout, 1.0, rng);
    EXPECT_TRUE(layout.in_bounds(m));
    for (std::size_t g = 0; g < layout.size(); ++g) {
        EXPECT_NE(m.genes[g], c.genes[g]) << "gene " << g;
        if (layout[g].kind == GeneKind::Mask)
            EXPECT_EQ(std::popcount(static_cast<unsigned>(m.genes[g] ^ c.genes[g])), 1);
        if (layout[g].kind == GeneKind::Sign) EXPECT_EQ(m.genes[g], 1 - c.genes[g]);
    }
}

TEST(Mutate, AlteredFractionWithinBinomialBounds) {
    const GenomeLayout layout(std::vector<int>{10, 3, 2}, {});
    const auto c = init_population(GaConfig{}, layout)[3];
    Rng rng(2);
    const double p = 0.2;
    std::size_t changed = 0, total = 0;
    for (int t = 0; t < 2000; ++t) {
        const auto m = mutate(c, layout, p, rng);
        for (std::size_t g = 0; g < layout.size(); ++g) changed += m.genes[g] != c.genes[g];
        total += layout.size();
    }
    const double mean = p * static_cast<double>(total);
    const double sigma = std::sqrt(static_cast<double>(total) * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(changed), mean, 3 * sigma);
}

TEST(Crossover, ExtremesAndErrors) {
    const GenomeLayout layout(std::vector<int>{4, 3, 2}, {});
    const auto pop = init_population(GaConfig{}, layout);
    Rng rng(3);
    const auto [a, b] = crossover(pop[0], pop[1], layout, 0.0, rng);
    EXPECT_EQ(a, pop[0]);
    EXPECT_EQ(b, pop[1]);
    const auto [x, y] = crossover(pop[2], pop[2], layout, 1.0, rng);
    EXPECT_EQ(x, pop[2]);
    EXPECT_EQ(y, pop[2]);
    Chromosome shorter = pop[0];
    shorter.genes.pop_back();
    EXPECT_THROW(crossover(pop[0], shorter, layout, 1.0, rng), DataError);
}

TEST(Crossover, CutPointsUniformOverGroupBoundaries) {
    const GenomeLayout layout(std::vector<int>{4, 3, 2}, {});
    const auto starts = layout.group_starts();
    Chromosome zeros{std::vector<int>(layout.size(), 0)};
    Chromosome ones{std::vector<int>(layout.size(), 1)};
    Rng rng(4);
    std::map<std::size_t, int> hist;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        const auto [c1, c2] = crossover(zeros, ones, layout, 1.0, rng);
        std::size_t cut = 0;
        while (cut < c1.genes.size() && c1.genes[cut] == 0) ++cut;
        ASSERT_LT(cut, c1.genes.size());
        ASSERT_TRUE(std::find(starts.begin(), starts.end(), cut) != starts.end()) << "cut inside a group: " << cut;
        for (std::size_t g = cut; g < c1.genes.size(); ++g) ASSERT_EQ(c1.genes[g], 1);
        for (std::size_t g = 0; g < c2.genes.size(); ++g) ASSERT_EQ(c2.genes[g], g < cut ? 1 : 0);
        ++hist[cut];
    }
    const std::size_t k = starts.size() - 1;  // cut at 0 would just swap parents
    ASSERT_EQ(hist.size(), k);
    const double expect = static_cast<double>(trials) / static_cast<double>(k);
    double chi2 = 0.0;
    for (auto [cut, n] : hist) chi2 += (n - expect) * (n - expect) / expect;
    // 5% critical value of chi-square with df = k - 1 (Wilson-Hilferty).
    const double df = static_cast<double>(k - 1);
    const double z = 1.6448536269514722;
    const double crit = df * std::pow(1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df)), 3.0);
    EXPECT_LT(chi2, crit);
}

TEST(Evaluate, Examples) {
    const auto ds = toy_dataset();
    GaConfig cfg;
    cfg.baseline_accuracy = 0.98;
    auto mlp = qarith::make_mlp(std::vector<int>{2, 2});
    const auto f = evaluate(mlp, ds, cfg);
    std::size_t zeros = 0;
    for (auto i : ds.split.train) zeros += ds.labels[i] == 0;
    const double majority0 = static_cast<double>(zeros) / static_cast<double>(ds.split.train.size());
    EXPECT_EQ(f.area, 0);
    EXPECT_DOUBLE_EQ(f.error, 1.0 - majority0);  // ties go to class 0
    EXPECT_EQ(f.feasible, majority0 >= 0.88);
    EXPECT_EQ(evaluate(mlp, ds, cfg), f);

    // 0.875 vs bound 0.88.
    cfg.baseline_accuracy = 0.98;
    datio::QuantDataset eight = ds;
    eight.split.train.assign(ds.split.train.begin(), ds.split.train.begin() + 8);
    eight.split.test.clear();
    for (std::size_t i = 0; i < 8; ++i) eight.labels[eight.split.train[i]] = i < 7 ? 0 : 1;
    const auto g = evaluate(mlp, eight, cfg);
    EXPECT_DOUBLE_EQ(1.0 - g.error, 0.875);
    EXPECT_FALSE(g.feasible);
    EXPECT_NEAR(g.violation, 0.005, 1e-12);
    cfg.baseline_accuracy = 0.975;
    EXPECT_TRUE(evaluate(mlp, eight, cfg).feasible);
}

TEST(Nsga2, SortExample) {
    const std::vector<Objectives> pop{obj(0.1, 5), obj(0.2, 3), obj(0.3, 4)};
    const auto fronts = nondominated_sort(pop);
    ASSERT_EQ(fronts.size(), 2u);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{2}));
}

TEST(Nsga2, ConstrainedDomination) {
    EXPECT_TRUE(dominates(obj(0.3, 9), obj(0.05, 1, 0.2)));
    EXPECT_FALSE(dominates(obj(0.05, 1, 0.2), obj(0.3, 9)));
    EXPECT_TRUE(dominates(obj(0.5, 9, 0.1), obj(0.05, 1, 0.2)));
    EXPECT_FALSE(dominates(obj(0.1, 1), obj(0.1, 1)));
    const std::vector<Objectives> pop{obj(0.05, 1, 0.2), obj(0.3, 9)};
    EXPECT_EQ(nondominated_sort(pop)[0], std::vector<std::size_t>{1});
}

TEST(Nsga2, SortMatchesPeelingOracle) {
    Rng rng(10);
    for (int t = 0; t < 300; ++t) {
        std::vector<Objectives> pop(1 + rng.below(60));
        for (auto& o : pop) {
            o.error = static_cast<double>(rng.below(10)) / 10.0;
            o.area = static_cast<std::int64_t>(rng.below(12));
            o.violation = rng.bernoulli(0.3) ? static_cast<double>(rng.below(4)) / 20.0 : 0.0;
        }
        ASSERT_EQ(nondominated_sort(pop), oracle::fronts(pop));
    }
}

TEST(Nsga2, Crowding) {
    const std::vector<Objectives> one{obj(0.2, 3)};
    const std::vector<std::size_t> f1{0};
    EXPECT_TRUE(std::isinf(crowding_distance(one, f1)[0]));

    const std::vector<Objectives> pop{obj(0.0, 10), obj(0.25, 6), obj(0.5, 4), obj(1.0, 0)};
    const std::vector<std::size_t> all{0, 1, 2, 3};
    const auto d = crowding_distance(pop, all);
    EXPECT_TRUE(std::isinf(d[0]));
    EXPECT_TRUE(std::isinf(d[3]));
    EXPECT_DOUBLE_EQ(d[1], (0.5 - 0.0) / 1.0 + (10.0 - 4.0) / 10.0);
    EXPECT_DOUBLE_EQ(d[2], (1.0 - 0.25) / 1.0 + (6.0 - 0.0) / 10.0);
}

TEST(Nsga2, HypervolumeMatchesCellOracle) {
    EXPECT_DOUBLE_EQ(hypervolume(std::vector<Objectives>{obj(0.5, 5)}, 1.0, 10.0), 0.5 * 5.0);
    EXPECT_DOUBLE_EQ(hypervolume(std::vector<Objectives>{obj(0.5, 12)}, 1.0, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(hypervolume(std::vector<Objectives>{}, 1.0, 10.0), 0.0);
    Rng rng(12);
    for (int t = 0; t < 300; ++t) {
        std::vector<Objectives> pts(rng.below(15));
        for (auto& o : pts) {
            o.error = static_cast<double>(rng.below(25)) / 20.0;
            o.area = static_cast<std::int64_t>(rng.below(40));
        }
        ASSERT_NEAR(hypervolume(pts, 1.0, 30.0), oracle::hypervolume(pts, 1.0, 30.0), 1e-9);
    }
}

TEST(Evolve, ZeroGenerationsUsesInitialPopulation) {
    const auto ds = toy_dataset();
    GaConfig cfg;
    cfg.population = 20;
    cfg.generations = 0;
    cfg.baseline_accuracy = 0.5;
    cfg.max_accuracy_loss = 0.5;  // everything feasible
    const std::vector<int> topo{2, 2, 2};
    const auto ar = evolve(ds, topo, cfg);
    const GenomeLayout layout(topo, {});
    std::vector<Objectives> objs;
    for (const auto& c : init_population(cfg, layout)) {
        const auto f = evaluate(c, layout, ds, cfg);
        objs.push_back(f.objectives());
    }
    std::set<std::pair<double, std::int64_t>> want;
    const auto sorted = nondominated_sort(objs);
    for (auto i : sorted[0]) want.insert({objs[i].error, objs[i].area});
    std::set<std::pair<double, std::int64_t>> got;
    for (const auto& e : ar.entries) {
        got.insert({e.train_error, e.area});
        EXPECT_EQ(e.generation, 0u);
    }
    EXPECT_EQ(got, want);
}

TEST(Evolve, ArchiveInvariantsAndDeterminism) {
    const auto ds = toy_dataset(120);
    GaConfig cfg;
    cfg.population = 30;
    cfg.generations = 40;
    cfg.baseline_accuracy = 0.9;
    cfg.seed = 9;
    const std::vector<int> topo{2, 3, 2};
    std::vector<GenerationStats> stats;
    const auto ar = evolve(ds, topo, cfg, {}, [&](const GenerationStats& s) { stats.push_back(s); });
    ASSERT_EQ(stats.size(), 41u);
    ASSERT_TRUE(ar.feasible);
    ASSERT_FALSE(ar.entries.empty());

    for (std::size_t i = 1; i < stats.size(); ++i) {
        EXPECT_GE(stats[i].hypervolume, stats[i - 1].hypervolume);
        EXPECT_LE(stats[i].best_error, stats[i - 1].best_error);
    }
    const std::int64_t ref = area::full_mask_area(qarith::make_mlp(topo));
    EXPECT_EQ(ar.reference_area, ref);
    for (std::size_t i = 0; i < ar.entries.size(); ++i) {
        const auto& a = ar.entries[i];
        if (i > 0) EXPECT_LT(ar.entries[i - 1].area, a.area);
        for (const auto& b : ar.entries)
            if (&a != &b) EXPECT_FALSE(pareto_dominates({a.train_error, a.area, 0}, {b.train_error, b.area, 0}));
        EXPECT_NO_THROW(qarith::validate(a.mlp));
        EXPECT_EQ(area::mlp_area(a.mlp), a.area);
        EXPECT_DOUBLE_EQ(1.0 - qarith::accuracy(a.mlp, ds, datio::Part::Train), a.train_error);
        EXPECT_DOUBLE_EQ(qarith::accuracy(a.mlp, ds, datio::Part::Test), a.test_accuracy);
        EXPECT_GE(a.train_accuracy(), cfg.baseline_accuracy - cfg.max_accuracy_loss);
    }

    const auto again = evolve(ds, topo, cfg);
    EXPECT_EQ(serialize::to_json(again).dump(), serialize::to_json(ar).dump());
    cfg.threads = 3;
    EXPECT_EQ(serialize::to_json(evolve(ds, topo, cfg)).dump(), serialize::to_json(ar).dump());
}

TEST(Evolve, InfeasibleFallsBackToLeastViolating) {
    // Identical inputs with alternating labels: no network beats the majority class.
    auto ds = toy_dataset();
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        ds.features[i] = {3, 3};
        ds.labels[i] = static_cast<int>(i % 2);
    }
    GaConfig cfg;
    cfg.population = 10;
    cfg.generations = 3;
    cfg.baseline_accuracy = 0.9;
    const auto ar = evolve(ds, std::vector<int>{2, 2}, cfg);
    EXPECT_FALSE(ar.feasible);
    ASSERT_FALSE(ar.entries.empty());
    // The best any network can do is predict the majority label of the train split.
    std::size_t zeros = 0;
    for (auto i : ds.split.train) zeros += ds.labels[i] == 0;
    const double majority = static_cast<double>(std::max(zeros, ds.split.train.size() - zeros)) /
                            static_cast<double>(ds.split.train.size());
    std::set<std::pair<double, std::int64_t>> seen;
    for (const auto& e : ar.entries) {
        EXPECT_LE(e.train_accuracy(), majority + 1e-12);
        EXPECT_TRUE(seen.insert({e.train_error, e.area}).second);
    }
}

TEST(Evolve, RejectsMismatchedShapes) {
    const auto ds = toy_dataset();
    GaConfig cfg;
    EXPECT_THROW(evolve(ds, std::vector<int>{3, 2}, cfg), ConfigError);
    EXPECT_THROW(evolve(ds, std::vector<int>{2, 1}, cfg), ConfigError);
    cfg.mutation = 1.5;
    EXPECT_THROW(evolve(ds, std::vector<int>{2, 2}, cfg), ConfigError);
}

TEST(WorkerCount, HonorsEnvironmentCap) {
    ::setenv("AXGEN_THREADS", "2", 1);
    EXPECT_EQ(worker_count(8), 2u);
    EXPECT_EQ(worker_count(1), 1u);
    ::setenv("AXGEN_THREADS", "junk", 1);
    EXPECT_EQ(worker_count(8), 8u);
    ::unsetenv("AXGEN_THREADS");
    EXPECT_GE(worker_count(0), 1u);
}
