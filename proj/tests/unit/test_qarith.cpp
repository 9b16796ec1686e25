#include <gtest/gtest.h>

#include "axgen/error.hpp"
#include "axgen/qarith.hpp"
#include "oracles.hpp"

using namespace axgen;
using namespace axgen::qarith;

namespace {

ApproxNeuron neuron(std::initializer_list<Synapse> syn, int bias) { return {std::vector<Synapse>(syn), bias}; }

}  // namespace

TEST(MaskedShift, Examples) {
    EXPECT_EQ(masked_shift(0b111111, 0b101101, 0), 0b101101u);
    EXPECT_EQ(masked_shift(0b1011, 0, 5), 0u);
    EXPECT_EQ(masked_shift(0b1011, 0b1111, 3), 88u);
}

TEST(MaskedShift, Pow2EqualsMultiplication) {
    for (std::uint32_t x = 0; x < 256; ++x)
        for (int k = 0; k < 7; ++k) EXPECT_EQ(masked_shift(x, 0xff, k), x * (1u << k));
}

TEST(MaskedShift, ClearingABitOnlyTouchesThatBit) {
    for (std::uint32_t x = 0; x < 16; ++x)
        for (std::uint32_t m = 0; m < 16; ++m)
            for (int p = 0; p < 4; ++p) {
                const auto full = masked_shift(x, m, 2);
                const auto cleared = masked_shift(x, m & ~(1u << p), 2);
                EXPECT_EQ(full ^ cleared, ((x & m) >> p & 1u) << (p + 2));
            }
}

TEST(Preact, Examples) {
    EXPECT_EQ(neuron_preact(neuron({{0xf, 1, 0}, {0xf, 1, 0}}, 0), std::vector<std::uint32_t>{3, 5}), 8);
    EXPECT_EQ(neuron_preact(neuron({{0xf, -1, 1}}, 4), std::vector<std::uint32_t>{3}), -2);
    EXPECT_EQ(neuron_preact(neuron({{0, -1, 6}, {0, 1, 3}}, -77), std::vector<std::uint32_t>{15, 9}), -77);
    EXPECT_THROW(neuron_preact(neuron({{0xf, 1, 0}}, 0), std::vector<std::uint32_t>{1, 2}), DataError);
}

TEST(Preact, MatchesWideReference) {
    Rng rng(11);
    MlpConfig cfg;
    for (int t = 0; t < 2000; ++t) {
        const auto n = oracle::random_neuron(1 + rng.below(21), 8, cfg, rng);
        std::vector<std::uint32_t> x(n.fan_in());
        for (auto& v : x) v = static_cast<std::uint32_t>(rng.below(256));
        EXPECT_EQ(static_cast<__int128>(neuron_preact(n, x)), oracle::preact(n, x));
    }
}

TEST(Qrelu, Examples) {
    for (int r = 0; r < 10; ++r) EXPECT_EQ(qrelu(-17, r, 8), 0u);
    EXPECT_EQ(qrelu(300, 0, 8), 255u);
    EXPECT_EQ(qrelu(300, 2, 8), 75u);
    EXPECT_EQ(qrelu(0, 0, 8), 0u);
}

TEST(Qrelu, MatchesReferenceAndStaysInRange) {
    for (std::int64_t v = -600; v <= 5000; v += 7)
        for (int r = 0; r < 12; ++r)
            for (int w : {1, 4, 8}) {
                const auto q = qrelu(v, r, w);
                EXPECT_EQ(q, oracle::qrelu(v, r, w));
                EXPECT_LT(q, 1u << w);
            }
}

TEST(Config, WorstCaseWidthAndDefaultShift) {
    MlpConfig cfg;
    // 10 inputs * 15 << 6 + 128 = 9728 -> 14 magnitude bits + sign = 15.
    EXPECT_EQ(worst_case_acc_width(cfg, 10, 4), 15);
    EXPECT_EQ(default_qrelu_shift(cfg, 10, 4), 7);
    EXPECT_EQ(signed_width_for_magnitude(0), 1);
    EXPECT_EQ(signed_width_for_magnitude(15), 5);
    EXPECT_EQ(signed_width_for_magnitude(128), 9);
    const auto resolved = resolve_config(cfg, std::vector<int>{10, 3, 2});
    EXPECT_EQ(resolved.qrelu_shift, std::vector<int>{7});
    MlpConfig fixed;
    fixed.qrelu_shift = {2};
    EXPECT_EQ(resolve_config(fixed, std::vector<int>{10, 3, 2}).qrelu_shift, std::vector<int>{2});
    fixed.qrelu_shift = {1, 2};
    EXPECT_THROW(resolve_config(fixed, std::vector<int>{10, 3, 2}), ConfigError);
}

TEST(Validate, RejectsOutOfRange) {
    auto mlp = make_mlp(std::vector<int>{2, 2, 1});
    EXPECT_NO_THROW(validate(mlp));
    auto bad = mlp;
    bad.layers[0][0].inputs[0].mask = 16;
    EXPECT_THROW(validate(bad), DataError);
    bad = mlp;
    bad.layers[1][0].inputs[0].mask = 255;  // hidden activations are 8 bits wide
    EXPECT_NO_THROW(validate(bad));
    bad.layers[0][1].inputs[1].shift = 7;
    EXPECT_THROW(validate(bad), DataError);
    bad = mlp;
    bad.layers[0][0].bias = 128;
    EXPECT_THROW(validate(bad), DataError);
    bad = mlp;
    bad.layers[0][0].inputs[0].sign = 0;
    EXPECT_THROW(validate(bad), DataError);
}

TEST(Forward, SingleOutputIsAlwaysClassZero) {
    Rng rng(5);
    const std::vector<int> topo{3, 1};
    const auto mlp = oracle::random_mlp(topo, {}, rng);
    for (std::uint32_t x = 0; x < 16; ++x) EXPECT_EQ(forward(mlp, std::vector<std::uint32_t>{x, 15 - x, 3}).argmax, 0);
}

TEST(Forward, IdentityNet) {
    MlpConfig cfg;
    cfg.qrelu_shift = {0};
    auto mlp = make_mlp(std::vector<int>{1, 1, 1}, cfg);
    mlp.layers[0][0].inputs[0] = {0xf, 1, 0};
    mlp.layers[1][0].inputs[0] = {0xff, 1, 0};
    const auto r = forward(mlp, std::vector<std::uint32_t>{7});
    EXPECT_EQ(r.scores, std::vector<std::int64_t>{7});
    EXPECT_EQ(r.argmax, 0);
}

TEST(Forward, TiesGoToLowestClass) {
    auto mlp = make_mlp(std::vector<int>{1, 3});
    mlp.layers[0][0].bias = 4;
    mlp.layers[0][1].bias = 9;
    mlp.layers[0][2].bias = 9;
    EXPECT_EQ(forward(mlp, std::vector<std::uint32_t>{0}).argmax, 1);
}

TEST(Forward, ExhaustiveAgainstReference) {
    Rng rng(2024);
    const std::vector<int> topo{4, 3, 2};
    for (int t = 0; t < 5; ++t) {
        const auto mlp = oracle::random_mlp(topo, {}, rng);
        Workspace ws;
        for (const auto& x : oracle::input_vectors(4, 4, 1u << 16, rng)) {
            const auto got = forward(mlp, x);
            const auto want = oracle::forward(mlp, x);
            ASSERT_EQ(got.scores, want.scores);
            ASSERT_EQ(got.argmax, want.argmax);
            ASSERT_EQ(predict(mlp, x, ws), want.argmax);
        }
    }
}

TEST(Forward, ZeroMaskEqualsRemovedInput) {
    Rng rng(8);
    MlpConfig cfg;
    cfg.qrelu_shift = {3};
    for (int t = 0; t < 50; ++t) {
        auto mlp = oracle::random_mlp(std::vector<int>{3, 2, 2}, cfg, rng);
        for (auto& n : mlp.layers[0]) n.inputs[1].mask = 0;
        auto small = make_mlp(std::vector<int>{2, 2, 2}, cfg);
        small.layers[1] = mlp.layers[1];
        for (std::size_t j = 0; j < 2; ++j) {
            small.layers[0][j].bias = mlp.layers[0][j].bias;
            small.layers[0][j].inputs = {mlp.layers[0][j].inputs[0], mlp.layers[0][j].inputs[2]};
        }
        for (std::uint32_t a = 0; a < 16; ++a)
            for (std::uint32_t c = 0; c < 16; ++c)
                EXPECT_EQ(forward(mlp, std::vector<std::uint32_t>{a, rng.below(16) & 0xfu, c}).scores,
                          forward(small, std::vector<std::uint32_t>{a, c}).scores);
    }
}

TEST(Accuracy, ConstantPredictorOnBalancedSet) {
    datio::QuantDataset ds;
    ds.feature_names = {"a"};
    ds.class_names = {"x", "y"};
    for (std::uint32_t i = 0; i < 10; ++i) {
        ds.features.push_back({i});
        ds.labels.push_back(static_cast<int>(i % 2));
        ds.split.train.push_back(i);
    }
    auto mlp = make_mlp(std::vector<int>{1, 2});
    EXPECT_DOUBLE_EQ(accuracy(mlp, ds, datio::Part::Train), 0.5);
    EXPECT_DOUBLE_EQ(accuracy(mlp, ds, datio::Part::Test), 0.0);

    Rng rng(4);
    const auto r = oracle::random_mlp(std::vector<int>{1, 4, 2}, {}, rng);
    int hits = 0;
    for (std::uint32_t i = 0; i < 10; ++i)
        hits += oracle::forward(r, std::vector<std::uint32_t>{i}).argmax == ds.labels[i];
    EXPECT_DOUBLE_EQ(accuracy(r, ds, datio::Part::Train), hits / 10.0);
}
