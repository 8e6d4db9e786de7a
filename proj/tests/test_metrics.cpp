#include "lafb/metrics.hpp"
#include "metric_oracles.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cfloat>
#include <random>

using namespace lafb;

using namespace metric_oracle;

TEST(Mae, IdentitiesAndLoop)
{
    std::mt19937_64 rng(1);
    Tensor g = binary_map(9, 11, rng, 0.4);
    EXPECT_EQ(mae(g, g), 0.0);
    Tensor inv = g;
    for (double& v : inv.data()) v = 1.0 - v;
    EXPECT_EQ(mae(inv, g), 1.0);
    Tensor s = oracle::random_tensor({1, 9, 11}, rng, 0, 1);
    double acc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::abs(s[i] - g[i]);
    EXPECT_NEAR(mae(s, g), acc / double(s.size()), 1e-15);
    EXPECT_THROW(mae(s, Tensor(Shape{1, 9, 10})), DimensionError);
    EXPECT_THROW(mae(Tensor(Shape{2, 9, 11}), Tensor(Shape{2, 9, 11})), DimensionError);
}

TEST(FMeasure, PerfectMapAndAnalyticHalf)
{
    std::mt19937_64 rng(2);
    Tensor g = binary_map(8, 8, rng, 0.3);
    EXPECT_EQ(f_measure(g, g).f_max, 1.0);
    Tensor s(Shape{1, 2, 2}, std::vector<double>{1, 0, 1, 0});
    Tensor h(Shape{1, 2, 2}, std::vector<double>{1, 1, 0, 0});
    EXPECT_NEAR(f_curve(s, h)[128], 0.5, 1e-15);
    EXPECT_NEAR(f_curve(s, h)[128], 1.3 * 0.25 / 0.65, 1e-15);
}

TEST(FMeasure, MatchesConfusionLoopOracle)
{
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        Tensor g = binary_map(16, 13, rng, 0.35);
        Tensor s = oracle::random_tensor({1, 16, 13}, rng, 0, 1);
        for (std::size_t i = 0; i < 20; ++i) s[i] = double(i * 13 % 256) / 255.0;   // exact threshold hits
        FCurve c = f_curve(s, g);
        double mean = 0, mx = 0;
        for (std::size_t t = 0; t < 256; ++t) {
            const double ref = f_threshold_oracle(s, g, t);
            EXPECT_NEAR(c[t], ref, 1e-12) << "t=" << t;
            mean += ref / 256.0;
            mx = std::max(mx, ref);
        }
        FMeasure f = f_measure(s, g);
        EXPECT_NEAR(f.f_mean, mean, 1e-10);
        EXPECT_NEAR(f.f_max, mx, 1e-10);
        EXPECT_GE(f.f_max, f.f_mean);
    }
}

TEST(WeightedF, Identities)
{
    std::mt19937_64 rng(4);
    Tensor g = blob_map(12, 12, rng);
    EXPECT_NEAR(weighted_f(g, g), 1.0, 1e-12);
    Tensor inv = g;
    for (double& v : inv.data()) v = 1.0 - v;
    EXPECT_NEAR(weighted_f(inv, g), 0.0, 1e-12);
    EXPECT_EQ(weighted_f(oracle::random_tensor({1, 12, 12}, rng, 0, 1), Tensor(Shape{1, 12, 12})), 0.0);
}

TEST(WeightedF, MatchesDenseMatrixOracle)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 6; ++rep) {
        const std::size_t h = 6 + rep * 2, w = 16 - rep;
        Tensor g = rep % 2 ? blob_map(h, w, rng) : binary_map(h, w, rng, 0.2);
        Tensor s = oracle::random_tensor({1, h, w}, rng, 0, 1);
        const double v = weighted_f(s, g);
        EXPECT_NEAR(v, weighted_f_oracle(s, g), 1e-10);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(EMeasure, IdentitiesAndDegenerateBranches)
{
    std::mt19937_64 rng(6);
    Tensor g = blob_map(10, 10, rng);
    EXPECT_NEAR(e_measure(g, g), 1.0, 1e-12);
    Tensor inv = g;
    for (double& v : inv.data()) v = 1.0 - v;
    EXPECT_NEAR(e_measure(inv, g), e_measure_oracle(inv, g), 1e-12);

    Tensor zero(Shape{1, 10, 10});
    Tensor s = oracle::random_tensor({1, 10, 10}, rng, 0, 1);
    double expect = 0, m = 0;
    for (double v : s.data()) m += v / 100.0;
    for (double v : s.data()) expect += (v >= std::min(1.0, 2 * m) ? 0.0 : 1.0) / 100.0;
    EXPECT_NEAR(e_measure(s, zero), expect, 1e-15);
    Tensor one = Tensor::full({1, 10, 10}, 1.0);
    EXPECT_NEAR(e_measure(s, one), 1.0 - expect, 1e-15);
}

TEST(EMeasure, MatchesDenseFormulaOracle)
{
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 8; ++rep) {
        Tensor g = binary_map(16, 16, rng, 0.1 + 0.1 * rep);
        Tensor s = oracle::random_tensor({1, 16, 16}, rng, 0, 1);
        const double v = e_measure(s, g);
        EXPECT_NEAR(v, e_measure_oracle(s, g), 1e-10);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

class ReportTest : public ::testing::Test {
protected:
    std::mt19937_64 rng{8};
    std::vector<Tensor> preds, gts;
    std::vector<LabelSet> labels;

    void make(std::size_t n, bool disjoint)
    {
        for (std::size_t i = 0; i < n; ++i) {
            gts.push_back(blob_map(12, 12, rng));
            preds.push_back(oracle::random_tensor({1, 12, 12}, rng, 0, 1));
            if (disjoint)
                labels.push_back(LabelSet{kAllChallenges[i % 5]});
            else
                labels.push_back(LabelSet{kAllChallenges[i % 5], kAllChallenges[(i * 3 + 1) % 5]});
        }
    }
};

TEST_F(ReportTest, SingleSampleSplitsEqualOverall)
{
    make(1, false);
    MetricReport r = report(preds, gts, labels);
    ASSERT_EQ(r.per_challenge.size(), labels[0].list().size());
    for (const auto& [c, sub] : r.per_challenge) {
        EXPECT_EQ(sub.mae, r.mae);
        EXPECT_EQ(sub.e_measure, r.e_measure);
        EXPECT_EQ(sub.weighted_f, r.weighted_f);
        EXPECT_EQ(sub.f_max, r.f_max);
    }
}

TEST_F(ReportTest, DisjointSubsetsAverageToOverall)
{
    make(13, true);
    MetricReport r = report(preds, gts, labels);
    double acc = 0;
    std::size_t n = 0;
    for (const auto& [c, sub] : r.per_challenge) {
        acc += sub.mae * double(sub.count);
        n += sub.count;
    }
    EXPECT_EQ(n, 13u);
    EXPECT_NEAR(r.mae, acc / 13.0, 1e-14);
}

TEST_F(ReportTest, SplitsMatchFilterThenRecompute)
{
    make(17, false);
    MetricReport r = report(preds, gts, labels);
    for (Challenge c : kAllChallenges) {
        std::vector<Tensor> sp, sg;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (labels[i].has(c)) {
                sp.push_back(preds[i]);
                sg.push_back(gts[i]);
            }
        ASSERT_FALSE(sp.empty());
        MetricReport ref = report(sp, sg, {});
        const MetricReport& sub = r.per_challenge.at(c);
        EXPECT_NEAR(sub.mae, ref.mae, 1e-12);
        EXPECT_NEAR(sub.e_measure, ref.e_measure, 1e-12);
        EXPECT_NEAR(sub.weighted_f, ref.weighted_f, 1e-12);
        EXPECT_NEAR(sub.f_max, ref.f_max, 1e-12);
        EXPECT_EQ(sub.count, sp.size());
    }
}

TEST_F(ReportTest, PermutationInvariantAndBounded)
{
    make(9, false);
    MetricReport a = report(preds, gts, labels);
    std::vector<std::size_t> perm{3, 1, 8, 0, 5, 2, 7, 6, 4};
    std::vector<Tensor> p2, g2;
    std::vector<LabelSet> l2;
    for (std::size_t i : perm) {
        p2.push_back(preds[i]);
        g2.push_back(gts[i]);
        l2.push_back(labels[i]);
    }
    MetricReport b = report(p2, g2, l2);
    EXPECT_NEAR(a.mae, b.mae, 1e-14);
    EXPECT_NEAR(a.f_max, b.f_max, 1e-14);
    EXPECT_NEAR(a.weighted_f, b.weighted_f, 1e-14);
    for (double v : {a.mae, a.e_measure, a.weighted_f, a.f_mean, a.f_max}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(a.f_max, a.f_mean);
}

TEST_F(ReportTest, ErrorsAndOutputFormats)
{
    EXPECT_THROW(report(std::vector<Tensor>{}, std::vector<Tensor>{}, {}), ContractError);
    make(4, false);
    EXPECT_THROW(report(preds, std::vector<Tensor>(gts.begin(), gts.end() - 1), {}), ContractError);
    MetricReport with = report(preds, gts, labels);
    MetricReport without = report(preds, gts, {});
    EXPECT_TRUE(without.per_challenge.empty());
    const std::string csv = report_csv(with, "lafb", "synth");
    EXPECT_NE(csv.find("method,dataset,n,E,wF,Fmean,Fmax,MAE"), std::string::npos);
    EXPECT_NE(csv.find("LI_MAE"), std::string::npos);
    EXPECT_EQ(report_csv(without, "lafb", "synth").find("_MAE"), std::string::npos);
    EXPECT_NE(report_table(with, "lafb", "synth").find("Fmax"), std::string::npos);
}
