#include "lafb/fusion_bank.hpp"
#include "lafb/gradcheck.hpp"
#include "bank_oracles.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <random>

using namespace lafb;

using namespace bank_oracle;

class FusionBankTest : public ::testing::Test {
protected:
    std::mt19937_64 rng{42};
    const std::size_t c = 3;
    Tensor fr = oracle::random_tensor({2, c, 6, 5}, rng);
    Tensor fa = oracle::random_tensor({2, c, 6, 5}, rng);
};

TEST_F(FusionBankTest, ModalFeaturesConcatenateExactly)
{
    Tape t;
    auto m = ModalFeatures::make(3, t.constant(fr), t.constant(fa));
    EXPECT_EQ(m.f_cat.value(), oracle::concat({&fr, &fa}));
    EXPECT_THROW(ModalFeatures::make(3, t.constant(fr), t.constant(Tensor(Shape{2, c, 6, 4}))), DimensionError);
}

TEST_F(FusionBankTest, CenterBiasDiracAndZero)
{
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(Tensor::full({1, c, 4, 4}, 1.0)), t.constant(Tensor::full({1, c, 4, 4}, 1.0)));
    ConvSpec dirac = zero_conv(c, 2 * c, 3, 1, 1);
    for (std::size_t o = 0; o < c; ++o)
        for (std::size_t i = 0; i < 2 * c; ++i) dirac.w.at(o, i, 1, 1) = 1.0;
    EXPECT_EQ(fuse_cb(m, bind(t, dirac)).value(), Tensor::full({1, c, 4, 4}, double(2 * c)));
    EXPECT_EQ(fuse_cb(m, bind(t, zero_conv(c, 2 * c, 3, 1, 1))).value(), Tensor::full({1, c, 4, 4}, 0.0));
    EXPECT_THROW(fuse_cb(m, bind(t, zero_conv(c, 2 * c + 1, 3, 1, 1))), DimensionError);
}

TEST_F(FusionBankTest, SchemesMatchComposedOracles)
{
    BankSpecs s = random_bank(rng, c);
    OracleBank o = oracle_bank(fr, fa, s);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    EXPECT_LT(oracle::max_abs_diff(fuse_cb(m, bind(t, s.cb)).value(), o.cb), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(fuse_sv(m, bind(t, s.sv)).value(), o.sv), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(fuse_ic(m, bind(t, s.ic1), bind(t, s.ic2)).value(), o.ic), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(fuse_li(m, bind(t, s.li)).out.value(), o.li), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(fuse_td(m, bind(t, s.td)).out.value(), o.td), 1e-12);
}

TEST_F(FusionBankTest, DilatedSchemeOnConstantField)
{
    Tape t;
    const double k = 0.25;
    auto m = ModalFeatures::make(2, t.constant(Tensor::full({1, c, 7, 7}, k)), t.constant(Tensor::full({1, c, 7, 7}, k)));
    ConvSpec ones{Tensor::full({c, 2 * c, 3, 3}, 1.0), Tensor(Shape{c}), 2, 2};
    const Tensor out = fuse_sv(m, bind(t, ones)).value();
    // interior pixels see the full 5x5 dilated footprint
    for (std::size_t y = 2; y < 5; ++y)
        for (std::size_t x = 2; x < 5; ++x) EXPECT_DOUBLE_EQ(out.at(0, 0, y, x), 9.0 * 2 * c * k);
    EXPECT_LT(out.at(0, 0, 0, 0), 9.0 * 2 * c * k);
    EXPECT_EQ(fuse_sv(m, bind(t, zero_conv(c, 2 * c, 3, 2, 2))).value(), Tensor::full({1, c, 7, 7}, 0.0));
    EXPECT_THROW(fuse_sv(m, bind(t, zero_conv(c, 2 * c, 3, 1, 1))), ConfigError);
}

TEST_F(FusionBankTest, ImageClutterReducesWithZeroInnerBlock)
{
    ConvSpec outer = random_conv(rng, c, 2 * c, 3, 1, 1);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    EXPECT_EQ(fuse_ic(m, bind(t, zero_conv(2 * c, 2 * c, 3, 1, 1)), bind(t, outer)).value(),
              fuse_cb(m, bind(t, outer)).value());
    auto zero = ModalFeatures::make(2, t.constant(Tensor(Shape{1, c, 4, 4})), t.constant(Tensor(Shape{1, c, 4, 4})));
    ConvSpec inner = random_conv(rng, 2 * c, 2 * c, 3, 1, 1);
    inner.b.fill(0.0);
    ConvSpec outer0 = outer;
    outer0.b.fill(0.0);
    EXPECT_EQ(fuse_ic(zero, bind(t, inner), bind(t, outer0)).value(), Tensor(Shape{1, c, 4, 4}));
    EXPECT_THROW(fuse_ic(m, bind(t, zero_conv(c, 2 * c, 3, 1, 1)), bind(t, outer)), ConfigError);
}

TEST_F(FusionBankTest, GuidedSchemesWithZeroConv)
{
    Tape t;
    Tensor one = Tensor::full({1, c, 4, 4}, 1.0);
    auto m = ModalFeatures::make(2, t.constant(one), t.constant(one));
    auto li = fuse_li(m, bind(t, zero_conv(c, c, 3, 1, 1)));
    EXPECT_EQ(li.weight.w.value(), Tensor::full({1, c, 4, 4}, 0.5));
    EXPECT_EQ(li.out.value(), Tensor::full({1, c, 4, 4}, 1.5));
    auto td = fuse_td(m, bind(t, zero_conv(c, c, 3, 1, 1)));
    EXPECT_EQ(td.weight.role, ModalityWeight::Role::rgb_guides_aux);
    EXPECT_EQ(td.out.value(), Tensor::full({1, c, 4, 4}, 1.5));

    ConvSpec r = random_conv(rng, c, c, 3, 1, 1);
    auto zr = ModalFeatures::make(2, t.constant(Tensor(Shape{2, c, 6, 5})), t.constant(fa));
    EXPECT_EQ(fuse_li(zr, bind(t, r)).out.value(), Tensor(Shape{2, c, 6, 5}));
}

TEST_F(FusionBankTest, GuidedOutputBoundedByBase)
{
    // exhaustive entrywise check: 0 <= f implies f <= W*f + f <= 2f
    for (int trial = 0; trial < 5; ++trial) {
        Tensor pos_r = oracle::random_tensor({2, c, 5, 5}, rng, 0.0, 2.0);
        Tensor aux = oracle::random_tensor({2, c, 5, 5}, rng, -3.0, 3.0);
        ConvSpec p = random_conv(rng, c, c, 3, 1, 1, 2.0);
        Tape t;
        auto m = ModalFeatures::make(2, t.constant(pos_r), t.constant(aux));
        auto li = fuse_li(m, bind(t, p));
        for (std::size_t i = 0; i < pos_r.size(); ++i) {
            EXPECT_GE(li.out.value()[i], pos_r[i]);
            EXPECT_LE(li.out.value()[i], 2.0 * pos_r[i]);
            EXPECT_GT(li.weight.w.value()[i], 0.0);
            EXPECT_LT(li.weight.w.value()[i], 1.0);
        }
    }
}

TEST_F(FusionBankTest, TdIsStructuralMirrorOfLi)
{
    ConvSpec p = random_conv(rng, c, c, 3, 1, 1);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    auto swapped = ModalFeatures::make(2, t.constant(fa), t.constant(fr));
    EXPECT_EQ(fuse_td(m, bind(t, p)).out.value(), fuse_li(swapped, bind(t, p)).out.value());
}

TEST_F(FusionBankTest, AemZeroConvGivesHalfWeights)
{
    BankSpecs s = random_bank(rng, c);
    s.avg = zero_conv(5 * c, 5 * c, 1, 0, 1);
    s.max = zero_conv(5 * c, 5 * c, 1, 0, 1);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    BankOutput out = adaptive_fusion_bank(m, bind_bank(t, s), BankMode::full());
    ASSERT_TRUE(out.weights);
    for (double v : out.weights->v.value().data()) EXPECT_EQ(v, 0.5);
    for (double pm : out.weights->per_scheme_mean) EXPECT_EQ(pm, 0.5);
    const Tensor& cat = out.schemes.f_cat.value();
    for (std::size_t i = 0; i < cat.size(); ++i) EXPECT_EQ(out.fb.value()[i], 0.5 * cat[i]);
}

TEST_F(FusionBankTest, FullBankMatchesEndToEndOracle)
{
    BankSpecs s = random_bank(rng, c);
    OracleBank o = oracle_bank(fr, fa, s);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    BankOutput out = adaptive_fusion_bank(m, bind_bank(t, s), BankMode::full());
    EXPECT_LT(oracle::max_abs_diff(out.schemes.f_cat.value(), o.cat5), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(out.weights->v.value(), o.v), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(out.fb.value(), o.fb), 1e-12);
    EXPECT_EQ(out.fb.shape(), out.schemes.f_cat.shape());

    // FB = V * f_C entrywise, exactly
    const Tensor& v = out.weights->v.value();
    const Tensor& cat = out.schemes.f_cat.value();
    const std::size_t plane = 6 * 5;
    for (std::size_t i = 0; i < cat.size(); ++i) EXPECT_EQ(out.fb.value()[i], v[i / plane] * cat[i]);

    // per-scheme block means reconstruct the mean of V
    double total = 0.0;
    for (double x : v.data()) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
        total += x;
    }
    double from_blocks = 0.0;
    for (double pm : out.weights->per_scheme_mean) from_blocks += pm;
    EXPECT_NEAR(from_blocks / 5.0, total / double(v.size()), 1e-15);
    // block k is the mean of channels [k*c, (k+1)*c)
    double first = 0.0;
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) first += o.v.at(b, ch, 0, 0);
    EXPECT_NEAR(out.weights->per_scheme_mean[0], first / double(2 * c), 1e-12);
}

TEST_F(FusionBankTest, AblationModes)
{
    BankSpecs s = random_bank(rng, c);
    Tape t;
    auto m = ModalFeatures::make(2, t.constant(fr), t.constant(fa));
    BankParams p = bind_bank(t, s);
    BankOutput plain = adaptive_fusion_bank(m, p, BankMode::no_aem());
    EXPECT_FALSE(plain.weights);
    EXPECT_EQ(plain.fb.value(), plain.schemes.f_cat.value());

    BankParams zero_cb = p;
    ConvSpec z = zero_conv(c, 2 * c, 3, 1, 1);
    zero_cb.cb = bind(t, z);
    BankParams sub = zero_cb;
    sub.aem_avg = bind(t, random_conv(rng, c, c, 1, 0, 1));
    sub.aem_max = bind(t, random_conv(rng, c, c, 1, 0, 1));
    BankOutput only_cb = adaptive_fusion_bank(m, sub, BankMode::subset({Scheme::cb}));
    EXPECT_EQ(only_cb.fb.value(), Tensor(Shape{2, c, 6, 5}));

    BankOutput pair = adaptive_fusion_bank(m, p, BankMode::subset({Scheme::li, Scheme::sv}, false));
    EXPECT_EQ(pair.fb.dim(1), 2 * c);
    EXPECT_EQ(pair.schemes.order, (std::vector<Scheme>{Scheme::sv, Scheme::li}));

    EXPECT_THROW(adaptive_fusion_bank(m, p, BankMode::subset({})), ConfigError);
    EXPECT_THROW(adaptive_fusion_bank(m, p, BankMode::subset({Scheme::cb, Scheme::cb})), ConfigError);
}

TEST_F(FusionBankTest, GradientsFlowThroughEveryScheme)
{
    std::mt19937_64 r(9);
    const std::size_t cc = 2;
    BankSpecs s = random_bank(r, cc);
    Tensor a = oracle::random_tensor({1, cc, 4, 4}, r);
    Tensor b = oracle::random_tensor({1, cc, 4, 4}, r);
    std::vector<Tensor*> leaves{&a, &b};
    for (ConvSpec* cs : {&s.cb, &s.sv, &s.ic1, &s.ic2, &s.li, &s.td, &s.avg, &s.max}) {
        leaves.push_back(&cs->w);
        leaves.push_back(&cs->b);
    }
    auto res = gradcheck(
        [&](Tape&, std::span<const Var> v) {
            auto conv = [&](std::size_t k, int pad, int dil) { return ConvParams{v[2 + 2 * k], v[3 + 2 * k], 1, pad, dil}; };
            BankParams p{conv(0, 1, 1), conv(1, 2, 2), conv(2, 1, 1), conv(3, 1, 1),
                         conv(4, 1, 1), conv(5, 1, 1), conv(6, 0, 1), conv(7, 0, 1)};
            auto m = ModalFeatures::make(2, v[0], v[1]);
            return sum(adaptive_fusion_bank(m, p, BankMode::full()).fb);
        },
        leaves);
    EXPECT_LT(res.max_rel_error, 1e-3);
}

TEST(SchemeNames, ParseRoundTrip)
{
    for (Scheme s : kAllSchemes) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
    EXPECT_FALSE(parse_scheme("xx"));
}
