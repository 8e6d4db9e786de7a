#include "lafb/checkpoint.hpp"
#include "lafb/gradcheck.hpp"
#include "lafb/network.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace lafb;

namespace {

ModelConfig tiny_config()
{
    ModelConfig c;
    c.encoder.input_size = 32;
    c.encoder.stem_channels = 2;
    c.encoder.channels = {2, 3, 3, 4};
    c.decoder_width = 3;
    return c;
}

Tensor rfb_oracle(ParamStore& p, int level, const Tensor& x)
{
    const std::string pre = "dec.rfb" + std::to_string(level) + ".";
    auto c = [&](const std::string& n, int pad, int dil) { return oracle::conv2d(x, p.at(pre + n + ".w"), nullptr, 1, pad, dil); };
    Tensor b0 = oracle::relu(c("b0", 0, 1)), b1 = oracle::relu(c("b1", 1, 1));
    Tensor b2 = oracle::relu(c("b2", 3, 3)), b3 = oracle::relu(c("b3", 5, 5));
    Tensor proj = oracle::conv2d(oracle::concat({&b0, &b1, &b2, &b3}), p.at(pre + "proj.w"), nullptr, 1, 0, 1);
    return oracle::relu(oracle::add(proj, c("shortcut", 0, 1)));
}

std::array<Tensor, 4> decode_oracle(ParamStore& p, const std::array<Tensor, 4>& guided, std::size_t n)
{
    std::array<Tensor, 4> maps;
    auto head = [&](int level, const Tensor& d) {
        const std::string h = "dec.head" + std::to_string(level);
        return oracle::bilinear(oracle::sigmoid(oracle::conv2d(d, p.at(h + ".w"), &p.at(h + ".b"), 1, 0, 1)), n, n);
    };
    Tensor d = rfb_oracle(p, 5, guided[3]);
    maps[3] = head(5, d);
    for (int level = 4; level >= 2; --level) {
        Tensor r = rfb_oracle(p, level, guided[std::size_t(level - 2)]);
        Tensor up = oracle::bilinear(d, r.shape()[2], r.shape()[3]);
        const std::string f = "dec.fuse" + std::to_string(level);
        d = oracle::relu(oracle::conv2d(oracle::concat({&r, &up}), p.at(f + ".w"), &p.at(f + ".b"), 1, 1, 1));
        maps[std::size_t(level - 2)] = head(level, d);
    }
    return maps;
}

}  // namespace

class NetworkTest : public ::testing::Test {
protected:
    std::mt19937_64 rng{21};

    std::pair<Tensor, Tensor> inputs(std::size_t n, std::size_t batch = 2)
    {
        return {oracle::random_tensor({batch, 3, n, n}, rng, 0, 1), oracle::random_tensor({batch, 3, n, n}, rng, 0, 1)};
    }
};

TEST_F(NetworkTest, EncoderLevelGeometry)
{
    Model m{ModelConfig{}};
    m.init(7);
    auto [rgb, aux] = inputs(64, 1);
    Tape t;
    Binding b(t, m.params(), false);
    auto f = m.encode(b, t.constant(rgb), t.constant(aux));
    const std::size_t ext[] = {16, 8, 4, 2}, ch[] = {16, 32, 64, 128};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(f[k].level, int(k + 2));
        EXPECT_EQ(f[k].f_r.shape(), (Shape{1, ch[k], ext[k], ext[k]}));
        EXPECT_EQ(f[k].f_cat.dim(1), 2 * ch[k]);
    }
}

TEST_F(NetworkTest, EncoderRejectsWrongInputSize)
{
    Model m{tiny_config()};
    auto [rgb, aux] = inputs(64, 1);
    Tape t;
    Binding b(t, m.params(), false);
    EXPECT_THROW(m.encode(b, t.constant(rgb), t.constant(aux)), DimensionError);
    EXPECT_THROW(m.encode(b, t.constant(Tensor(Shape{1, 1, 32, 32})), t.constant(Tensor(Shape{1, 1, 32, 32}))),
                 DimensionError);
}

TEST_F(NetworkTest, IdenticalStreamsGiveIdenticalFeatures)
{
    Model m{tiny_config()};
    m.init(3);
    ParamStore& p = m.params();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.name(i).rfind("enc.rgb.", 0) == 0) p.at("enc.aux." + p.name(i).substr(8)) = p.value(i);
    auto [rgb, aux] = inputs(32);
    Tape t;
    Binding b(t, p, false);
    Var x = t.constant(rgb);
    auto f = m.encode(b, x, x);
    for (const auto& mf : f) EXPECT_EQ(mf.f_r.value(), mf.f_aux.value());
}

TEST_F(NetworkTest, ZeroInputZeroBiasGivesZeroFeatures)
{
    Model m{tiny_config()};
    m.init(4);
    ParamStore& p = m.params();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.name(i).size() > 2 && p.name(i).substr(p.name(i).size() - 2) == ".b") p.value(i).fill(0.0);
    Tape t;
    Binding b(t, p, false);
    Var z = t.constant(Tensor(Shape{1, 3, 32, 32}));
    for (const auto& mf : m.encode(b, z, z)) {
        for (double v : mf.f_r.value().data()) EXPECT_EQ(v, 0.0);
        for (double v : mf.f_aux.value().data()) EXPECT_EQ(v, 0.0);
    }
}

TEST_F(NetworkTest, RfbZeroShapeAndOracle)
{
    Model m{tiny_config()};
    m.init(5);
    const std::size_t w = m.config().bank_width(3);
    Tape t;
    Binding b(t, m.params(), false);
    Var zero = m.rfb(b, 3, t.constant(Tensor(Shape{2, w, 4, 4})));
    EXPECT_EQ(zero.shape(), (Shape{2, 3, 4, 4}));
    for (double v : zero.value().data()) EXPECT_EQ(v, 0.0);

    Tensor x = oracle::random_tensor({2, w, 4, 4}, rng);
    Var y = m.rfb(b, 3, t.constant(x));
    EXPECT_LT(oracle::max_abs_diff(y.value(), rfb_oracle(m.params(), 3, x)), 1e-12);
}

TEST_F(NetworkTest, DecodeZeroParamsIsHalf)
{
    Model m{tiny_config()};
    m.params().fill(0.0);
    Tape t;
    Binding b(t, m.params(), false);
    GuidedPyramid g;
    for (int level = 2; level <= 5; ++level)
        g.at(level) = t.constant(oracle::random_tensor({2, m.config().bank_width(level), 32u >> level, 32u >> level}, rng));
    SaliencyOutputs s = m.decode(b, g);
    for (const Var& map : s.maps) {
        EXPECT_EQ(map.shape(), (Shape{2, 1, 32, 32}));
        for (double v : map.value().data()) EXPECT_EQ(v, 0.5);
    }
    g.at(3) = Var();
    EXPECT_THROW(m.decode(b, g), ContractError);
}

TEST_F(NetworkTest, DecodeMatchesComposedOracle)
{
    Model m{tiny_config()};
    m.init(6);
    std::array<Tensor, 4> guided;
    Tape t;
    Binding b(t, m.params(), false);
    GuidedPyramid g;
    for (int level = 2; level <= 5; ++level) {
        guided[std::size_t(level - 2)] =
            oracle::random_tensor({2, m.config().bank_width(level), 32u >> level, 32u >> level}, rng);
        g.at(level) = t.constant(guided[std::size_t(level - 2)]);
    }
    SaliencyOutputs s = m.decode(b, g);
    auto ref = decode_oracle(m.params(), guided, 32);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(oracle::max_abs_diff(s.maps[k].value(), ref[k]), 1e-12);
}

TEST_F(NetworkTest, ZeroParamsGiveHalfMapsInEveryMode)
{
    auto [rgb, aux] = inputs(32);
    for (int mode = 0; mode < 3; ++mode) {
        ModelConfig c = tiny_config();
        c.ablation.no_afb = mode == 1;
        c.ablation.no_iigm = mode >= 1;
        c.ablation.no_aem = mode == 2;
        Model m{c};
        m.params().fill(0.0);
        Tape t;
        ForwardResult r = m.forward(t, rgb, aux);
        for (const Var& map : r.maps.maps)
            for (double v : map.value().data()) EXPECT_EQ(v, 0.5);
    }
}

TEST_F(NetworkTest, SaliencyStrictlyInsideUnitInterval)
{
    Model m{tiny_config()};
    m.init(8);
    for (std::size_t i = 0; i < m.params().size(); ++i)
        for (double& v : m.params().value(i).data()) v *= 40.0;
    auto [rgb, aux] = inputs(32);
    Tape t;
    for (const Var& map : m.forward(t, rgb, aux).maps.maps)
        for (double v : map.value().data()) {
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
}

TEST_F(NetworkTest, DeterministicReplay)
{
    auto [rgb, aux] = inputs(32);
    Model a{tiny_config()}, b{tiny_config()};
    a.init(7);
    b.init(7);
    Tape ta, tb;
    EXPECT_EQ(a.forward(ta, rgb, aux).maps.s(2).value(), b.forward(tb, rgb, aux).maps.s(2).value());
    Model c{tiny_config()};
    c.init(8);
    Tape tc;
    EXPECT_NE(a.forward(ta, rgb, aux).maps.s(2).value(), c.forward(tc, rgb, aux).maps.s(2).value());
}

TEST_F(NetworkTest, NoIigmFeedsBankOutputUnchanged)
{
    ModelConfig c = tiny_config();
    c.ablation.no_iigm = true;
    Model m{c};
    m.init(9);
    EXPECT_EQ(m.params().count("iigm."), 0u);
    auto [rgb, aux] = inputs(32);
    Tape t;
    ForwardResult r = m.forward(t, rgb, aux);
    for (int level = 2; level <= 5; ++level)
        EXPECT_EQ(r.guided.at(level).value(), r.bank[std::size_t(level - 2)].value());
}

TEST_F(NetworkTest, NoAfbUsesPlainConcatenation)
{
    ModelConfig c = tiny_config();
    c.ablation.no_afb = true;
    Model m{c};
    m.init(10);
    EXPECT_EQ(m.params().count("bank."), 0u);
    auto [rgb, aux] = inputs(32);
    Tape t;
    ForwardResult r = m.forward(t, rgb, aux);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(r.bank[k].value(), r.features[k].f_cat.value());
        EXPECT_FALSE(r.weights[k].has_value());
    }
}

TEST_F(NetworkTest, SchemeSubsetNarrowsBank)
{
    ModelConfig c = tiny_config();
    c.ablation.schemes = {Scheme::td, Scheme::cb};
    Model m{c};
    m.init(11);
    auto [rgb, aux] = inputs(32);
    Tape t;
    ForwardResult r = m.forward(t, rgb, aux);
    EXPECT_EQ(r.bank[0].dim(1), 2 * c.encoder.channels[0]);
    ASSERT_TRUE(r.weights[3].has_value());
    EXPECT_EQ(r.weights[3]->order, (std::vector<Scheme>{Scheme::cb, Scheme::td}));
    EXPECT_FALSE(m.params().find("bank.l2.sv.w").has_value());
}

TEST_F(NetworkTest, ConfigValidation)
{
    ModelConfig c = tiny_config();
    c.ablation.no_afb = true;
    c.ablation.schemes = {Scheme::li};
    EXPECT_THROW(Model{c}, ConfigError);
    c = tiny_config();
    c.ablation.schemes = {};
    EXPECT_THROW(Model{c}, ConfigError);
    c = tiny_config();
    c.encoder.input_size = 48;
    EXPECT_THROW(Model{c}, ConfigError);
    c = tiny_config();
    c.ablation.no_afb = c.ablation.no_aem = true;
    EXPECT_NO_THROW(Model{c});
}

TEST_F(NetworkTest, ConfigTextRoundTrip)
{
    ModelConfig c = tiny_config();
    c.ablation.no_aem = true;
    c.ablation.schemes = {Scheme::ic, Scheme::sv};
    ModelConfig back = ModelConfig::from_kv(KeyValues::parse(c.to_kv().str()));
    EXPECT_EQ(back.to_kv().str(), c.to_kv().str());
    EXPECT_EQ(back.encoder.channels, c.encoder.channels);
    EXPECT_THROW(ModelConfig::from_kv(KeyValues::parse("schemes = cb,xx")), ConfigError);
}

TEST_F(NetworkTest, GradcheckSampledParameters)
{
    Model m{tiny_config()};
    m.init(12);
    auto [rgb, aux] = inputs(32, 1);
    std::vector<Tensor*> leaves;
    for (std::size_t i = 0; i < m.params().size(); ++i) leaves.push_back(&m.params().value(i));
    GradcheckOptions opt;
    opt.fraction = 0.01;
    auto r = gradcheck(
        [&](Tape& t, std::span<const Var> v) {
            Binding b(std::vector<Var>(v.begin(), v.end()));
            return sum(m.forward(b, t.constant(rgb), t.constant(aux)).maps.s(2));
        },
        leaves, opt);
    EXPECT_GT(r.probed, 10u);
    EXPECT_LT(r.max_rel_error, 1e-3);
}

TEST_F(NetworkTest, CheckpointRoundTrip)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lafb_test_network";
    fs::create_directories(dir);
    const std::string path = (dir / "model.ckpt").string();

    ModelConfig c = tiny_config();
    c.ablation.no_afb = true;
    Model m{c};
    m.init(13);
    save_checkpoint(m, path);
    Model back = load_checkpoint(path);
    ASSERT_EQ(back.params().size(), m.params().size());
    for (std::size_t i = 0; i < m.params().size(); ++i) EXPECT_EQ(back.params().value(i), m.params().value(i));
    EXPECT_TRUE(back.config().ablation.no_afb);

    std::ifstream man(path + ".manifest");
    std::stringstream ss;
    ss << man.rdbuf();
    EXPECT_NE(ss.str().find("params_fusion_bank = 0\n"), std::string::npos);

    std::ofstream(dir / "bad.ckpt") << "NOTACKPT";
    EXPECT_THROW(load_checkpoint((dir / "bad.ckpt").string()), IoError);
    EXPECT_THROW(load_checkpoint((dir / "missing.ckpt").string()), IoError);
    fs::remove_all(dir);
}
