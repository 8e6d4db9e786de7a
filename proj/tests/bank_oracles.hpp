#pragma once

#include "lafb/fusion_bank.hpp"
#include "oracles.hpp"

#include <random>

namespace bank_oracle {

using namespace lafb;

/// Tensor-level description of one conv, used on both the library and the oracle side.
struct ConvSpec {
    Tensor w, b;
    int pad = 1, dil = 1;
};

inline ConvSpec random_conv(std::mt19937_64& rng, std::size_t out, std::size_t in, std::size_t k, int pad, int dil,
                     double scale = 0.3)
{
    return {oracle::random_tensor({out, in, k, k}, rng, -scale, scale), oracle::random_tensor({out}, rng, -0.1, 0.1),
            pad, dil};
}

inline ConvSpec zero_conv(std::size_t out, std::size_t in, std::size_t k, int pad, int dil)
{
    return {Tensor(Shape{out, in, k, k}), Tensor(Shape{out}), pad, dil};
}

inline ConvParams bind(Tape& t, const ConvSpec& s)
{
    return ConvParams{t.leaf(s.w), t.leaf(s.b), 1, s.pad, s.dil};
}

inline Tensor oconv(const Tensor& x, const ConvSpec& s)
{
    return oracle::conv2d(x, s.w, &s.b, 1, s.pad, s.dil);
}

struct BankSpecs {
    ConvSpec cb, sv, ic1, ic2, li, td, avg, max;
};

inline BankSpecs random_bank(std::mt19937_64& rng, std::size_t c)
{
    return {random_conv(rng, c, 2 * c, 3, 1, 1),     random_conv(rng, c, 2 * c, 3, 2, 2),
            random_conv(rng, 2 * c, 2 * c, 3, 1, 1), random_conv(rng, c, 2 * c, 3, 1, 1),
            random_conv(rng, c, c, 3, 1, 1),         random_conv(rng, c, c, 3, 1, 1),
            random_conv(rng, 5 * c, 5 * c, 1, 0, 1), random_conv(rng, 5 * c, 5 * c, 1, 0, 1)};
}

inline BankParams bind_bank(Tape& t, const BankSpecs& s)
{
    BankParams p;
    p.cb = bind(t, s.cb);
    p.sv = bind(t, s.sv);
    p.ic_inner = bind(t, s.ic1);
    p.ic_outer = bind(t, s.ic2);
    p.li = bind(t, s.li);
    p.td = bind(t, s.td);
    p.aem_avg = bind(t, s.avg);
    p.aem_max = bind(t, s.max);
    return p;
}

struct OracleBank {
    Tensor cb, sv, ic, li, td, cat5, v, fb;
};

inline OracleBank oracle_bank(const Tensor& fr, const Tensor& fa, const BankSpecs& s)
{
    OracleBank o;
    const Tensor fcat = oracle::concat({&fr, &fa});
    o.cb = oracle::relu(oconv(fcat, s.cb));
    o.sv = oracle::relu(oconv(fcat, s.sv));
    o.ic = oracle::relu(oconv(oracle::add(oracle::relu(oconv(fcat, s.ic1)), fcat), s.ic2));
    o.li = oracle::add(oracle::mul(oracle::sigmoid(oconv(fa, s.li)), fr), fr);
    o.td = oracle::add(oracle::mul(oracle::sigmoid(oconv(fr, s.td)), fa), fa);
    o.cat5 = oracle::concat({&o.cb, &o.sv, &o.ic, &o.li, &o.td});
    const Tensor a = oracle::matvec(s.avg.w, s.avg.b, oracle::pool(o.cat5, false));
    const Tensor m = oracle::matvec(s.max.w, s.max.b, oracle::pool(o.cat5, true));
    o.v = oracle::sigmoid(oracle::add(a, m));
    o.fb = oracle::broadcast_mul(o.v, o.cat5);
    return o;
}

}  // namespace bank_oracle
