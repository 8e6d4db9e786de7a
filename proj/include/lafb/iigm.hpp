#pragma once

#include "lafb/ops.hpp"

#include <array>
#include <string>

namespace lafb {

/// The four 3x3 convolutions of one guidance group. Each folds the channel change
/// between levels into the convolution itself.
struct IigmGroupParams {
    ConvParams high_from_mid;   ///< 5C_mid -> 5C_lo, applied to Us(FB_mid)
    ConvParams high_from_hi;    ///< 5C_hi  -> 5C_lo, applied to Us(FB_hi)
    ConvParams low_from_lo;     ///< 5C_lo  -> 5C_hi, applied to Ds(FB_lo)
    ConvParams low_from_mid;    ///< 5C_mid -> 5C_hi, applied to Ds(FB_mid)
};

struct GuidanceWeights {
    Var w_high;   ///< gates the low (fine) level
    Var w_low;    ///< gates the high (coarse) level
};

struct IigmGroupOutput {
    GuidanceWeights weights;
    Var i_lo;
    Var i_hi;
};

namespace detail {

inline void check_guidance_conv(const ConvParams& p, std::size_t in, std::size_t out, const char* name)
{
    const Shape& s = p.weight.shape();
    if (s.size() != 4 || s[0] != out || s[1] != in || s[2] != 3 || s[3] != 3 || p.stride != 1 || p.padding != 1 ||
        p.dilation != 1)
        throw ConfigError(std::string("iigm: ") + name + " must be a 3x3 pad-1 conv mapping " + std::to_string(in) +
                          " -> " + std::to_string(out) + " channels, got weight " + shape_str(s));
}

}  // namespace detail

/// One group of three adjacent levels; the middle level mediates between the outer two.
///   W_high = sigmoid(Conv(Us(fb_mid)) + Conv(Us(fb_hi)))   at fb_lo's size
///   W_low  = sigmoid(Conv(Ds(fb_lo)) + Conv(Ds(fb_mid)))   at fb_hi's size
///   I_lo = fb_lo + fb_lo * W_high,  I_hi = fb_hi + fb_hi * W_low
inline IigmGroupOutput iigm_group(Var fb_lo, Var fb_mid, Var fb_hi, const IigmGroupParams& p)
{
    for (Var v : {fb_lo, fb_mid, fb_hi}) require_rank(v.value(), 4, "iigm_group");
    const std::size_t c_lo = fb_lo.dim(1), c_mid = fb_mid.dim(1), c_hi = fb_hi.dim(1);
    detail::check_guidance_conv(p.high_from_mid, c_mid, c_lo, "high_from_mid");
    detail::check_guidance_conv(p.high_from_hi, c_hi, c_lo, "high_from_hi");
    detail::check_guidance_conv(p.low_from_lo, c_lo, c_hi, "low_from_lo");
    detail::check_guidance_conv(p.low_from_mid, c_mid, c_hi, "low_from_mid");

    Var w_high = sigmoid(add(conv2d(resize_like(fb_mid, fb_lo), p.high_from_mid),
                             conv2d(resize_like(fb_hi, fb_lo), p.high_from_hi)));
    Var w_low = sigmoid(add(conv2d(resize_like(fb_lo, fb_hi), p.low_from_lo),
                            conv2d(resize_like(fb_mid, fb_hi), p.low_from_mid)));
    Var i_lo = add(fb_lo, mul(fb_lo, w_high));
    Var i_hi = add(fb_hi, mul(fb_hi, w_low));
    return {{w_high, w_low}, i_lo, i_hi};
}

/// Guided features I_2..I_5, indexed by level.
struct GuidedPyramid {
    std::array<Var, 4> levels;

    Var& at(int level) { return levels.at(static_cast<std::size_t>(level - 2)); }
    const Var& at(int level) const { return levels.at(static_cast<std::size_t>(level - 2)); }
};

/// Applies the two groups (FB2, FB3, FB4) and (FB3, FB4, FB5). The first yields I2 and I4,
/// the second I3 and I5, so every level is written exactly once. With `enabled` false the
/// pyramid passes through unchanged.
inline GuidedPyramid iigm_all(const std::array<Var, 4>& fb, const IigmGroupParams* group3,
                              const IigmGroupParams* group4, bool enabled = true)
{
    for (std::size_t k = 0; k < fb.size(); ++k)
        if (!fb[k].valid()) throw ContractError("iigm: bank output for level " + std::to_string(k + 2) + " is missing");
    GuidedPyramid out;
    if (!enabled) {
        out.levels = fb;
        return out;
    }
    if (!group3 || !group4) throw ConfigError("iigm: group parameters missing");
    const IigmGroupOutput g3 = iigm_group(fb[0], fb[1], fb[2], *group3);
    const IigmGroupOutput g4 = iigm_group(fb[1], fb[2], fb[3], *group4);
    out.at(2) = g3.i_lo;
    out.at(4) = g3.i_hi;
    out.at(3) = g4.i_lo;
    out.at(5) = g4.i_hi;
    return out;
}

}  // namespace lafb
