#pragma once

#include "lafb/ops.hpp"

#include <array>
#include <cmath>
#include <string>

namespace lafb {

/// Saliency maps S2..S5 at input resolution; S2 is the final prediction.
struct SaliencyOutputs {
    std::array<Var, 4> maps;

    Var& s(int level) { return maps.at(static_cast<std::size_t>(level - 2)); }
    const Var& s(int level) const { return maps.at(static_cast<std::size_t>(level - 2)); }
};

inline constexpr double kLogFloor = 1e-12;
inline constexpr double kDiceEpsilon = 1.0;

namespace detail {

inline void check_map_pair(const Tensor& s, const Tensor& g, const char* op)
{
    if (s.shape() != g.shape())
        throw DimensionError(std::string(op) + ": prediction " + shape_str(s.shape()) + " and ground truth " +
                             shape_str(g.shape()) + " differ");
    if (s.size() == 0) throw DimensionError(std::string(op) + ": empty map");
}

}  // namespace detail

/// Mean binary cross-entropy with logs floored at 1e-12.
inline Var bce(Var s, const Tensor& g)
{
    const Tensor& sv = s.value();
    detail::check_map_pair(sv, g, "bce");
    const double n = static_cast<double>(sv.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i)
        acc -= g[i] * std::log(std::max(sv[i], kLogFloor)) + (1.0 - g[i]) * std::log(std::max(1.0 - sv[i], kLogFloor));
    const std::size_t is = s.id();
    return s.tape().record(Tensor::scalar(acc / n), {s}, [is, g, n](Tape& t, std::size_t self) {
        const double up = t.grad(self)[0] / n;
        const Tensor& sv = t.value(is);
        Tensor& gs = t.grad_mut(is);
        for (std::size_t i = 0; i < sv.size(); ++i) {
            double d = 0.0;
            if (sv[i] > kLogFloor) d -= g[i] / sv[i];
            if (1.0 - sv[i] > kLogFloor) d += (1.0 - g[i]) / (1.0 - sv[i]);
            gs[i] += up * d;
        }
    });
}

/// 1 - (2 sum(s g) + eps) / (sum(s) + sum(g) + eps), eps = 1, summed over the whole tensor.
inline Var dice(Var s, const Tensor& g)
{
    const Tensor& sv = s.value();
    detail::check_map_pair(sv, g, "dice");
    double inter = 0.0, ss = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        inter += sv[i] * g[i];
        ss += sv[i];
        sg += g[i];
    }
    const double num = 2.0 * inter + kDiceEpsilon, den = ss + sg + kDiceEpsilon;
    const std::size_t is = s.id();
    return s.tape().record(Tensor::scalar(1.0 - num / den), {s}, [is, g, num, den](Tape& t, std::size_t self) {
        const double up = t.grad(self)[0];
        Tensor& gs = t.grad_mut(is);
        for (std::size_t i = 0; i < gs.size(); ++i) gs[i] -= up * (2.0 * g[i] * den - num) / (den * den);
    });
}

/// Luma of an RGB batch [B,3,H,W] -> [B,1,H,W].
inline Tensor luma(const Tensor& rgb)
{
    require_rank(rgb, 4, "luma");
    if (rgb.dim(1) != 3) throw DimensionError("luma: expected 3 channels on axis 1, got " + shape_str(rgb.shape()));
    const std::size_t n = rgb.dim(0), h = rgb.dim(2), w = rgb.dim(3);
    Tensor out(Shape{n, 1, h, w});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                out.at(b, 0, y, x) = 0.299 * rgb.at(b, 0, y, x) + 0.587 * rgb.at(b, 1, y, x) + 0.114 * rgb.at(b, 2, y, x);
    return out;
}

/// Edge-aware first-order smoothness: the mean over both axes of
/// mean(|d s| * exp(-|d luma(rgb)|)) with forward differences. Axes of extent 1 contribute 0.
inline Var smoothness(Var s, const Tensor& rgb)
{
    const Tensor& sv = s.value();
    require_rank(sv, 4, "smoothness");
    const Tensor lum = luma(rgb);
    if (sv.dim(1) != 1 || sv.dim(0) != lum.dim(0) || sv.dim(2) != lum.dim(2) || sv.dim(3) != lum.dim(3))
        throw DimensionError("smoothness: map " + shape_str(sv.shape()) + " incompatible with image " +
                             shape_str(rgb.shape()));
    const std::size_t n = sv.dim(0), h = sv.dim(2), w = sv.dim(3);
    const double count_x = static_cast<double>(n * h * (w - 1));
    const double count_y = static_cast<double>(n * (h - 1) * w);
    // per-difference weights with the 1/2 axis average and per-axis mean folded in
    Tensor wx(Shape{n, 1, h, w}), wy(Shape{n, 1, h, w});
    double loss = 0.0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                if (x + 1 < w) {
                    const double k = 0.5 / count_x * std::exp(-std::abs(lum.at(b, 0, y, x + 1) - lum.at(b, 0, y, x)));
                    wx.at(b, 0, y, x) = k;
                    loss += k * std::abs(sv.at(b, 0, y, x + 1) - sv.at(b, 0, y, x));
                }
                if (y + 1 < h) {
                    const double k = 0.5 / count_y * std::exp(-std::abs(lum.at(b, 0, y + 1, x) - lum.at(b, 0, y, x)));
                    wy.at(b, 0, y, x) = k;
                    loss += k * std::abs(sv.at(b, 0, y + 1, x) - sv.at(b, 0, y, x));
                }
            }
    const std::size_t is = s.id();
    return s.tape().record(Tensor::scalar(loss), {s}, [is, wx, wy, n, h, w](Tape& t, std::size_t self) {
        const double up = t.grad(self)[0];
        const Tensor& sv = t.value(is);
        Tensor& gs = t.grad_mut(is);
        const auto sign = [](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); };
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    if (x + 1 < w) {
                        const double g = up * wx.at(b, 0, y, x) * sign(sv.at(b, 0, y, x + 1) - sv.at(b, 0, y, x));
                        gs.at(b, 0, y, x + 1) += g;
                        gs.at(b, 0, y, x) -= g;
                    }
                    if (y + 1 < h) {
                        const double g = up * wy.at(b, 0, y, x) * sign(sv.at(b, 0, y + 1, x) - sv.at(b, 0, y, x));
                        gs.at(b, 0, y + 1, x) += g;
                        gs.at(b, 0, y, x) -= g;
                    }
                }
    });
}

struct LossWeights {
    std::array<double, 4> lambda{1.0, 0.8, 0.6, 0.5};   ///< levels 2..5
    bool use_smooth = true;
    bool use_dice = true;

    void validate() const
    {
        for (std::size_t k = 0; k < lambda.size(); ++k)
            if (!(lambda[k] >= 0.0))
                throw ConfigError("loss: lambda" + std::to_string(k + 2) + " must be non-negative");
    }
};

struct LossReport {
    std::array<double, 4> bce{};   ///< l2..l5
    double smooth = 0.0;
    double dice = 0.0;
    double total = 0.0;
};

struct LossTerms {
    Var total;
    LossReport report;
};

/// Weighted multi-level BCE plus smoothness and dice on S2. The smoothness and dice
/// values are always reported; the flags decide whether they enter the total.
inline LossTerms total_loss(const SaliencyOutputs& out, const Tensor& gt, const Tensor& rgb, const LossWeights& w)
{
    w.validate();
    LossReport rep;
    Var total;
    for (int level = 2; level <= 5; ++level) {
        Var l = bce(out.s(level), gt);
        const std::size_t k = static_cast<std::size_t>(level - 2);
        rep.bce[k] = l.value()[0];
        Var term = scale(l, w.lambda[k]);
        total = total.valid() ? add(total, term) : term;
    }
    Var ls = smoothness(out.s(2), rgb);
    Var ld = dice(out.s(2), gt);
    rep.smooth = ls.value()[0];
    rep.dice = ld.value()[0];
    if (w.use_smooth) total = add(total, ls);
    if (w.use_dice) total = add(total, ld);
    rep.total = total.value()[0];
    return {total, rep};
}

}  // namespace lafb
