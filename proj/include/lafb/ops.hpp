#pragma once

#include "lafb/tape.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lafb {

namespace detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

inline Var record_unary(Var x, Tensor out, Tape::Backward fn)
{
    return x.tape().record(std::move(out), {x}, std::move(fn));
}

inline void check_same_tape(Var a, Var b)
{
    if (!a.valid() || !b.valid()) throw ContractError("op: invalid variable");
    a.tape().check_owner(b);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise

inline Var add(Var a, Var b)
{
    detail::check_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t p : {ia, ib}) {
            if (!t.requires_grad(p)) continue;
            Tensor& gp = t.grad_mut(p);
            for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
        }
    });
}

inline Var mul(Var a, Var b)
{
    detail::check_same_tape(a, b);
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        if (t.requires_grad(ia)) {
            Tensor& ga = t.grad_mut(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.requires_grad(ib)) {
            Tensor& gb = t.grad_mut(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

inline Var scale(Var x, double s)
{
    Tensor out = x.value();
    for (double& v : out.data()) v *= s;
    const std::size_t ix = x.id();
    return detail::record_unary(x, std::move(out), [ix, s](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad_mut(ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
    });
}

/// Logistic function, clamped to the open interval (0, 1) so saturated inputs never reach 0 or 1.
inline double sigmoid_value(double x)
{
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::min(std::max(s, lo), hi);
}

inline Var sigmoid(Var x)
{
    Tensor out = x.value();
    for (double& v : out.data()) v = sigmoid_value(v);
    const std::size_t ix = x.id();
    return detail::record_unary(x, std::move(out), [ix](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& gx = t.grad_mut(ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

inline Var relu(Var x)
{
    Tensor out = x.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    const std::size_t ix = x.id();
    return detail::record_unary(x, std::move(out), [ix](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& xv = t.value(ix);
        Tensor& gx = t.grad_mut(ix);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xv[i] > 0.0) gx[i] += g[i];
    });
}

/// Concatenates rank-4 tensors along the channel axis.
inline Var concat_channels(const std::vector<Var>& xs)
{
    if (xs.empty()) throw ContractError("concat_channels: no inputs");
    const Tensor& first = xs.front().value();
    require_rank(first, 4, "concat_channels");
    const std::size_t n = first.dim(0), h = first.dim(2), w = first.dim(3);
    std::size_t c_total = 0;
    std::vector<std::size_t> ids, widths;
    for (const Var& x : xs) {
        detail::check_same_tape(xs.front(), x);
        const Tensor& v = x.value();
        require_rank(v, 4, "concat_channels");
        for (std::size_t axis : {0u, 2u, 3u})
            if (v.dim(axis) != first.dim(axis))
                throw DimensionError("concat_channels: extent mismatch on axis " + std::to_string(axis) + " (" +
                                     shape_str(v.shape()) + " vs " + shape_str(first.shape()) + ")");
        c_total += v.dim(1);
        ids.push_back(x.id());
        widths.push_back(v.dim(1));
    }
    const std::size_t plane = h * w;
    Tensor out(Shape{n, c_total, h, w});
    for (std::size_t b = 0; b < n; ++b) {
        std::size_t c0 = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const Tensor& v = xs[k].value();
            const double* src = v.ptr() + b * widths[k] * plane;
            std::copy(src, src + widths[k] * plane, out.ptr() + (b * c_total + c0) * plane);
            c0 += widths[k];
        }
    }
    return xs.front().tape().record(std::move(out), xs, [ids, widths, n, c_total, plane](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        std::size_t c0 = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (t.requires_grad(ids[k])) {
                Tensor& gk = t.grad_mut(ids[k]);
                for (std::size_t b = 0; b < n; ++b) {
                    const double* src = g.ptr() + (b * c_total + c0) * plane;
                    double* dst = gk.ptr() + b * widths[k] * plane;
                    for (std::size_t i = 0; i < widths[k] * plane; ++i) dst[i] += src[i];
                }
            }
            c0 += widths[k];
        }
    });
}

inline Var slice_channels(Var x, std::size_t begin, std::size_t count)
{
    const Tensor& v = x.value();
    require_rank(v, 4, "slice_channels");
    const std::size_t n = v.dim(0), c = v.dim(1), plane = v.dim(2) * v.dim(3);
    if (begin + count > c || count == 0)
        throw DimensionError("slice_channels: range [" + std::to_string(begin) + "," +
                             std::to_string(begin + count) + ") outside axis 1 of " + shape_str(v.shape()));
    Tensor out(Shape{n, count, v.dim(2), v.dim(3)});
    for (std::size_t b = 0; b < n; ++b) {
        const double* src = v.ptr() + (b * c + begin) * plane;
        std::copy(src, src + count * plane, out.ptr() + b * count * plane);
    }
    const std::size_t ix = x.id();
    return detail::record_unary(x, std::move(out), [ix, n, c, begin, count, plane](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad_mut(ix);
        for (std::size_t b = 0; b < n; ++b) {
            const double* src = g.ptr() + b * count * plane;
            double* dst = gx.ptr() + (b * c + begin) * plane;
            for (std::size_t i = 0; i < count * plane; ++i) dst[i] += src[i];
        }
    });
}

/// x[B,C,H,W] * v[B,C,1,1], broadcasting v over spatial positions.
inline Var channel_scale(Var x, Var v)
{
    detail::check_same_tape(x, v);
    const Tensor& xv = x.value();
    const Tensor& vv = v.value();
    require_rank(xv, 4, "channel_scale");
    require_rank(vv, 4, "channel_scale");
    if (vv.dim(0) != xv.dim(0) || vv.dim(1) != xv.dim(1) || vv.dim(2) != 1 || vv.dim(3) != 1)
        throw DimensionError("channel_scale: weight shape " + shape_str(vv.shape()) + " incompatible with " +
                             shape_str(xv.shape()));
    const std::size_t nc = xv.dim(0) * xv.dim(1), plane = xv.dim(2) * xv.dim(3);
    Tensor out = xv;
    for (std::size_t k = 0; k < nc; ++k)
        for (std::size_t i = 0; i < plane; ++i) out[k * plane + i] *= vv[k];
    const std::size_t ix = x.id(), iv = v.id();
    return x.tape().record(std::move(out), {x, v}, [ix, iv, nc, plane](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ix)) {
            const Tensor& vv = t.value(iv);
            Tensor& gx = t.grad_mut(ix);
            for (std::size_t k = 0; k < nc; ++k)
                for (std::size_t i = 0; i < plane; ++i) gx[k * plane + i] += g[k * plane + i] * vv[k];
        }
        if (t.requires_grad(iv)) {
            const Tensor& xv = t.value(ix);
            Tensor& gv = t.grad_mut(iv);
            for (std::size_t k = 0; k < nc; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < plane; ++i) acc += g[k * plane + i] * xv[k * plane + i];
                gv[k] += acc;
            }
        }
    });
}

inline Var sum(Var x)
{
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    const std::size_t ix = x.id();
    return detail::record_unary(x, Tensor::scalar(s), [ix](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        Tensor& gx = t.grad_mut(ix);
        for (double& v : gx.data()) v += g;
    });
}

inline Var mean(Var x)
{
    const std::size_t n = x.value().size();
    if (n == 0) throw DimensionError("mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// pooling

enum class PoolKind { avg, max };

/// Per-channel global pooling to [B,C,1,1]. Max routes the gradient to the first
/// maximal position in row-major order.
inline Var global_pool(Var x, PoolKind kind)
{
    const Tensor& v = x.value();
    require_rank(v, 4, "global_pool");
    const std::size_t n = v.dim(0), c = v.dim(1), plane = v.dim(2) * v.dim(3);
    if (plane == 0) throw DimensionError("global_pool: empty spatial extent in " + shape_str(v.shape()));
    Tensor out(Shape{n, c, 1, 1});
    std::vector<std::size_t> argmax;
    if (kind == PoolKind::max) argmax.resize(n * c);
    for (std::size_t k = 0; k < n * c; ++k) {
        const double* p = v.ptr() + k * plane;
        if (kind == PoolKind::avg) {
            double s = 0.0;
            for (std::size_t i = 0; i < plane; ++i) s += p[i];
            out[k] = s / static_cast<double>(plane);
        } else {
            std::size_t best = 0;
            for (std::size_t i = 1; i < plane; ++i)
                if (p[i] > p[best]) best = i;
            argmax[k] = best;
            out[k] = p[best];
        }
    }
    const std::size_t ix = x.id();
    return detail::record_unary(x, std::move(out), [ix, kind, plane, argmax = std::move(argmax)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad_mut(ix);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (kind == PoolKind::avg) {
                const double share = g[k] / static_cast<double>(plane);
                for (std::size_t i = 0; i < plane; ++i) gx[k * plane + i] += share;
            } else {
                gx[k * plane + argmax[k]] += g[k];
            }
        }
    });
}

// ---------------------------------------------------------------------------
// convolution

struct ConvParams {
    Var weight;                 ///< [out, in, kh, kw]
    std::optional<Var> bias;    ///< [out]
    int stride = 1;
    int padding = 0;
    int dilation = 1;
};

struct ConvGeometry {
    std::size_t n, cin, h, w, cout, kh, kw, ho, wo;
    int stride, padding, dilation;
};

inline ConvGeometry conv_geometry(const Shape& in, const Shape& weight, int stride, int padding, int dilation)
{
    if (in.size() != 4) throw DimensionError("conv2d: input must be rank 4, got " + shape_str(in));
    if (weight.size() != 4) throw DimensionError("conv2d: weight must be rank 4, got " + shape_str(weight));
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (padding < 0) throw ConfigError("conv2d: padding must be >= 0");
    if (dilation < 1) throw ConfigError("conv2d: dilation must be >= 1");
    if (in[1] != weight[1])
        throw DimensionError("conv2d: channel mismatch on axis 1 (input " + std::to_string(in[1]) + ", weight " +
                             std::to_string(weight[1]) + ")");
    ConvGeometry g{in[0], in[1], in[2], in[3], weight[0], weight[2], weight[3], 0, 0, stride, padding, dilation};
    const auto out_extent = [&](std::size_t extent, std::size_t k, int axis) {
        const long span = static_cast<long>(dilation) * (static_cast<long>(k) - 1) + 1;
        const long padded = static_cast<long>(extent) + 2L * padding;
        if (k == 0 || span > padded)
            throw DimensionError("conv2d: effective kernel extent " + std::to_string(span) +
                                 " exceeds padded input extent " + std::to_string(padded) + " on axis " +
                                 std::to_string(axis));
        return static_cast<std::size_t>((padded - span) / stride + 1);
    };
    g.ho = out_extent(g.h, g.kh, 2);
    g.wo = out_extent(g.w, g.kw, 3);
    return g;
}

namespace detail {

inline bool is_pointwise(const ConvGeometry& g)
{
    return g.kh == 1 && g.kw == 1 && g.stride == 1 && g.padding == 0;
}

// col: [cin*kh*kw, ho*wo]
inline void im2col(const ConvGeometry& g, const double* x, double* col)
{
    const std::size_t cols = g.ho * g.wo;
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t ki = 0; ki < g.kh; ++ki)
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                double* row = col + ((ci * g.kh + ki) * g.kw + kj) * cols;
                for (std::size_t oh = 0; oh < g.ho; ++oh) {
                    const long ih = static_cast<long>(oh) * g.stride - g.padding + static_cast<long>(ki) * g.dilation;
                    double* dst = row + oh * g.wo;
                    if (ih < 0 || ih >= static_cast<long>(g.h)) {
                        std::fill(dst, dst + g.wo, 0.0);
                        continue;
                    }
                    const double* src = x + (ci * g.h + static_cast<std::size_t>(ih)) * g.w;
                    for (std::size_t ow = 0; ow < g.wo; ++ow) {
                        const long iw = static_cast<long>(ow) * g.stride - g.padding + static_cast<long>(kj) * g.dilation;
                        dst[ow] = (iw >= 0 && iw < static_cast<long>(g.w)) ? src[iw] : 0.0;
                    }
                }
            }
}

inline void col2im_add(const ConvGeometry& g, const double* col, double* x)
{
    const std::size_t cols = g.ho * g.wo;
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t ki = 0; ki < g.kh; ++ki)
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const double* row = col + ((ci * g.kh + ki) * g.kw + kj) * cols;
                for (std::size_t oh = 0; oh < g.ho; ++oh) {
                    const long ih = static_cast<long>(oh) * g.stride - g.padding + static_cast<long>(ki) * g.dilation;
                    if (ih < 0 || ih >= static_cast<long>(g.h)) continue;
                    double* dst = x + (ci * g.h + static_cast<std::size_t>(ih)) * g.w;
                    const double* src = row + oh * g.wo;
                    for (std::size_t ow = 0; ow < g.wo; ++ow) {
                        const long iw = static_cast<long>(ow) * g.stride - g.padding + static_cast<long>(kj) * g.dilation;
                        if (iw >= 0 && iw < static_cast<long>(g.w)) dst[iw] += src[ow];
                    }
                }
            }
}

}  // namespace detail

/// 2-D cross-correlation with stride, zero padding and dilation, computed as im2col + GEMM.
inline Var conv2d(Var x, const ConvParams& p)
{
    detail::check_same_tape(x, p.weight);
    const Tensor& xv = x.value();
    const Tensor& wv = p.weight.value();
    const ConvGeometry g = conv_geometry(xv.shape(), wv.shape(), p.stride, p.padding, p.dilation);
    if (p.bias) {
        detail::check_same_tape(x, *p.bias);
        const Shape& bs = p.bias->shape();
        if (bs.size() != 1 || bs[0] != g.cout)
            throw DimensionError("conv2d: bias shape " + shape_str(bs) + " does not match " +
                                 std::to_string(g.cout) + " output channels on axis 0");
    }

    const std::size_t k = g.cin * g.kh * g.kw, cols = g.ho * g.wo;
    const bool pointwise = detail::is_pointwise(g);
    Tensor out(Shape{g.n, g.cout, g.ho, g.wo});
    std::vector<double> col(pointwise ? 0 : k * cols);
    detail::ConstMatMap wm(wv.ptr(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(k));
    for (std::size_t b = 0; b < g.n; ++b) {
        const double* xb = xv.ptr() + b * g.cin * g.h * g.w;
        if (!pointwise) detail::im2col(g, xb, col.data());
        detail::ConstMatMap cm(pointwise ? xb : col.data(), static_cast<Eigen::Index>(k),
                               static_cast<Eigen::Index>(cols));
        detail::MatMap om(out.ptr() + b * g.cout * cols, static_cast<Eigen::Index>(g.cout),
                          static_cast<Eigen::Index>(cols));
        om.noalias() = wm * cm;
        if (p.bias) {
            const Tensor& bv = p.bias->value();
            for (std::size_t co = 0; co < g.cout; ++co) om.row(static_cast<Eigen::Index>(co)).array() += bv[co];
        }
    }

    std::vector<Var> parents{x, p.weight};
    if (p.bias) parents.push_back(*p.bias);
    const std::size_t ix = x.id(), iw = p.weight.id();
    const std::optional<std::size_t> ib = p.bias ? std::optional<std::size_t>(p.bias->id()) : std::nullopt;
    return x.tape().record(std::move(out), parents, [g, ix, iw, ib, k, cols, pointwise](Tape& t, std::size_t self) {
        const Tensor& gout = t.grad(self);
        const Tensor& xv = t.value(ix);
        const Tensor& wv = t.value(iw);
        const bool need_x = t.requires_grad(ix), need_w = t.requires_grad(iw);
        if (ib && t.requires_grad(*ib)) {
            Tensor& gb = t.grad_mut(*ib);
            for (std::size_t b = 0; b < g.n; ++b)
                for (std::size_t co = 0; co < g.cout; ++co) {
                    const double* p = gout.ptr() + (b * g.cout + co) * cols;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < cols; ++i) acc += p[i];
                    gb[co] += acc;
                }
        }
        if (!need_x && !need_w) return;
        detail::ConstMatMap wm(wv.ptr(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(k));
        std::vector<double> col(pointwise ? 0 : k * cols);
        std::vector<double> dcol(need_x && !pointwise ? k * cols : 0);
        for (std::size_t b = 0; b < g.n; ++b) {
            detail::ConstMatMap gm(gout.ptr() + b * g.cout * cols, static_cast<Eigen::Index>(g.cout),
                                   static_cast<Eigen::Index>(cols));
            if (need_w) {
                const double* xb = xv.ptr() + b * g.cin * g.h * g.w;
                if (!pointwise) detail::im2col(g, xb, col.data());
                detail::ConstMatMap cm(pointwise ? xb : col.data(), static_cast<Eigen::Index>(k),
                                       static_cast<Eigen::Index>(cols));
                detail::MatMap gw(t.grad_mut(iw).ptr(), static_cast<Eigen::Index>(g.cout),
                                  static_cast<Eigen::Index>(k));
                gw.noalias() += gm * cm.transpose();
            }
            if (need_x) {
                double* gx = t.grad_mut(ix).ptr() + b * g.cin * g.h * g.w;
                if (pointwise) {
                    detail::MatMap gxm(gx, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(cols));
                    gxm.noalias() += wm.transpose() * gm;
                } else {
                    detail::MatMap dm(dcol.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(cols));
                    dm.noalias() = wm.transpose() * gm;
                    detail::col2im_add(g, dcol.data(), gx);
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// resampling

namespace detail {

struct LerpTap {
    std::size_t i0, i1;
    double frac;
};

// Corner-aligned: output index 0 maps to input 0 and the last output index to the last input.
inline std::vector<LerpTap> lerp_taps(std::size_t in, std::size_t out)
{
    std::vector<LerpTap> taps(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double src = (in == 1 || out == 1)
                               ? 0.0
                               : static_cast<double>(o) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
        std::size_t i0 = static_cast<std::size_t>(std::floor(src));
        if (i0 > in - 1) i0 = in - 1;
        const std::size_t i1 = std::min(i0 + 1, in - 1);
        taps[o] = {i0, i1, src - static_cast<double>(i0)};
    }
    return taps;
}

}  // namespace detail

/// Bilinear interpolation with corner-aligned sampling. A constant field stays exactly
/// constant and resizing to the same extent is the identity.
inline Var bilinear_resize(Var x, long out_h, long out_w)
{
    const Tensor& v = x.value();
    require_rank(v, 4, "bilinear_resize");
    if (out_h < 1) throw DimensionError("bilinear_resize: target extent on axis 2 must be >= 1");
    if (out_w < 1) throw DimensionError("bilinear_resize: target extent on axis 3 must be >= 1");
    const std::size_t nc = v.dim(0) * v.dim(1), h = v.dim(2), w = v.dim(3);
    const std::size_t oh = static_cast<std::size_t>(out_h), ow = static_cast<std::size_t>(out_w);
    auto ty = detail::lerp_taps(h, oh);
    auto tx = detail::lerp_taps(w, ow);
    Tensor out(Shape{v.dim(0), v.dim(1), oh, ow});
    for (std::size_t k = 0; k < nc; ++k) {
        const double* src = v.ptr() + k * h * w;
        double* dst = out.ptr() + k * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
            const double* r0 = src + ty[y].i0 * w;
            const double* r1 = src + ty[y].i1 * w;
            const double fy = ty[y].frac;
            for (std::size_t xo = 0; xo < ow; ++xo) {
                const auto& tp = tx[xo];
                const double top = r0[tp.i0] + tp.frac * (r0[tp.i1] - r0[tp.i0]);
                const double bot = r1[tp.i0] + tp.frac * (r1[tp.i1] - r1[tp.i0]);
                dst[y * ow + xo] = top + fy * (bot - top);
            }
        }
    }
    const std::size_t ix = x.id();
    return detail::record_unary(
        x, std::move(out), [ix, nc, h, w, oh, ow, ty = std::move(ty), tx = std::move(tx)](Tape& t, std::size_t self) {
            const Tensor& g = t.grad(self);
            Tensor& gx = t.grad_mut(ix);
            for (std::size_t k = 0; k < nc; ++k) {
                const double* gs = g.ptr() + k * oh * ow;
                double* gd = gx.ptr() + k * h * w;
                for (std::size_t y = 0; y < oh; ++y) {
                    const double fy = ty[y].frac;
                    double* r0 = gd + ty[y].i0 * w;
                    double* r1 = gd + ty[y].i1 * w;
                    for (std::size_t xo = 0; xo < ow; ++xo) {
                        const auto& tp = tx[xo];
                        const double gv = gs[y * ow + xo];
                        const double top = gv * (1.0 - fy), bot = gv * fy;
                        r0[tp.i0] += top * (1.0 - tp.frac);
                        r0[tp.i1] += top * tp.frac;
                        r1[tp.i0] += bot * (1.0 - tp.frac);
                        r1[tp.i1] += bot * tp.frac;
                    }
                }
            }
        });
}

inline Var resize_like(Var x, Var ref)
{
    return bilinear_resize(x, static_cast<long>(ref.dim(2)), static_cast<long>(ref.dim(3)));
}

}  // namespace lafb
