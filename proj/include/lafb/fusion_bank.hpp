#pragma once

#include "lafb/ops.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lafb {

/// Challenge-specific fusion schemes, in the order their outputs are concatenated.
enum class Scheme { cb = 0, sv = 1, ic = 2, li = 3, td = 4 };

inline constexpr std::array<Scheme, 5> kAllSchemes{Scheme::cb, Scheme::sv, Scheme::ic, Scheme::li, Scheme::td};

inline std::string_view scheme_name(Scheme s)
{
    static constexpr std::array<std::string_view, 5> names{"cb", "sv", "ic", "li", "td"};
    return names[static_cast<std::size_t>(s)];
}

inline std::optional<Scheme> parse_scheme(std::string_view name)
{
    for (Scheme s : kAllSchemes)
        if (scheme_name(s) == name) return s;
    return std::nullopt;
}

/// Paired per-level encoder features and their channel concatenation [f_r, f_aux].
struct ModalFeatures {
    int level = 0;
    Var f_r;
    Var f_aux;
    Var f_cat;

    static ModalFeatures make(int level, Var f_r, Var f_aux)
    {
        require_rank(f_r.value(), 4, "modal features");
        if (f_r.shape() != f_aux.shape())
            throw DimensionError("modal features: rgb " + shape_str(f_r.shape()) + " and auxiliary " +
                                 shape_str(f_aux.shape()) + " differ");
        return ModalFeatures{level, f_r, f_aux, concat_channels({f_r, f_aux})};
    }

    std::size_t channels() const { return f_r.dim(1); }
};

/// Sigmoid gate produced by one modality to steer the other.
struct ModalityWeight {
    enum class Role { thermal_guides_rgb, rgb_guides_aux };
    Var w;
    Role role;
};

struct GuidedFusion {
    ModalityWeight weight;
    Var out;
};

namespace detail {

inline void check_kernel(const ConvParams& p, const char* op, std::size_t k, int pad, int dil, std::size_t in,
                         std::size_t out)
{
    const Shape& s = p.weight.shape();
    if (s.size() != 4 || s[2] != k || s[3] != k || p.stride != 1 || p.padding != pad || p.dilation != dil)
        throw ConfigError(std::string(op) + ": expected " + std::to_string(k) + "x" + std::to_string(k) +
                          " kernel, stride 1, padding " + std::to_string(pad) + ", dilation " + std::to_string(dil) +
                          ", got weight " + shape_str(s));
    if (s[1] != in)
        throw DimensionError(std::string(op) + ": kernel expects " + std::to_string(s[1]) +
                             " input channels on axis 1, features have " + std::to_string(in));
    if (s[0] != out)
        throw DimensionError(std::string(op) + ": kernel produces " + std::to_string(s[0]) +
                             " channels on axis 0, expected " + std::to_string(out));
}

}  // namespace detail

/// Center-bias scheme: one 3x3 conv block over [f_r, f_aux].
inline Var fuse_cb(const ModalFeatures& m, const ConvParams& p)
{
    detail::check_kernel(p, "fuse_cb", 3, 1, 1, 2 * m.channels(), m.channels());
    return relu(conv2d(m.f_cat, p));
}

/// Scale-variation scheme: 3x3 conv block with dilation 2 (5x5 receptive field).
inline Var fuse_sv(const ModalFeatures& m, const ConvParams& p)
{
    detail::check_kernel(p, "fuse_sv", 3, 2, 2, 2 * m.channels(), m.channels());
    return relu(conv2d(m.f_cat, p));
}

/// Image-clutter scheme: Conv(Conv(f_cat) + f_cat). The inner block keeps 2C channels
/// so the residual sum is shape-valid.
inline Var fuse_ic(const ModalFeatures& m, const ConvParams& inner, const ConvParams& outer)
{
    const std::size_t c = m.channels();
    if (inner.weight.shape().size() == 4 && inner.weight.dim(0) != 2 * c)
        throw ConfigError("fuse_ic: inner block must map " + std::to_string(2 * c) + " -> " + std::to_string(2 * c) +
                          " channels, got " + std::to_string(inner.weight.dim(0)) + " outputs");
    detail::check_kernel(inner, "fuse_ic", 3, 1, 1, 2 * c, 2 * c);
    detail::check_kernel(outer, "fuse_ic", 3, 1, 1, 2 * c, c);
    Var residual = add(relu(conv2d(m.f_cat, inner)), m.f_cat);
    return relu(conv2d(residual, outer));
}

namespace detail {

inline GuidedFusion guided(Var guide, Var base, const ConvParams& p, ModalityWeight::Role role, const char* op)
{
    check_kernel(p, op, 3, 1, 1, guide.dim(1), guide.dim(1));
    Var w = sigmoid(conv2d(guide, p));
    return {{w, role}, add(mul(w, base), base)};
}

}  // namespace detail

/// Low-illumination scheme: W_td = sigmoid(Conv(f_aux)); f_li = W_td * f_r + f_r.
inline GuidedFusion fuse_li(const ModalFeatures& m, const ConvParams& p)
{
    return detail::guided(m.f_aux, m.f_r, p, ModalityWeight::Role::thermal_guides_rgb, "fuse_li");
}

/// Thermal-crossover / depth-ambiguity scheme, the mirror of fuse_li:
/// W_r = sigmoid(Conv(f_r)); f_td = W_r * f_aux + f_aux.
inline GuidedFusion fuse_td(const ModalFeatures& m, const ConvParams& p)
{
    return detail::guided(m.f_r, m.f_aux, p, ModalityWeight::Role::rgb_guides_aux, "fuse_td");
}

/// Per-scheme outputs plus their concatenation in canonical scheme order.
struct SchemeOutputs {
    std::array<std::optional<Var>, 5> outputs;
    std::vector<Scheme> order;   ///< schemes present, canonical order
    Var f_cat;                   ///< concatenation of the present outputs

    const std::optional<Var>& operator[](Scheme s) const { return outputs[static_cast<std::size_t>(s)]; }

    static SchemeOutputs assemble(const std::array<std::optional<Var>, 5>& outs)
    {
        SchemeOutputs so;
        so.outputs = outs;
        std::vector<Var> parts;
        for (Scheme s : kAllSchemes)
            if (outs[static_cast<std::size_t>(s)]) {
                so.order.push_back(s);
                parts.push_back(*outs[static_cast<std::size_t>(s)]);
            }
        if (parts.empty()) throw ConfigError("fusion bank: no scheme outputs to concatenate");
        so.f_cat = concat_channels(parts);
        return so;
    }
};

/// Channel weight vector V and its per-scheme block means (averaged over the batch too).
struct EnsembleWeights {
    Var v;
    std::vector<Scheme> order;
    std::vector<double> per_scheme_mean;

    std::optional<double> mean_of(Scheme s) const
    {
        for (std::size_t k = 0; k < order.size(); ++k)
            if (order[k] == s) return per_scheme_mean[k];
        return std::nullopt;
    }
};

struct BankOutput {
    Var fb;
    SchemeOutputs schemes;
    std::optional<EnsembleWeights> weights;   ///< absent when the ensemble module is disabled
};

inline std::vector<double> block_means(const Tensor& v, std::size_t blocks)
{
    const std::size_t n = v.dim(0), c = v.dim(1);
    if (blocks == 0 || c % blocks != 0)
        throw DimensionError("block_means: " + std::to_string(c) + " channels do not split into " +
                             std::to_string(blocks) + " blocks");
    const std::size_t width = c / blocks;
    std::vector<double> means(blocks, 0.0);
    for (std::size_t k = 0; k < blocks; ++k) {
        double acc = 0.0;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t ch = k * width; ch < (k + 1) * width; ++ch) acc += v[b * c + ch];
        means[k] = acc / static_cast<double>(n * width);
    }
    return means;
}

/// Adaptive ensemble: V = sigmoid(Conv(GAP(f_C)) + Conv(GMP(f_C))); FB = V * f_C.
inline BankOutput aem(const SchemeOutputs& s, const ConvParams& p_avg, const ConvParams& p_max)
{
    const std::size_t c = s.f_cat.dim(1);
    detail::check_kernel(p_avg, "aem", 1, 0, 1, c, c);
    detail::check_kernel(p_max, "aem", 1, 0, 1, c, c);
    Var logits = add(conv2d(global_pool(s.f_cat, PoolKind::avg), p_avg),
                     conv2d(global_pool(s.f_cat, PoolKind::max), p_max));
    Var v = sigmoid(logits);
    EnsembleWeights ew{v, s.order, block_means(v.value(), s.order.size())};
    return BankOutput{channel_scale(s.f_cat, v), s, std::move(ew)};
}

/// All parameters of one level's bank. Schemes absent from the mode may be left unset.
struct BankParams {
    std::optional<ConvParams> cb, sv, ic_inner, ic_outer, li, td;
    std::optional<ConvParams> aem_avg, aem_max;
};

/// Which schemes run and whether the ensemble module weights them.
struct BankMode {
    std::vector<Scheme> schemes{kAllSchemes.begin(), kAllSchemes.end()};
    bool use_aem = true;

    static BankMode full() { return {}; }
    static BankMode no_aem() { return {{kAllSchemes.begin(), kAllSchemes.end()}, false}; }
    static BankMode subset(std::vector<Scheme> s, bool use_aem = true) { return {std::move(s), use_aem}; }

    bool has(Scheme s) const
    {
        for (Scheme x : schemes)
            if (x == s) return true;
        return false;
    }

    /// Canonicalizes order and rejects empty or repeated subsets.
    void validate() const
    {
        if (schemes.empty()) throw ConfigError("fusion bank: scheme subset is empty");
        for (std::size_t i = 0; i < schemes.size(); ++i)
            for (std::size_t j = i + 1; j < schemes.size(); ++j)
                if (schemes[i] == schemes[j])
                    throw ConfigError("fusion bank: scheme '" + std::string(scheme_name(schemes[i])) + "' listed twice");
    }
};

namespace detail {

inline const ConvParams& need(const std::optional<ConvParams>& p, const char* what)
{
    if (!p) throw ConfigError(std::string("fusion bank: missing parameters for ") + what);
    return *p;
}

}  // namespace detail

/// Runs the enabled schemes, concatenates them in canonical order and applies the
/// ensemble module. Without AEM the output is the plain concatenation (V fixed at 1).
inline BankOutput adaptive_fusion_bank(const ModalFeatures& m, const BankParams& p, const BankMode& mode)
{
    mode.validate();
    std::array<std::optional<Var>, 5> outs;
    auto slot = [&](Scheme s) -> std::optional<Var>& { return outs[static_cast<std::size_t>(s)]; };
    if (mode.has(Scheme::cb)) slot(Scheme::cb) = fuse_cb(m, detail::need(p.cb, "cb"));
    if (mode.has(Scheme::sv)) slot(Scheme::sv) = fuse_sv(m, detail::need(p.sv, "sv"));
    if (mode.has(Scheme::ic))
        slot(Scheme::ic) = fuse_ic(m, detail::need(p.ic_inner, "ic inner"), detail::need(p.ic_outer, "ic outer"));
    if (mode.has(Scheme::li)) slot(Scheme::li) = fuse_li(m, detail::need(p.li, "li")).out;
    if (mode.has(Scheme::td)) slot(Scheme::td) = fuse_td(m, detail::need(p.td, "td")).out;
    SchemeOutputs so = SchemeOutputs::assemble(outs);
    if (!mode.use_aem) return BankOutput{so.f_cat, so, std::nullopt};
    return aem(so, detail::need(p.aem_avg, "aem avg"), detail::need(p.aem_max, "aem max"));
}

}  // namespace lafb
