#pragma once

#include "lafb/config.hpp"
#include "lafb/fusion_bank.hpp"
#include "lafb/iigm.hpp"
#include "lafb/losses.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lafb {

struct EncoderConfig {
    std::size_t input_size = 64;
    std::size_t stem_channels = 8;                        ///< level-1 width, discarded after the stem
    std::array<std::size_t, 4> channels{16, 32, 64, 128};   ///< C_2..C_5

    std::size_t width(int level) const { return channels.at(static_cast<std::size_t>(level - 2)); }
    std::size_t extent(int level) const { return input_size >> level; }

    void validate() const
    {
        if (input_size == 0 || input_size % 32 != 0)
            throw ConfigError("encoder: input_size " + std::to_string(input_size) + " is not a positive multiple of 32");
        if (stem_channels == 0) throw ConfigError("encoder: stem_channels must be positive");
        for (std::size_t c : channels)
            if (c == 0) throw ConfigError("encoder: level channels must be positive");
    }
};

/// Component switches. no_afb replaces the bank by plain concatenation and so makes
/// the AEM and scheme settings moot; combining it with a scheme subset is rejected.
struct Ablation {
    bool no_afb = false;
    bool no_aem = false;
    bool no_iigm = false;
    std::vector<Scheme> schemes{kAllSchemes.begin(), kAllSchemes.end()};

    bool full_scheme_set() const { return schemes.size() == kAllSchemes.size(); }

    void validate() const
    {
        BankMode{schemes, !no_aem}.validate();
        if (no_afb && !full_scheme_set())
            throw ConfigError("ablation: --no-afb removes the fusion bank, a scheme subset cannot be combined with it");
    }

    /// Schemes in canonical order.
    std::vector<Scheme> canonical() const
    {
        std::vector<Scheme> out;
        for (Scheme s : kAllSchemes)
            for (Scheme x : schemes)
                if (x == s) out.push_back(s);
        return out;
    }

    BankMode bank_mode() const { return BankMode::subset(canonical(), !no_aem); }
};

inline std::string schemes_str(const std::vector<Scheme>& s)
{
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k) out += ',';
        out += scheme_name(s[k]);
    }
    return out;
}

inline std::vector<Scheme> parse_schemes(const std::string& text)
{
    std::vector<Scheme> out;
    for (const std::string& part : KeyValues::split(text, ',')) {
        auto s = parse_scheme(part);
        if (!s) throw ConfigError("unknown fusion scheme '" + part + "' (expected cb, sv, ic, li, td)");
        out.push_back(*s);
    }
    if (out.empty()) throw ConfigError("scheme list is empty");
    return out;
}

struct ModelConfig {
    EncoderConfig encoder;
    std::size_t decoder_width = 32;
    Ablation ablation;

    void validate() const
    {
        encoder.validate();
        if (decoder_width == 0) throw ConfigError("decoder_width must be positive");
        ablation.validate();
    }

    /// Channel width of FB_i: 2C without the bank, |S|*C with it.
    std::size_t bank_width(int level) const
    {
        const std::size_t c = encoder.width(level);
        return ablation.no_afb ? 2 * c : ablation.schemes.size() * c;
    }

    KeyValues to_kv() const
    {
        KeyValues kv;
        kv.set("input_size", std::to_string(encoder.input_size));
        kv.set("stem_channels", std::to_string(encoder.stem_channels));
        std::string ch;
        for (std::size_t k = 0; k < 4; ++k) ch += (k ? "," : "") + std::to_string(encoder.channels[k]);
        kv.set("channels", ch);
        kv.set("decoder_width", std::to_string(decoder_width));
        kv.set("no_afb", ablation.no_afb ? "true" : "false");
        kv.set("no_aem", ablation.no_aem ? "true" : "false");
        kv.set("no_iigm", ablation.no_iigm ? "true" : "false");
        kv.set("schemes", schemes_str(ablation.canonical()));
        return kv;
    }

    static ModelConfig from_kv(const KeyValues& kv)
    {
        ModelConfig c;
        const auto positive = [&](const char* key, std::size_t fallback) {
            const long v = kv.get_int(key, static_cast<long>(fallback));
            if (v <= 0) throw ConfigError(std::string(key) + " must be positive");
            return static_cast<std::size_t>(v);
        };
        c.encoder.input_size = positive("input_size", c.encoder.input_size);
        c.encoder.stem_channels = positive("stem_channels", c.encoder.stem_channels);
        if (kv.has("channels")) {
            auto parts = kv.get_list("channels");
            if (parts.size() != 4) throw ConfigError("channels: expected four comma-separated widths");
            for (std::size_t k = 0; k < 4; ++k) {
                KeyValues one;
                one.set("channels", parts[k]);
                const long v = one.get_int("channels", 0);
                if (v <= 0) throw ConfigError("channels: widths must be positive");
                c.encoder.channels[k] = static_cast<std::size_t>(v);
            }
        }
        c.decoder_width = positive("decoder_width", c.decoder_width);
        c.ablation.no_afb = kv.get_bool("no_afb", false);
        c.ablation.no_aem = kv.get_bool("no_aem", false);
        c.ablation.no_iigm = kv.get_bool("no_iigm", false);
        if (kv.has("schemes")) c.ablation.schemes = parse_schemes(kv.get("schemes", ""));
        c.validate();
        return c;
    }
};

/// Named parameter tensors in registration order.
class ParamStore {
public:
    std::size_t add(const std::string& name, Shape shape, std::size_t fan_in)
    {
        if (index_.count(name)) throw ContractError("param store: duplicate parameter " + name);
        index_[name] = values_.size();
        names_.push_back(name);
        fan_in_.push_back(fan_in);
        values_.emplace_back(std::move(shape));
        return values_.size() - 1;
    }

    std::size_t size() const noexcept { return values_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::size_t fan_in(std::size_t i) const { return fan_in_.at(i); }
    Tensor& value(std::size_t i) { return values_.at(i); }
    const Tensor& value(std::size_t i) const { return values_.at(i); }

    std::optional<std::size_t> find(const std::string& name) const
    {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    Tensor& at(const std::string& name)
    {
        auto i = find(name);
        if (!i) throw ContractError("param store: no parameter named " + name);
        return values_[*i];
    }

    /// Total scalar count, optionally restricted to names starting with `prefix`.
    std::size_t count(const std::string& prefix = "") const
    {
        std::size_t n = 0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (names_[i].compare(0, prefix.size(), prefix) == 0) n += values_[i].size();
        return n;
    }

    /// Uniform in [-a, a], a = sqrt(1 / fan_in), drawn in registration order.
    void init_uniform(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double a = std::sqrt(1.0 / static_cast<double>(fan_in_[i]));
            for (double& v : values_[i].data()) {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                v = a * (2.0 * u - 1.0);
            }
        }
    }

    void fill(double v)
    {
        for (Tensor& t : values_) t.fill(v);
    }

private:
    std::vector<std::string> names_;
    std::vector<std::size_t> fan_in_;
    std::vector<Tensor> values_;
    std::map<std::string, std::size_t> index_;
};

/// Tape variables for every parameter of a store, one per index.
class Binding {
public:
    /// Borrows the stored tensors; the store must outlive the tape and stay unchanged meanwhile.
    Binding(Tape& tape, const ParamStore& store, bool requires_grad = true)
    {
        vars_.reserve(store.size());
        for (std::size_t i = 0; i < store.size(); ++i) vars_.push_back(tape.leaf_ref(store.value(i), requires_grad));
    }

    explicit Binding(std::vector<Var> vars) : vars_(std::move(vars)) {}

    Var operator[](std::size_t i) const { return vars_.at(i); }
    std::size_t size() const noexcept { return vars_.size(); }
    const std::vector<Var>& vars() const { return vars_; }

private:
    std::vector<Var> vars_;
};

struct ConvSlot {
    std::size_t weight = 0;
    std::optional<std::size_t> bias;
    int stride = 1;
    int padding = 0;
    int dilation = 1;

    ConvParams bind(const Binding& b) const
    {
        ConvParams p{b[weight], std::nullopt, stride, padding, dilation};
        if (bias) p.bias = b[*bias];
        return p;
    }
};

/// Per-level intermediates kept for inspection and the weight trace.
struct ForwardResult {
    SaliencyOutputs maps;
    std::array<ModalFeatures, 4> features;
    std::array<Var, 4> bank;
    std::array<std::optional<EnsembleWeights>, 4> weights;
    GuidedPyramid guided;
};

class Model {
public:
    explicit Model(ModelConfig cfg) : cfg_(std::move(cfg))
    {
        cfg_.validate();
        build();
    }

    const ModelConfig& config() const noexcept { return cfg_; }
    ParamStore& params() noexcept { return store_; }
    const ParamStore& params() const noexcept { return store_; }

    void init(std::uint64_t seed) { store_.init_uniform(seed); }

    /// Two independent strided stacks; level 1 is computed and dropped.
    std::array<ModalFeatures, 4> encode(const Binding& b, Var rgb, Var aux) const
    {
        const std::size_t n = cfg_.encoder.input_size;
        for (const Var& x : {rgb, aux}) {
            require_rank(x.value(), 4, "encode");
            if (x.dim(1) != 3 || x.dim(2) != n || x.dim(3) != n)
                throw DimensionError("encode: expected input [B,3," + std::to_string(n) + "," + std::to_string(n) +
                                     "], got " + shape_str(x.shape()));
        }
        if (rgb.dim(0) != aux.dim(0)) throw DimensionError("encode: rgb and aux batch sizes differ");
        std::array<ModalFeatures, 4> out;
        Var r = rgb, a = aux;
        for (std::size_t s = 0; s < 5; ++s) {
            r = relu(conv2d(r, enc_rgb_[s].bind(b)));
            a = relu(conv2d(a, enc_aux_[s].bind(b)));
            if (s >= 1) out[s - 1] = ModalFeatures::make(static_cast<int>(s + 1), r, a);
        }
        return out;
    }

    /// Receptive-field block: 1x1 and three dilated 3x3 branches, projected to D, plus a 1x1 shortcut.
    Var rfb(const Binding& b, int level, Var x) const
    {
        const RfbSlots& s = rfb_.at(static_cast<std::size_t>(level - 2));
        std::vector<Var> branches;
        for (const ConvSlot& c : s.branch) branches.push_back(relu(conv2d(x, c.bind(b))));
        Var proj = conv2d(concat_channels(branches), s.proj.bind(b));
        return relu(add(proj, conv2d(x, s.shortcut.bind(b))));
    }

    /// Top-down decoder over the guided pyramid.
    SaliencyOutputs decode(const Binding& b, const GuidedPyramid& g) const
    {
        for (int level = 2; level <= 5; ++level)
            if (!g.at(level).valid()) throw ContractError("decode: guided level " + std::to_string(level) + " is missing");
        const long n = static_cast<long>(cfg_.encoder.input_size);
        SaliencyOutputs out;
        Var d = rfb(b, 5, g.at(5));
        out.s(5) = head(b, 5, d, n);
        for (int level = 4; level >= 2; --level) {
            Var r = rfb(b, level, g.at(level));
            Var up = resize_like(d, r);
            d = relu(conv2d(concat_channels({r, up}), fuse_.at(static_cast<std::size_t>(level - 2)).bind(b)));
            out.s(level) = head(b, level, d, n);
        }
        return out;
    }

    ForwardResult forward(const Binding& b, Var rgb, Var aux) const
    {
        ForwardResult r;
        r.features = encode(b, rgb, aux);
        const BankMode mode = cfg_.ablation.bank_mode();
        for (std::size_t k = 0; k < 4; ++k) {
            if (cfg_.ablation.no_afb) {
                r.bank[k] = r.features[k].f_cat;
                continue;
            }
            BankOutput bo = adaptive_fusion_bank(r.features[k], bank_params(b, k), mode);
            r.bank[k] = bo.fb;
            r.weights[k] = std::move(bo.weights);
        }
        if (cfg_.ablation.no_iigm) {
            r.guided = iigm_all(r.bank, nullptr, nullptr, false);
        } else {
            IigmGroupParams g3 = group_params(b, 0), g4 = group_params(b, 1);
            r.guided = iigm_all(r.bank, &g3, &g4, true);
        }
        r.maps = decode(b, r.guided);
        return r;
    }

    ForwardResult forward(Tape& tape, const Tensor& rgb, const Tensor& aux, bool requires_grad = false) const
    {
        Binding b(tape, store_, requires_grad);
        return forward(b, tape.constant(rgb), tape.constant(aux));
    }

private:
    struct BankSlots {
        std::optional<ConvSlot> cb, sv, ic_inner, ic_outer, li, td, aem_avg, aem_max;
    };
    struct RfbSlots {
        std::array<ConvSlot, 4> branch;
        ConvSlot proj, shortcut;
    };

    ConvSlot conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k, int stride, int pad,
                  int dil, bool bias)
    {
        ConvSlot s;
        const std::size_t fan_in = in * k * k;
        s.weight = store_.add(name + ".w", Shape{out, in, k, k}, fan_in);
        if (bias) s.bias = store_.add(name + ".b", Shape{out}, fan_in);
        s.stride = stride;
        s.padding = pad;
        s.dilation = dil;
        return s;
    }

    void build()
    {
        const EncoderConfig& e = cfg_.encoder;
        std::array<std::size_t, 6> widths{3, e.stem_channels, e.channels[0], e.channels[1], e.channels[2], e.channels[3]};
        for (std::size_t s = 0; s < 5; ++s)
            enc_rgb_[s] = conv("enc.rgb.s" + std::to_string(s + 1), widths[s], widths[s + 1], 3, 2, 1, 1, true);
        for (std::size_t s = 0; s < 5; ++s)
            enc_aux_[s] = conv("enc.aux.s" + std::to_string(s + 1), widths[s], widths[s + 1], 3, 2, 1, 1, true);

        if (!cfg_.ablation.no_afb) {
            const BankMode mode = cfg_.ablation.bank_mode();
            for (std::size_t k = 0; k < 4; ++k) {
                const std::size_t c = e.channels[k];
                const std::string p = "bank.l" + std::to_string(k + 2) + ".";
                BankSlots& s = bank_[k];
                if (mode.has(Scheme::cb)) s.cb = conv(p + "cb", 2 * c, c, 3, 1, 1, 1, true);
                if (mode.has(Scheme::sv)) s.sv = conv(p + "sv", 2 * c, c, 3, 1, 2, 2, true);
                if (mode.has(Scheme::ic)) {
                    s.ic_inner = conv(p + "ic_inner", 2 * c, 2 * c, 3, 1, 1, 1, true);
                    s.ic_outer = conv(p + "ic_outer", 2 * c, c, 3, 1, 1, 1, true);
                }
                if (mode.has(Scheme::li)) s.li = conv(p + "li", c, c, 3, 1, 1, 1, true);
                if (mode.has(Scheme::td)) s.td = conv(p + "td", c, c, 3, 1, 1, 1, true);
                if (mode.use_aem) {
                    const std::size_t w = cfg_.bank_width(static_cast<int>(k + 2));
                    s.aem_avg = conv(p + "aem_avg", w, w, 1, 1, 0, 1, true);
                    s.aem_max = conv(p + "aem_max", w, w, 1, 1, 0, 1, true);
                }
            }
        }

        if (!cfg_.ablation.no_iigm) {
            for (std::size_t g = 0; g < 2; ++g) {
                const std::size_t lo = cfg_.bank_width(static_cast<int>(g + 2));
                const std::size_t mid = cfg_.bank_width(static_cast<int>(g + 3));
                const std::size_t hi = cfg_.bank_width(static_cast<int>(g + 4));
                const std::string p = "iigm.g" + std::to_string(g + 3) + ".";
                iigm_[g][0] = conv(p + "high_from_mid", mid, lo, 3, 1, 1, 1, true);
                iigm_[g][1] = conv(p + "high_from_hi", hi, lo, 3, 1, 1, 1, true);
                iigm_[g][2] = conv(p + "low_from_lo", lo, hi, 3, 1, 1, 1, true);
                iigm_[g][3] = conv(p + "low_from_mid", mid, hi, 3, 1, 1, 1, true);
            }
        }

        const std::size_t d = cfg_.decoder_width;
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t in = cfg_.bank_width(static_cast<int>(k + 2));
            const std::string p = "dec.rfb" + std::to_string(k + 2) + ".";
            RfbSlots& r = rfb_[k];
            r.branch[0] = conv(p + "b0", in, d, 1, 1, 0, 1, false);
            r.branch[1] = conv(p + "b1", in, d, 3, 1, 1, 1, false);
            r.branch[2] = conv(p + "b2", in, d, 3, 1, 3, 3, false);
            r.branch[3] = conv(p + "b3", in, d, 3, 1, 5, 5, false);
            r.proj = conv(p + "proj", 4 * d, d, 1, 1, 0, 1, false);
            r.shortcut = conv(p + "shortcut", in, d, 1, 1, 0, 1, false);
        }
        for (std::size_t k = 0; k < 3; ++k)
            fuse_[k] = conv("dec.fuse" + std::to_string(k + 2), 2 * d, d, 3, 1, 1, 1, true);
        for (std::size_t k = 0; k < 4; ++k) head_[k] = conv("dec.head" + std::to_string(k + 2), d, 1, 1, 1, 0, 1, true);
    }

    BankParams bank_params(const Binding& b, std::size_t k) const
    {
        const BankSlots& s = bank_[k];
        const auto opt = [&](const std::optional<ConvSlot>& c) -> std::optional<ConvParams> {
            if (!c) return std::nullopt;
            return c->bind(b);
        };
        return {opt(s.cb), opt(s.sv), opt(s.ic_inner), opt(s.ic_outer), opt(s.li), opt(s.td), opt(s.aem_avg), opt(s.aem_max)};
    }

    IigmGroupParams group_params(const Binding& b, std::size_t g) const
    {
        return {iigm_[g][0].bind(b), iigm_[g][1].bind(b), iigm_[g][2].bind(b), iigm_[g][3].bind(b)};
    }

    Var head(const Binding& b, int level, Var d, long n) const
    {
        Var s = sigmoid(conv2d(d, head_.at(static_cast<std::size_t>(level - 2)).bind(b)));
        return bilinear_resize(s, n, n);
    }

    ModelConfig cfg_;
    ParamStore store_;
    std::array<ConvSlot, 5> enc_rgb_, enc_aux_;
    std::array<BankSlots, 4> bank_;
    std::array<std::array<ConvSlot, 4>, 2> iigm_;
    std::array<RfbSlots, 4> rfb_;
    std::array<ConvSlot, 3> fuse_;
    std::array<ConvSlot, 4> head_;
};

}  // namespace lafb
