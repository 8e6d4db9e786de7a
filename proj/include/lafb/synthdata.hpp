#pragma once

#include "lafb/config.hpp"
#include "lafb/fusion_bank.hpp"
#include "lafb/png.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lafb {

enum class Challenge { CB = 0, SV = 1, IC = 2, LI = 3, TD = 4 };

inline constexpr std::array<Challenge, 5> kAllChallenges{Challenge::CB, Challenge::SV, Challenge::IC, Challenge::LI,
                                                         Challenge::TD};

inline std::string_view challenge_code(Challenge c)
{
    static constexpr std::array<std::string_view, 5> codes{"CB", "SV", "IC", "LI", "TD"};
    return codes[static_cast<std::size_t>(c)];
}

inline std::optional<Challenge> parse_challenge(std::string_view code)
{
    for (Challenge c : kAllChallenges)
        if (challenge_code(c) == code) return c;
    return std::nullopt;
}

/// The fusion scheme designed for each challenge.
inline Scheme matched_scheme(Challenge c)
{
    return static_cast<Scheme>(static_cast<int>(c));
}

/// Pairs whose postconditions contradict each other and so never share a sample.
inline bool compatible(Challenge a, Challenge b)
{
    auto pair = [&](Challenge x, Challenge y) { return (a == x && b == y) || (a == y && b == x); };
    return !pair(Challenge::IC, Challenge::TD) && !pair(Challenge::LI, Challenge::TD) && !pair(Challenge::IC, Challenge::LI);
}

class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::initializer_list<Challenge> cs)
    {
        for (Challenge c : cs) insert(c);
    }

    void insert(Challenge c) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)); }
    bool has(Challenge c) const { return (bits_ >> static_cast<unsigned>(c)) & 1u; }
    bool empty() const { return bits_ == 0; }
    std::uint8_t bits() const { return bits_; }

    std::vector<Challenge> list() const
    {
        std::vector<Challenge> out;
        for (Challenge c : kAllChallenges)
            if (has(c)) out.push_back(c);
        return out;
    }

    std::string str() const
    {
        std::string out;
        for (Challenge c : list()) {
            if (!out.empty()) out += ',';
            out += challenge_code(c);
        }
        return out;
    }

    static LabelSet parse(const std::string& text)
    {
        LabelSet s;
        for (const std::string& part : KeyValues::split(text, ',')) {
            auto c = parse_challenge(part);
            if (!c) throw ConfigError("unknown challenge label '" + part + "'");
            s.insert(*c);
        }
        if (s.empty()) throw ConfigError("empty challenge label set");
        return s;
    }

    friend bool operator==(LabelSet a, LabelSet b) { return a.bits_ == b.bits_; }

private:
    std::uint8_t bits_ = 0;
};

struct Sample {
    std::string id;
    Tensor rgb;   ///< [3,H,W]
    Tensor aux;   ///< [3,H,W]
    Tensor gt;    ///< [1,H,W], binary
    LabelSet labels;
};

namespace synth {

inline constexpr double kLiMaxLuma = 0.25;
inline constexpr double kHighGap = 0.3;
inline constexpr double kLowGap = 0.1;
inline constexpr double kCbMargin = 0.15;
inline constexpr double kSvSmallArea = 0.01;
inline constexpr double kSvLargeArea = 0.25;
inline constexpr double kIcMinBackgroundStd = 0.08;
inline constexpr int kMaxAttempts = 32;

}  // namespace synth

/// Measured quantities behind every label postcondition.
struct SampleStats {
    double rgb_mean_luma = 0;
    double rgb_gap = 0;          ///< |mean luma(fg) - mean luma(bg)| of rgb
    double aux_gap = 0;          ///< same for aux
    double rgb_bg_std = 0;       ///< luma standard deviation over the background
    double area = 0;             ///< foreground fraction
    double border_distance = 0;  ///< centroid distance to the nearest border, as a fraction of the extent
    std::size_t components = 0;  ///< 4-connected foreground components
};

namespace detail {

inline double pixel_luma(const Tensor& img, std::size_t y, std::size_t x)
{
    const std::size_t h = img.dim(1), w = img.dim(2);
    return 0.299 * img[(0 * h + y) * w + x] + 0.587 * img[(1 * h + y) * w + x] + 0.114 * img[(2 * h + y) * w + x];
}

inline std::size_t count_components(const Tensor& gt)
{
    const std::size_t h = gt.dim(1), w = gt.dim(2);
    std::vector<int> seen(h * w, 0);
    std::vector<std::size_t> stack;
    std::size_t n = 0;
    for (std::size_t i = 0; i < h * w; ++i) {
        if (gt[i] < 0.5 || seen[i]) continue;
        ++n;
        stack.push_back(i);
        seen[i] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t y = p / w, x = p % w;
            const auto visit = [&](std::size_t q) {
                if (gt[q] >= 0.5 && !seen[q]) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            };
            if (y > 0) visit(p - w);
            if (y + 1 < h) visit(p + w);
            if (x > 0) visit(p - 1);
            if (x + 1 < w) visit(p + 1);
        }
    }
    return n;
}

}  // namespace detail

inline SampleStats measure(const Sample& s)
{
    const std::size_t h = s.gt.dim(1), w = s.gt.dim(2);
    SampleStats st;
    double fg_r = 0, bg_r = 0, fg_a = 0, bg_a = 0, bg_sq = 0, cy = 0, cx = 0, total = 0;
    std::size_t nf = 0, nb = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double lr = detail::pixel_luma(s.rgb, y, x), la = detail::pixel_luma(s.aux, y, x);
            total += lr;
            if (s.gt[y * w + x] >= 0.5) {
                fg_r += lr;
                fg_a += la;
                cy += static_cast<double>(y) + 0.5;
                cx += static_cast<double>(x) + 0.5;
                ++nf;
            } else {
                bg_r += lr;
                bg_a += la;
                bg_sq += lr * lr;
                ++nb;
            }
        }
    const double n = static_cast<double>(h * w);
    st.rgb_mean_luma = total / n;
    st.area = static_cast<double>(nf) / n;
    st.components = detail::count_components(s.gt);
    if (nf && nb) {
        st.rgb_gap = std::abs(fg_r / double(nf) - bg_r / double(nb));
        st.aux_gap = std::abs(fg_a / double(nf) - bg_a / double(nb));
    }
    if (nb) {
        const double m = bg_r / double(nb);
        st.rgb_bg_std = std::sqrt(std::max(0.0, bg_sq / double(nb) - m * m));
    }
    if (nf) {
        cy /= double(nf);
        cx /= double(nf);
        st.border_distance = std::min({cy / double(h), (double(h) - cy) / double(h), cx / double(w), (double(w) - cx) / double(w)});
    }
    return st;
}

/// First violated label postcondition, if any.
inline std::optional<std::string> check_labels(const Sample& s)
{
    if (s.labels.empty()) return "empty label set";
    if (s.rgb.rank() != 3 || s.rgb.dim(0) != 3 || s.aux.shape() != s.rgb.shape() || s.gt.rank() != 3 ||
        s.gt.dim(0) != 1 || s.gt.dim(1) != s.rgb.dim(1) || s.gt.dim(2) != s.rgb.dim(2))
        return "inconsistent image shapes";
    for (double v : s.gt.data())
        if (v != 0.0 && v != 1.0) return "ground truth is not binary";
    const SampleStats st = measure(s);
    if (st.area <= 0.0) return "empty ground truth";
    if (st.area >= 1.0) return "ground truth covers the whole image";
    for (Challenge a : s.labels.list())
        for (Challenge b : s.labels.list())
            if (!compatible(a, b)) return "contradictory labels";
    std::ostringstream why;
    if (s.labels.has(Challenge::CB) && !(st.border_distance < synth::kCbMargin))
        why << "CB: centroid " << st.border_distance << " from border";
    else if (s.labels.has(Challenge::SV) &&
             !(st.area < synth::kSvSmallArea || st.area > synth::kSvLargeArea || st.components > 1))
        why << "SV: area " << st.area << " with " << st.components << " component(s)";
    else if (s.labels.has(Challenge::IC) && !(st.rgb_gap < synth::kLowGap && st.rgb_bg_std > synth::kIcMinBackgroundStd))
        why << "IC: rgb gap " << st.rgb_gap << ", background std " << st.rgb_bg_std;
    else if (s.labels.has(Challenge::LI) && !(st.rgb_mean_luma < synth::kLiMaxLuma && st.aux_gap > synth::kHighGap))
        why << "LI: rgb luma " << st.rgb_mean_luma << ", aux gap " << st.aux_gap;
    else if (s.labels.has(Challenge::TD) && !(st.aux_gap < synth::kLowGap && st.rgb_gap > synth::kHighGap))
        why << "TD: aux gap " << st.aux_gap << ", rgb gap " << st.rgb_gap;
    if (why.tellp() > 0) return why.str();
    return std::nullopt;
}

struct GenerateOptions {
    std::uint64_t seed = 7;
    std::size_t count = 200;
    std::array<double, 5> mix{1, 1, 1, 1, 1};   ///< CB, SV, IC, LI, TD
    std::size_t height = 64;
    std::size_t width = 64;
    double extra_label_prob = 0.25;
    std::string split = "train";

    void validate() const
    {
        if (count == 0) throw ConfigError("generate: count must be at least 1");
        double total = 0;
        for (double m : mix) {
            if (!(m >= 0.0)) throw ConfigError("generate: mix weights must be non-negative");
            total += m;
        }
        if (total <= 0.0) throw ConfigError("generate: mix weights are all zero");
        if (height < 16 || width < 16) throw ConfigError("generate: images must be at least 16x16");
        if (!(extra_label_prob >= 0.0 && extra_label_prob <= 1.0))
            throw ConfigError("generate: extra_label_prob must lie in [0,1]");
        if (split.empty() || split.find_first_of("/\\ \t") != std::string::npos)
            throw ConfigError("generate: bad split name '" + split + "'");
    }

    std::string mix_str() const
    {
        std::ostringstream os;
        for (std::size_t k = 0; k < mix.size(); ++k) os << (k ? "," : "") << mix[k];
        return os.str();
    }
};

inline std::string sample_id(const std::string& split, std::size_t index)
{
    std::string n = std::to_string(index);
    return split + "_" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

namespace detail {

class SynthRng {
public:
    SynthRng(std::uint64_t seed, std::uint64_t split_hash, std::uint64_t index, std::uint64_t attempt)
    {
        const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
        const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
        std::seed_seq seq{lo(seed), hi(seed), lo(split_hash), hi(split_hash), lo(index), hi(index), lo(attempt)};
        eng_.seed(seq);
    }

    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(unit() * double(n))); }
    bool coin(double p) { return unit() < p; }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Blob {
    bool ellipse;
    double cy, cx, ry, rx;   ///< in pixels

    bool contains(double y, double x) const
    {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        return ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
    }
    double area() const { return ellipse ? M_PI * ry * rx : 4.0 * ry * rx; }
};

/// Smooth pseudo-texture in roughly [-1, 1] from a few random plane waves.
inline std::vector<double> texture(SynthRng& rng, std::size_t h, std::size_t w, double fine_noise)
{
    std::vector<double> t(h * w, 0.0);
    for (int k = 0; k < 4; ++k) {
        const double fy = rng.uniform(0.5, 5.0) / double(h), fx = rng.uniform(0.5, 5.0) / double(w);
        const double phase = rng.uniform(0, 2 * M_PI);
        const double sy = rng.coin(0.5) ? 1.0 : -1.0;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                t[y * w + x] += 0.5 * std::sin(2 * M_PI * (sy * fy * double(y) + fx * double(x)) + phase);
    }
    for (double& v : t) v = std::clamp(v * 0.5 + fine_noise * rng.uniform(-1, 1), -1.0, 1.0);
    return t;
}

/// A color with the requested luma and a random tint.
inline std::array<double, 3> tinted(SynthRng& rng, double luma, double chroma)
{
    std::array<double, 3> d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double ld = 0.299 * d[0] + 0.587 * d[1] + 0.114 * d[2];
    std::array<double, 3> c;
    for (std::size_t k = 0; k < 3; ++k) c[k] = luma + chroma * (d[k] - ld);
    return c;
}

inline std::vector<Blob> place_objects(SynthRng& rng, LabelSet labels, std::size_t h, std::size_t w)
{
    const double n = double(h * w);
    enum class Size { normal, small, large, multi } size = Size::normal;
    if (labels.has(Challenge::SV)) {
        const std::size_t pick = labels.has(Challenge::CB) ? rng.below(2) : rng.below(3);
        size = pick == 0 ? Size::small : (pick == 1 ? Size::multi : Size::large);
    }
    const std::size_t count = size == Size::multi ? 2 + rng.below(2) : 1;
    const bool cb = labels.has(Challenge::CB);
    const std::size_t side = rng.below(4);   // 0 top, 1 bottom, 2 left, 3 right
    std::vector<Blob> blobs;
    for (std::size_t k = 0; k < count; ++k) {
        double area = 0;
        switch (size) {
        case Size::normal: area = rng.uniform(0.04, 0.15); break;
        case Size::small: area = rng.uniform(0.004, 0.007); break;
        case Size::large: area = rng.uniform(0.32, 0.45); break;
        case Size::multi: area = rng.uniform(0.015, 0.035); break;
        }
        Blob b{rng.coin(0.5), 0, 0, 0, 0};
        const double aspect = rng.uniform(0.7, 1.4);
        const double unit_area = b.ellipse ? M_PI : 4.0;
        b.ry = std::sqrt(area * n / (unit_area * aspect));
        b.rx = b.ry * aspect;
        double along = count > 1 ? (double(k) + 0.5) / double(count) + rng.uniform(-0.05, 0.05) : rng.uniform(0.3, 0.7);
        if (cb) {
            // centroid pulled to within the border band along one side
            const double depth = rng.uniform(0.03, 0.08);
            const double u = (side % 2 == 0) ? depth : 1.0 - depth;
            if (side < 2) {
                b.cy = u * double(h);
                b.cx = along * double(w);
            } else {
                b.cx = u * double(w);
                b.cy = along * double(h);
            }
        } else if (count > 1) {
            const double across = rng.uniform(0.25, 0.75);
            if (side < 2) {
                b.cx = along * double(w);
                b.cy = across * double(h);
            } else {
                b.cy = along * double(h);
                b.cx = across * double(w);
            }
        } else {
            b.cy = (0.5 + rng.uniform(-0.15, 0.15)) * double(h);
            b.cx = (0.5 + rng.uniform(-0.15, 0.15)) * double(w);
        }
        blobs.push_back(b);
    }
    return blobs;
}

inline Sample render(SynthRng& rng, LabelSet labels, std::size_t h, std::size_t w)
{
    Sample s;
    s.labels = labels;
    s.rgb = Tensor(Shape{3, h, w});
    s.aux = Tensor(Shape{3, h, w});
    s.gt = Tensor(Shape{1, h, w});
    for (const Blob& b : place_objects(rng, labels, h, w))
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                if (b.contains(double(y) + 0.5, double(x) + 0.5)) s.gt[y * w + x] = 1.0;

    const bool ic = labels.has(Challenge::IC), li = labels.has(Challenge::LI), td = labels.has(Challenge::TD);

    // rgb: bright-on-dark or dark-on-bright with a clear gap, or a near match under clutter
    const bool bright_fg = rng.coin(0.5);
    const double lb = bright_fg ? rng.uniform(0.2, 0.35) : rng.uniform(0.6, 0.75);
    double lf = bright_fg ? lb + rng.uniform(0.4, 0.5) : lb - rng.uniform(0.4, 0.5);
    if (ic) lf = lb + rng.uniform(-0.04, 0.04);
    const auto bg_col = tinted(rng, lb, rng.uniform(0.05, 0.2));
    const auto fg_col = tinted(rng, lf, rng.uniform(0.05, 0.2));
    const double bg_amp = ic ? rng.uniform(0.25, 0.32) : rng.uniform(0.03, 0.06);
    const std::vector<double> bg_tex = texture(rng, h, w, 0.3), fg_tex = texture(rng, h, w, 0.3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const bool fg = s.gt[i] > 0.5;
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = fg ? fg_col[c] + 0.03 * fg_tex[i] : bg_col[c] + bg_amp * bg_tex[i];
                s.rgb[(c * h + y) * w + x] = std::clamp(v, 0.0, 1.0);
            }
        }
    if (li) {
        double mean = 0;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) mean += pixel_luma(s.rgb, y, x);
        mean /= double(h * w);
        const double k = rng.uniform(0.06, 0.16) / std::max(mean, 1e-3);
        if (k < 1.0)
            for (double& v : s.rgb.data()) v *= k;
    }

    // auxiliary: warm/near object on a cooler/farther background, or crossover
    const double ab = rng.uniform(0.15, 0.35);
    const double af = td ? ab + rng.uniform(-0.03, 0.03) : ab + rng.uniform(0.4, 0.55);
    const std::vector<double> aux_tex = texture(rng, h, w, 0.2);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const double base = s.gt[i] > 0.5 ? af : ab;
            const double v = std::clamp(base + 0.04 * aux_tex[i], 0.0, 1.0);
            for (std::size_t c = 0; c < 3; ++c) s.aux[(c * h + y) * w + x] = v;
        }
    s.rgb = quantize8(std::move(s.rgb));
    s.aux = quantize8(std::move(s.aux));
    return s;
}

inline LabelSet draw_labels(SynthRng& rng, const GenerateOptions& o)
{
    double total = 0;
    for (double m : o.mix) total += m;
    double u = rng.unit() * total;
    Challenge primary = Challenge::CB;
    for (Challenge c : kAllChallenges) {
        const double m = o.mix[static_cast<std::size_t>(c)];
        if (m > 0.0) primary = c;
        if (u < m) break;
        u -= m;
    }
    LabelSet labels{primary};
    for (Challenge c : kAllChallenges) {
        if (c == primary) continue;
        const bool roll = rng.coin(o.extra_label_prob);
        bool ok = true;
        for (Challenge have : labels.list()) ok = ok && compatible(c, have);
        if (roll && ok) labels.insert(c);
    }
    return labels;
}

}  // namespace detail

/// Deterministic in (seed, split, index). Attempts whose render fails a postcondition
/// are redrawn from the next substream.
inline Sample generate_sample(const GenerateOptions& o, std::size_t index)
{
    const std::uint64_t split_hash = detail::fnv1a(o.split);
    std::string last;
    for (int attempt = 0; attempt < synth::kMaxAttempts; ++attempt) {
        detail::SynthRng rng(o.seed, split_hash, index, static_cast<std::uint64_t>(attempt));
        const LabelSet labels = detail::draw_labels(rng, o);
        Sample s = detail::render(rng, labels, o.height, o.width);
        s.id = sample_id(o.split, index);
        auto bad = check_labels(s);
        if (!bad) return s;
        last = *bad;
    }
    throw ContractError("generate: sample " + sample_id(o.split, index) + " failed " +
                        std::to_string(synth::kMaxAttempts) + " attempts, last: " + last);
}

struct DatasetIndex {
    std::string root;
    std::vector<std::string> ids;
    std::string split;
};

inline void save_sample(const std::string& root, const Sample& s)
{
    namespace fs = std::filesystem;
    for (const char* sub : {"rgb", "aux", "gt", "labels"}) fs::create_directories(fs::path(root) / sub);
    write_png_rgb((fs::path(root) / "rgb" / (s.id + ".png")).string(), s.rgb);
    write_png_rgb((fs::path(root) / "aux" / (s.id + ".png")).string(), s.aux);
    write_png_gray((fs::path(root) / "gt" / (s.id + ".png")).string(), s.gt);
    const std::string lp = (fs::path(root) / "labels" / (s.id + ".txt")).string();
    std::ofstream lf(lp, std::ios::trunc);
    if (!lf) throw IoError("cannot write " + lp);
    lf << s.labels.str() << '\n';
}

/// Labels are optional on load; a missing label file leaves the set empty.
inline Sample load_sample(const std::string& root, const std::string& id)
{
    namespace fs = std::filesystem;
    Sample s;
    s.id = id;
    const auto need = [&](const char* sub, const char* ext) {
        const fs::path p = fs::path(root) / sub / (id + ext);
        if (!fs::exists(p)) throw IoError("missing file " + p.string());
        return p.string();
    };
    s.rgb = read_png_rgb(need("rgb", ".png"));
    s.aux = read_png_rgb(need("aux", ".png"));
    s.gt = read_png_gray(need("gt", ".png"));
    for (double& v : s.gt.data()) v = v >= 128.0 / 255.0 ? 1.0 : 0.0;
    if (s.rgb.shape() != s.aux.shape() || s.gt.dim(1) != s.rgb.dim(1) || s.gt.dim(2) != s.rgb.dim(2))
        throw DimensionError("sample " + id + ": rgb, aux and gt sizes differ");
    const fs::path lp = fs::path(root) / "labels" / (id + ".txt");
    if (fs::exists(lp)) {
        std::ifstream lf(lp);
        std::string line;
        std::getline(lf, line);
        try {
            s.labels = LabelSet::parse(line);
        } catch (const ConfigError& e) {
            throw IoError("label file " + lp.string() + ": " + e.what());
        }
    }
    return s;
}

inline bool has_label_files(const DatasetIndex& idx)
{
    namespace fs = std::filesystem;
    for (const std::string& id : idx.ids)
        if (!fs::exists(fs::path(idx.root) / "labels" / (id + ".txt"))) return false;
    return !idx.ids.empty();
}

inline DatasetIndex generate_dataset(const std::string& root, const GenerateOptions& o)
{
    o.validate();
    namespace fs = std::filesystem;
    fs::create_directories(root);
    DatasetIndex idx{root, {}, o.split};
    for (std::size_t i = 0; i < o.count; ++i) {
        Sample s = generate_sample(o, i);
        save_sample(root, s);
        idx.ids.push_back(s.id);
    }
    std::ofstream index(fs::path(root) / "index.txt", std::ios::trunc);
    for (const std::string& id : idx.ids) index << id << '\n';
    std::ofstream meta(fs::path(root) / "meta.txt", std::ios::trunc);
    meta << "seed = " << o.seed << "\ncount = " << o.count << "\nmix = " << o.mix_str() << "\nheight = " << o.height
         << "\nwidth = " << o.width << "\nextra_label_prob = " << o.extra_label_prob << "\nsplit = " << o.split << '\n';
    if (!index || !meta) throw IoError("cannot write dataset index under " + root);
    return idx;
}

inline DatasetIndex load_index(const std::string& root)
{
    namespace fs = std::filesystem;
    const fs::path p = fs::path(root) / "index.txt";
    std::ifstream in(p);
    if (!in) throw IoError("missing dataset index " + p.string());
    DatasetIndex idx{root, {}, ""};
    std::string line;
    while (std::getline(in, line)) {
        line = KeyValues::trim(line);
        if (!line.empty()) idx.ids.push_back(line);
    }
    const fs::path mp = fs::path(root) / "meta.txt";
    if (fs::exists(mp)) idx.split = KeyValues::load(mp.string()).get("split", "");
    return idx;
}

inline std::vector<Sample> load_dataset(const DatasetIndex& idx)
{
    std::vector<Sample> out;
    out.reserve(idx.ids.size());
    for (const std::string& id : idx.ids) out.push_back(load_sample(idx.root, id));
    return out;
}

}  // namespace lafb
