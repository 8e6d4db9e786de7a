#pragma once

#include "lafb/synthdata.hpp"
#include "lafb/tensor.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lafb {

inline constexpr double kBeta2 = 0.3;
inline constexpr std::size_t kThresholds = 256;

/// Height and width of a single map; leading axes must all be 1.
struct MapGeometry {
    std::size_t h = 0, w = 0;
};

namespace detail {

inline MapGeometry map_pair(const Tensor& s, const Tensor& g, const char* op)
{
    if (s.shape() != g.shape())
        throw DimensionError(std::string(op) + ": prediction " + shape_str(s.shape()) + " and ground truth " +
                             shape_str(g.shape()) + " differ");
    if (s.rank() < 2 || s.size() == 0) throw DimensionError(std::string(op) + ": expected a non-empty 2-D map");
    for (std::size_t a = 0; a + 2 < s.rank(); ++a)
        if (s.dim(a) != 1) throw DimensionError(std::string(op) + ": expected a single map, got " + shape_str(s.shape()));
    return {s.dim(s.rank() - 2), s.dim(s.rank() - 1)};
}

}  // namespace detail

inline double mae(const Tensor& s, const Tensor& g)
{
    detail::map_pair(s, g, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::abs(s[i] - g[i]);
    return acc / static_cast<double>(s.size());
}

/// F-measure at each threshold t/255, t = 0..255, with pred = s >= t/255.
using FCurve = std::array<double, kThresholds>;

inline double f_beta(double tp, double pred_pos, double gt_pos, double beta2 = kBeta2)
{
    const double p = pred_pos > 0 ? tp / pred_pos : 0.0;
    const double r = gt_pos > 0 ? tp / gt_pos : 0.0;
    const double den = beta2 * p + r;
    return den > 0 ? (1.0 + beta2) * p * r / den : 0.0;
}

inline FCurve f_curve(const Tensor& s, const Tensor& g, double beta2 = kBeta2)
{
    detail::map_pair(s, g, "f_measure");
    // bucket k = largest threshold index with s >= k/255
    std::array<double, kThresholds + 1> pos{}, hit{};
    double gt_pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s[i];
        long k = static_cast<long>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0));
        while (k < 255 && v >= double(k + 1) / 255.0) ++k;
        while (k > 0 && v < double(k) / 255.0) --k;
        if (v < 0.0) k = -1;
        const bool fg = g[i] >= 0.5;
        gt_pos += fg;
        if (k < 0) continue;
        pos[static_cast<std::size_t>(k)] += 1;
        if (fg) hit[static_cast<std::size_t>(k)] += 1;
    }
    FCurve curve{};
    double cp = 0, ch = 0;
    for (std::size_t t = kThresholds; t-- > 0;) {
        cp += pos[t];
        ch += hit[t];
        curve[t] = f_beta(ch, cp, gt_pos, beta2);
    }
    return curve;
}

struct FMeasure {
    double f_mean = 0;
    double f_max = 0;
};

inline FMeasure summarize(const FCurve& c)
{
    FMeasure f;
    for (double v : c) {
        f.f_mean += v;
        f.f_max = std::max(f.f_max, v);
    }
    f.f_mean /= static_cast<double>(c.size());
    return f;
}

inline FMeasure f_measure(const Tensor& s, const Tensor& g, double beta2 = kBeta2)
{
    return summarize(f_curve(s, g, beta2));
}

namespace detail {

struct DistanceField {
    std::vector<double> dist;          ///< Euclidean distance to the nearest foreground pixel
    std::vector<std::size_t> nearest;  ///< row-major index of that pixel, ties to the smallest index
};

/// Exact Euclidean distance transform. For each column only the closest foreground pixel
/// above and below the query row can be nearest, so each query scans 2W candidates.
inline DistanceField distance_to_foreground(const std::vector<bool>& fg, std::size_t h, std::size_t w)
{
    const long none = -1;
    // up[y*w+x]: largest row <= y with fg in column x; down: smallest row >= y
    std::vector<long> up(h * w, none), down(h * w, none);
    for (std::size_t x = 0; x < w; ++x) {
        long last = none;
        for (std::size_t y = 0; y < h; ++y) {
            if (fg[y * w + x]) last = static_cast<long>(y);
            up[y * w + x] = last;
        }
        last = none;
        for (std::size_t y = h; y-- > 0;) {
            if (fg[y * w + x]) last = static_cast<long>(y);
            down[y * w + x] = last;
        }
    }
    DistanceField f{std::vector<double>(h * w, 0.0), std::vector<std::size_t>(h * w, 0)};
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            if (fg[i]) {
                f.nearest[i] = i;
                continue;
            }
            long best_d2 = -1;
            std::size_t best = 0;
            for (std::size_t cx = 0; cx < w; ++cx)
                for (long cy : {up[y * w + cx], down[y * w + cx]}) {
                    if (cy == none) continue;
                    const long dy = cy - static_cast<long>(y), dx = static_cast<long>(cx) - static_cast<long>(x);
                    const long d2 = dy * dy + dx * dx;
                    const std::size_t idx = static_cast<std::size_t>(cy) * w + cx;
                    if (best_d2 < 0 || d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                        best_d2 = d2;
                        best = idx;
                    }
                }
            f.dist[i] = std::sqrt(static_cast<double>(best_d2));
            f.nearest[i] = best;
        }
    return f;
}

/// Normalized 7x7 Gaussian with sigma 5.
inline std::array<double, 49> gaussian7()
{
    std::array<double, 49> k{};
    double total = 0;
    for (int i = -3; i <= 3; ++i)
        for (int j = -3; j <= 3; ++j) {
            const double v = std::exp(-double(i * i + j * j) / (2.0 * 25.0));
            k[std::size_t((i + 3) * 7 + (j + 3))] = v;
            total += v;
        }
    for (double& v : k) v /= total;
    return k;
}

}  // namespace detail

/// Weighted F-measure with beta^2 = 1: errors of background pixels are replaced by the
/// error of their nearest foreground pixel and diffused by a 7x7 Gaussian with replicated
/// borders; foreground pixels keep min(E, diffused E); background errors are weighted by
/// 2 - exp(ln(0.5)/5 * distance).
/// Returns 0 for an all-background ground truth.
inline double weighted_f(const Tensor& s, const Tensor& g)
{
    const MapGeometry geo = detail::map_pair(s, g, "weighted_f");
    const std::size_t h = geo.h, w = geo.w, n = h * w;
    std::vector<bool> fg(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) any |= (fg[i] = g[i] >= 0.5);
    if (!any) return 0.0;

    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::abs(s[i] - (fg[i] ? 1.0 : 0.0));
    const detail::DistanceField df = detail::distance_to_foreground(fg, h, w);
    std::vector<double> et(n);
    for (std::size_t i = 0; i < n; ++i) et[i] = fg[i] ? e[i] : e[df.nearest[i]];

    const auto k = detail::gaussian7();
    double tp_w = 0, fp_w = 0, err_fg = 0, n_fg = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            if (fg[i]) {
                double ea = 0;
                for (int dy = -3; dy <= 3; ++dy)
                    for (int dx = -3; dx <= 3; ++dx) {
                        const long yy = std::clamp(long(y) + dy, 0L, long(h) - 1);
                        const long xx = std::clamp(long(x) + dx, 0L, long(w) - 1);
                        ea += k[std::size_t((dy + 3) * 7 + (dx + 3))] * et[std::size_t(yy) * w + std::size_t(xx)];
                    }
                const double ew = std::min(e[i], ea);
                err_fg += ew;
                n_fg += 1;
            } else {
                const double b = 2.0 - std::exp(std::log(0.5) / 5.0 * df.dist[i]);
                fp_w += e[i] * b;
            }
        }
    tp_w = n_fg - err_fg;
    const double r = 1.0 - err_fg / n_fg;
    const double p = tp_w / (DBL_EPSILON + tp_w + fp_w);
    return 2.0 * r * p / (DBL_EPSILON + r + p);
}

/// Enhanced-alignment measure on the map binarized at min(2 mean(s), 1).
/// All-background gt scores mean(1 - bin), all-foreground gt scores mean(bin).
inline double e_measure(const Tensor& s, const Tensor& g)
{
    detail::map_pair(s, g, "e_measure");
    const std::size_t n = s.size();
    double mean_s = 0;
    for (double v : s.data()) mean_s += v;
    mean_s /= double(n);
    const double th = std::min(2.0 * mean_s, 1.0);
    std::vector<double> bin(n), gt(n);
    double mb = 0, mg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bin[i] = s[i] >= th ? 1.0 : 0.0;
        gt[i] = g[i] >= 0.5 ? 1.0 : 0.0;
        mb += bin[i];
        mg += gt[i];
    }
    double acc = 0;
    if (mg == 0.0) {
        for (double b : bin) acc += 1.0 - b;
    } else if (mg == double(n)) {
        for (double b : bin) acc += b;
    } else {
        mb /= double(n);
        mg /= double(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = bin[i] - mb, b = gt[i] - mg;
            const double xi = 2.0 * a * b / (a * a + b * b + DBL_EPSILON);
            acc += (xi + 1.0) * (xi + 1.0) / 4.0;
        }
    }
    return acc / double(n);
}

struct MetricReport {
    double e_measure = 0;
    double weighted_f = 0;
    double f_mean = 0;
    double f_max = 0;
    double mae = 0;
    std::size_t count = 0;
    std::map<Challenge, MetricReport> per_challenge;
    bool has_labels = false;

    friend bool operator==(const MetricReport& a, const MetricReport& b)
    {
        return a.e_measure == b.e_measure && a.weighted_f == b.weighted_f && a.f_mean == b.f_mean &&
               a.f_max == b.f_max && a.mae == b.mae && a.count == b.count && a.per_challenge == b.per_challenge &&
               a.has_labels == b.has_labels;
    }
};

/// Per-image measures, kept so that any subset can be aggregated later.
struct ImageScores {
    double mae = 0, e = 0, wf = 0;
    FCurve curve{};
    LabelSet labels;
};

inline ImageScores score_image(const Tensor& s, const Tensor& g, LabelSet labels = {})
{
    return {mae(s, g), e_measure(s, g), weighted_f(s, g), f_curve(s, g), labels};
}

/// Means of per-image scores; F mean and max are taken on the mean curve.
inline MetricReport aggregate(const std::vector<const ImageScores*>& items)
{
    MetricReport r;
    if (items.empty()) return r;
    FCurve curve{};
    for (const ImageScores* it : items) {
        r.mae += it->mae;
        r.e_measure += it->e;
        r.weighted_f += it->wf;
        for (std::size_t t = 0; t < kThresholds; ++t) curve[t] += it->curve[t];
    }
    const double n = double(items.size());
    r.mae /= n;
    r.e_measure /= n;
    r.weighted_f /= n;
    for (double& v : curve) v /= n;
    const FMeasure f = summarize(curve);
    r.f_mean = f.f_mean;
    r.f_max = f.f_max;
    r.count = items.size();
    return r;
}

/// Overall measures plus one block per label present; multi-label samples count in each.
inline MetricReport report(const std::vector<ImageScores>& scores, bool with_labels)
{
    if (scores.empty()) throw ContractError("report: empty dataset");
    std::vector<const ImageScores*> all;
    for (const ImageScores& s : scores) all.push_back(&s);
    MetricReport r = aggregate(all);
    r.has_labels = with_labels;
    if (with_labels)
        for (Challenge c : kAllChallenges) {
            std::vector<const ImageScores*> sub;
            for (const ImageScores& s : scores)
                if (s.labels.has(c)) sub.push_back(&s);
            if (!sub.empty()) r.per_challenge[c] = aggregate(sub);
        }
    return r;
}

inline MetricReport report(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                           const std::vector<LabelSet>& labels)
{
    if (preds.size() != gts.size() || (!labels.empty() && labels.size() != preds.size()))
        throw ContractError("report: " + std::to_string(preds.size()) + " predictions, " + std::to_string(gts.size()) +
                            " ground truths, " + std::to_string(labels.size()) + " label sets");
    std::vector<ImageScores> scores;
    for (std::size_t i = 0; i < preds.size(); ++i)
        scores.push_back(score_image(preds[i], gts[i], labels.empty() ? LabelSet{} : labels[i]));
    return report(scores, !labels.empty());
}

inline std::string report_csv(const MetricReport& r, const std::string& method, const std::string& dataset)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "method,dataset,n,E,wF,Fmean,Fmax,MAE";
    for (const auto& [c, sub] : r.per_challenge)
        for (const char* col : {"n", "E", "wF", "Fmax", "MAE"}) os << ',' << challenge_code(c) << '_' << col;
    os << '\n' << method << ',' << dataset << ',' << r.count << ',' << r.e_measure << ',' << r.weighted_f << ','
       << r.f_mean << ',' << r.f_max << ',' << r.mae;
    for (const auto& [c, sub] : r.per_challenge)
        os << ',' << sub.count << ',' << sub.e_measure << ',' << sub.weighted_f << ',' << sub.f_max << ',' << sub.mae;
    os << '\n';
    return os.str();
}

inline std::string report_table(const MetricReport& r, const std::string& method, const std::string& dataset)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    const auto row = [&](const std::string& a, const std::string& b, const MetricReport& m, bool fmean) {
        os << std::left << std::setw(12) << a << std::setw(10) << b << std::right << std::setw(6) << m.count
           << std::setw(9) << m.e_measure << std::setw(9) << m.weighted_f;
        if (fmean)
            os << std::setw(9) << m.f_mean;
        else
            os << std::setw(9) << "-";
        os << std::setw(9) << m.f_max << std::setw(9) << m.mae << '\n';
    };
    os << std::left << std::setw(12) << "method" << std::setw(10) << "subset" << std::right << std::setw(6) << "n"
       << std::setw(9) << "E" << std::setw(9) << "wF" << std::setw(9) << "Fmean" << std::setw(9) << "Fmax"
       << std::setw(9) << "MAE" << '\n';
    row(method, dataset, r, true);
    for (const auto& [c, sub] : r.per_challenge) row(method, std::string(challenge_code(c)), sub, false);
    return os.str();
}

}  // namespace lafb
