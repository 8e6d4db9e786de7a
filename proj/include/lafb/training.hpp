#pragma once

#include "lafb/checkpoint.hpp"
#include "lafb/metrics.hpp"
#include "lafb/network.hpp"
#include "lafb/synthdata.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lafb {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

struct RunConfig {
    std::string profile = "paper";
    std::uint64_t seed = 7;
    std::string train_dir;
    std::string test_dir;
    std::string out = "runs/lafb";
    ModelConfig model;
    LossWeights loss;
    double lr = 5e-5;
    std::size_t batch_size = 16;
    std::size_t epochs = 80;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t val_every = 0;   ///< validate on test_dir every N epochs; 0 disables

    static RunConfig for_profile(const std::string& name)
    {
        RunConfig c;
        c.profile = name;
        if (name == "paper") {
            c.model.encoder.input_size = 352;
        } else if (name == "desk") {
            c.lr = 1e-3;
            c.batch_size = 8;
            c.epochs = 30;
            c.model.encoder.input_size = 64;
        } else {
            throw ConfigError("unknown profile '" + name + "' (expected paper or desk)");
        }
        return c;
    }

    static const std::set<std::string>& known_keys()
    {
        static const std::set<std::string> keys{
            "profile", "seed", "train_dir", "test_dir", "out", "lr", "batch_size", "epochs", "adam_beta1",
            "adam_beta2", "adam_eps", "val_every", "input_size", "stem_channels", "channels", "decoder_width",
            "no_afb", "no_aem", "no_iigm", "schemes", "lambda2", "lambda3", "lambda4", "lambda5", "use_smooth",
            "use_dice"};
        return keys;
    }

    /// Profile defaults first, then every key in `kv` on top.
    static RunConfig from_kv(const KeyValues& kv)
    {
        for (const std::string& k : kv.keys())
            if (!known_keys().count(k)) throw ConfigError("unknown configuration key '" + k + "'");
        RunConfig c = for_profile(kv.get("profile", "paper"));
        const auto count = [&](const char* key, std::size_t fallback) {
            const long v = kv.get_int(key, static_cast<long>(fallback));
            if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
            return static_cast<std::size_t>(v);
        };
        const long seed = kv.get_int("seed", static_cast<long>(c.seed));
        if (seed < 0) throw ConfigError("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(seed);
        c.train_dir = kv.get("train_dir", c.train_dir);
        c.test_dir = kv.get("test_dir", c.test_dir);
        c.out = kv.get("out", c.out);
        c.lr = kv.get_double("lr", c.lr);
        c.batch_size = count("batch_size", c.batch_size);
        c.epochs = count("epochs", c.epochs);
        c.adam_beta1 = kv.get_double("adam_beta1", c.adam_beta1);
        c.adam_beta2 = kv.get_double("adam_beta2", c.adam_beta2);
        c.adam_eps = kv.get_double("adam_eps", c.adam_eps);
        c.val_every = count("val_every", c.val_every);

        KeyValues mk = c.model.to_kv();
        for (const char* k : {"input_size", "stem_channels", "channels", "decoder_width", "no_afb", "no_aem", "no_iigm",
                              "schemes"})
            if (kv.has(k)) mk.set(k, kv.get(k, ""));
        c.model = ModelConfig::from_kv(mk);

        for (int level = 2; level <= 5; ++level) {
            const std::string key = "lambda" + std::to_string(level);
            c.loss.lambda[static_cast<std::size_t>(level - 2)] =
                kv.get_double(key, c.loss.lambda[static_cast<std::size_t>(level - 2)]);
        }
        c.loss.use_smooth = kv.get_bool("use_smooth", c.loss.use_smooth);
        c.loss.use_dice = kv.get_bool("use_dice", c.loss.use_dice);
        c.validate();
        return c;
    }

    KeyValues to_kv() const
    {
        KeyValues kv;
        kv.set("profile", profile);
        kv.set("seed", std::to_string(seed));
        kv.set("train_dir", train_dir);
        kv.set("test_dir", test_dir);
        kv.set("out", out);
        kv.set("lr", format_double(lr));
        kv.set("batch_size", std::to_string(batch_size));
        kv.set("epochs", std::to_string(epochs));
        kv.set("adam_beta1", format_double(adam_beta1));
        kv.set("adam_beta2", format_double(adam_beta2));
        kv.set("adam_eps", format_double(adam_eps));
        kv.set("val_every", std::to_string(val_every));
        kv.update(model.to_kv());
        for (int level = 2; level <= 5; ++level)
            kv.set("lambda" + std::to_string(level), format_double(loss.lambda[static_cast<std::size_t>(level - 2)]));
        kv.set("use_smooth", loss.use_smooth ? "true" : "false");
        kv.set("use_dice", loss.use_dice ? "true" : "false");
        return kv;
    }

    void validate() const
    {
        model.validate();
        loss.validate();
        if (!(lr > 0.0)) throw ConfigError("lr must be positive");
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (epochs == 0) throw ConfigError("epochs must be positive");
        if (!(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_eps > 0))
            throw ConfigError("adam parameters out of range");
    }
};

/// Adaptive moment estimation with bias correction, constant step size.
class Adam {
public:
    Adam(const ParamStore& p, double lr, double b1, double b2, double eps) : lr_(lr), b1_(b1), b2_(b2), eps_(eps)
    {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m_.emplace_back(p.value(i).shape());
            v_.emplace_back(p.value(i).shape());
        }
    }

    void step(ParamStore& p, const std::vector<Tensor>& grads)
    {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, double(t_)), c2 = 1.0 - std::pow(b2_, double(t_));
        for (std::size_t i = 0; i < p.size(); ++i) {
            Tensor& w = p.value(i);
            const Tensor& g = grads[i];
            Tensor& m = m_[i];
            Tensor& v = v_[i];
            for (std::size_t k = 0; k < w.size(); ++k) {
                m[k] = b1_ * m[k] + (1.0 - b1_) * g[k];
                v[k] = b2_ * v[k] + (1.0 - b2_) * g[k] * g[k];
                w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
            }
        }
    }

    std::size_t steps() const { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    std::size_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

struct Batch {
    Tensor rgb, aux, gt;
};

inline Batch make_batch(const std::vector<Sample>& data, const std::vector<std::size_t>& order, std::size_t begin,
                        std::size_t end)
{
    const std::size_t b = end - begin, h = data[order[begin]].rgb.dim(1), w = data[order[begin]].rgb.dim(2);
    Batch out{Tensor(Shape{b, 3, h, w}), Tensor(Shape{b, 3, h, w}), Tensor(Shape{b, 1, h, w})};
    const std::size_t img = 3 * h * w, map = h * w;
    for (std::size_t k = 0; k < b; ++k) {
        const Sample& s = data[order[begin + k]];
        std::copy(s.rgb.ptr(), s.rgb.ptr() + img, out.rgb.ptr() + k * img);
        std::copy(s.aux.ptr(), s.aux.ptr() + img, out.aux.ptr() + k * img);
        std::copy(s.gt.ptr(), s.gt.ptr() + map, out.gt.ptr() + k * map);
    }
    return out;
}

/// Fisher-Yates with a 53-bit uniform draw, independent of the standard library's shuffle.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const std::size_t j = std::min(i - 1, static_cast<std::size_t>(u * double(i)));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

/// Rejects data the model cannot consume, naming the first bad sample.
inline void validate_dataset(const std::vector<Sample>& data, std::size_t input_size)
{
    if (data.empty()) throw ContractError("dataset is empty");
    for (const Sample& s : data) {
        if (s.rgb.rank() != 3 || s.rgb.dim(1) != input_size || s.rgb.dim(2) != input_size)
            throw DimensionError("sample " + s.id + ": image " + shape_str(s.rgb.shape()) + " does not match input size " +
                                 std::to_string(input_size));
        if (!s.labels.empty())
            if (auto bad = check_labels(s)) throw ContractError("sample " + s.id + ": " + *bad);
        for (double v : s.gt.data())
            if (v != 0.0 && v != 1.0) throw ContractError("sample " + s.id + ": ground truth is not binary");
    }
}

struct TraceRow {
    std::size_t epoch = 0;
    int level = 0;
    std::array<std::optional<double>, 5> weight;   ///< indexed by Scheme
};

inline std::string trace_csv_header()
{
    return "epoch,level,cb,sv,ic,li,td\n";
}

inline std::string trace_csv_row(const TraceRow& r)
{
    std::ostringstream os;
    os << std::setprecision(17) << r.epoch << ',' << r.level;
    for (const auto& w : r.weight) {
        os << ',';
        if (w) os << *w;
    }
    os << '\n';
    return os.str();
}

inline std::vector<TraceRow> read_trace_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weight trace " + path);
    std::vector<TraceRow> rows;
    std::string line;
    std::getline(in, line);
    if (KeyValues::trim(line) != KeyValues::trim(trace_csv_header())) throw IoError("weight trace " + path + ": bad header");
    while (std::getline(in, line)) {
        if (KeyValues::trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(KeyValues::trim(cell));
        while (cells.size() < 7) cells.emplace_back();
        if (cells.size() != 7) throw IoError("weight trace " + path + ": malformed row '" + line + "'");
        TraceRow r;
        try {
            r.epoch = static_cast<std::size_t>(std::stoul(cells[0]));
            r.level = std::stoi(cells[1]);
            for (std::size_t k = 0; k < 5; ++k)
                if (!cells[k + 2].empty()) r.weight[k] = std::stod(cells[k + 2]);
        } catch (const std::exception&) {
            throw IoError("weight trace " + path + ": malformed row '" + line + "'");
        }
        rows.push_back(r);
    }
    return rows;
}

struct LevelDominance {
    int level = 0;
    std::array<std::optional<double>, 5> mean;   ///< per scheme over the window
    std::optional<Scheme> dominant;              ///< strict argmax, absent on ties
    std::optional<bool> matched_dominant;        ///< matched scheme is the strict argmax
    std::optional<bool> matched_above_others;    ///< matched mean exceeds the mean of the other schemes
};

struct DominanceSummary {
    std::size_t window = 0;        ///< epochs actually averaged
    bool short_trace = false;      ///< fewer epochs than requested
    bool no_dominant = false;      ///< some level has no strict argmax
    std::vector<LevelDominance> levels;
    LevelDominance overall;        ///< means over all levels, level = 0
};

namespace detail {

inline void judge(LevelDominance& d, std::optional<Scheme> matched)
{
    std::optional<Scheme> best;
    double best_v = 0;
    bool tie = false;
    for (Scheme s : kAllSchemes) {
        const auto& m = d.mean[static_cast<std::size_t>(s)];
        if (!m) continue;
        if (!best || *m > best_v) {
            best = s;
            best_v = *m;
            tie = false;
        } else if (*m == best_v) {
            tie = true;
        }
    }
    if (best && !tie) d.dominant = best;
    if (!matched) return;
    const auto& mm = d.mean[static_cast<std::size_t>(*matched)];
    if (!mm) return;
    d.matched_dominant = d.dominant == matched;
    double others = 0;
    int n = 0;
    for (Scheme s : kAllSchemes)
        if (s != *matched && d.mean[static_cast<std::size_t>(s)]) {
            others += *d.mean[static_cast<std::size_t>(s)];
            ++n;
        }
    d.matched_above_others = n > 0 && *mm > others / n;
}

}  // namespace detail

/// Per-level and overall mean weight of each scheme over the last `window` epochs.
inline DominanceSummary summarize_trace(const std::vector<TraceRow>& rows, std::optional<Scheme> matched = std::nullopt,
                                        std::size_t window = 5)
{
    if (rows.empty()) throw ContractError("weight trace is empty");
    std::size_t last = 0;
    std::set<std::size_t> epochs;
    std::set<int> levels;
    for (const TraceRow& r : rows) {
        last = std::max(last, r.epoch);
        epochs.insert(r.epoch);
        levels.insert(r.level);
    }
    DominanceSummary out;
    out.window = std::min(window, epochs.size());
    out.short_trace = epochs.size() < window;
    std::vector<std::size_t> ep(epochs.begin(), epochs.end());
    const std::size_t first = ep[ep.size() - out.window];
    std::array<double, 5> all_sum{};
    std::array<int, 5> all_n{};
    for (int level : levels) {
        LevelDominance d;
        d.level = level;
        std::array<double, 5> sum{};
        std::array<int, 5> n{};
        for (const TraceRow& r : rows)
            if (r.level == level && r.epoch >= first)
                for (std::size_t k = 0; k < 5; ++k)
                    if (r.weight[k]) {
                        sum[k] += *r.weight[k];
                        ++n[k];
                        all_sum[k] += *r.weight[k];
                        ++all_n[k];
                    }
        for (std::size_t k = 0; k < 5; ++k)
            if (n[k]) d.mean[k] = sum[k] / n[k];
        detail::judge(d, matched);
        out.no_dominant |= !d.dominant.has_value();
        out.levels.push_back(d);
    }
    for (std::size_t k = 0; k < 5; ++k)
        if (all_n[k]) out.overall.mean[k] = all_sum[k] / all_n[k];
    detail::judge(out.overall, matched);
    out.no_dominant |= !out.overall.dominant.has_value();
    return out;
}

inline std::string dominance_text(const DominanceSummary& s, std::optional<Scheme> matched)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "window_epochs = " << s.window << (s.short_trace ? " (short trace, all epochs used)" : "") << '\n';
    const auto line = [&](const LevelDominance& d, const std::string& name) {
        os << std::left << std::setw(8) << name << std::right;
        for (Scheme sc : kAllSchemes) {
            os << "  " << scheme_name(sc) << '=';
            if (d.mean[static_cast<std::size_t>(sc)])
                os << *d.mean[static_cast<std::size_t>(sc)];
            else
                os << "  -   ";
        }
        os << "  dominant=" << (d.dominant ? std::string(scheme_name(*d.dominant)) : std::string("none"));
        if (matched && d.matched_above_others)
            os << "  matched(" << scheme_name(*matched) << ")_dominant=" << (*d.matched_dominant ? "true" : "false")
               << "  matched_above_others=" << (*d.matched_above_others ? "true" : "false");
        os << '\n';
    };
    for (const LevelDominance& d : s.levels) line(d, "level" + std::to_string(d.level));
    line(s.overall, "overall");
    if (s.no_dominant) os << "flag: no dominant scheme at some level\n";
    return os.str();
}

/// S2 for every sample, computed in batches without gradients.
inline std::vector<Tensor> predict_maps(const Model& m, const std::vector<Sample>& data, std::size_t batch = 8)
{
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<Tensor> out;
    for (std::size_t b = 0; b < data.size(); b += batch) {
        const std::size_t e = std::min(data.size(), b + batch);
        Batch bt = make_batch(data, order, b, e);
        Tape tape;
        const Tensor& s2 = m.forward(tape, bt.rgb, bt.aux).maps.s(2).value();
        const std::size_t h = s2.dim(2), w = s2.dim(3);
        for (std::size_t k = 0; k < e - b; ++k)
            out.emplace_back(Shape{1, h, w}, std::vector<double>(s2.ptr() + k * h * w, s2.ptr() + (k + 1) * h * w));
    }
    return out;
}

inline MetricReport evaluate(const Model& m, const std::vector<Sample>& data)
{
    if (data.empty()) throw ContractError("evaluate: empty dataset");
    validate_dataset(data, m.config().encoder.input_size);
    const std::vector<Tensor> preds = predict_maps(m, data);
    bool labels = true;
    for (const Sample& s : data) labels = labels && !s.labels.empty();
    std::vector<ImageScores> scores;
    for (std::size_t i = 0; i < data.size(); ++i) scores.push_back(score_image(preds[i], data[i].gt, data[i].labels));
    return report(scores, labels);
}

/// Loads a checkpoint and a dataset directory, writes report.csv and report.txt into `out`.
inline MetricReport evaluate_checkpoint(const std::string& checkpoint, const std::string& data_dir, const std::string& out,
                                        const std::string& method = "lafb")
{
    Model m = load_checkpoint(checkpoint);
    const DatasetIndex idx = load_index(data_dir);
    const std::vector<Sample> data = load_dataset(idx);
    const MetricReport r = evaluate(m, data);
    std::filesystem::path dp(data_dir);
    if (dp.filename().empty()) dp = dp.parent_path();
    const std::string name = dp.filename().string();
    std::filesystem::create_directories(out);
    std::ofstream csv(std::filesystem::path(out) / "report.csv"), txt(std::filesystem::path(out) / "report.txt");
    if (!csv || !txt) throw IoError("cannot write report into " + out);
    csv << report_csv(r, method, name);
    txt << report_table(r, method, name);
    return r;
}

struct TrainResult {
    Model model;
    std::vector<LossReport> steps;
    std::vector<double> epoch_loss;   ///< mean total per epoch
    std::vector<TraceRow> trace;
};

struct TrainHooks {
    std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

}  // namespace detail

/// Trains from scratch. Writes into cfg.out: config.txt, train_log.csv, weight_trace.csv,
/// checkpoint.bin (+ .manifest, rewritten every epoch) and val_log.csv when validating.
inline TrainResult train(const RunConfig& cfg, const std::vector<Sample>& data, const std::vector<Sample>& val = {},
                         const TrainHooks& hooks = {})
{
    namespace fs = std::filesystem;
    cfg.validate();
    validate_dataset(data, cfg.model.encoder.input_size);
    if (!val.empty()) validate_dataset(val, cfg.model.encoder.input_size);
    fs::create_directories(cfg.out);
    const fs::path out(cfg.out);
    detail::open_out(out / "config.txt") << cfg.to_kv().str();
    std::ofstream log = detail::open_out(out / "train_log.csv");
    std::ofstream trace = detail::open_out(out / "weight_trace.csv");
    std::optional<std::ofstream> val_log;
    if (!val.empty() && cfg.val_every > 0) {
        val_log = detail::open_out(out / "val_log.csv");
        *val_log << "epoch,E,wF,Fmean,Fmax,MAE\n";
    }
    log << "epoch,step,l2,l3,l4,l5,smooth,dice,total\n";
    trace << trace_csv_header();
    log << std::setprecision(17);
    *(val_log ? &*val_log : &log) << std::setprecision(17);

    TrainResult res{Model(cfg.model), {}, {}, {}};
    Model& model = res.model;
    model.init(cfg.seed);
    Adam adam(model.params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = epoch_order(data.size(), cfg.seed, epoch);
        std::array<std::array<double, 5>, 4> wsum{};
        std::array<std::array<bool, 5>, 4> wseen{};
        double seen = 0, loss_sum = 0;
        for (std::size_t b = 0; b < data.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(data.size(), b + cfg.batch_size);
            Batch bt = make_batch(data, order, b, e);
            std::vector<Tensor> grads;
            LossReport rep;
            {
                Tape tape;
                Binding bind(tape, model.params(), true);
                ForwardResult fr = model.forward(bind, tape.constant(bt.rgb), tape.constant(bt.aux));
                LossTerms lt = total_loss(fr.maps, bt.gt, bt.rgb, cfg.loss);
                tape.backward(lt.total);
                grads.reserve(bind.size());
                for (const Var& v : bind.vars()) grads.push_back(tape.gradient(v));
                rep = lt.report;
                const double nb = double(e - b);
                for (std::size_t k = 0; k < 4; ++k) {
                    if (!fr.weights[k]) continue;
                    for (Scheme s : kAllSchemes)
                        if (auto m = fr.weights[k]->mean_of(s)) {
                            wsum[k][static_cast<std::size_t>(s)] += *m * nb;
                            wseen[k][static_cast<std::size_t>(s)] = true;
                        }
                }
            }
            adam.step(model.params(), grads);
            ++step;
            seen += double(e - b);
            loss_sum += rep.total * double(e - b);
            res.steps.push_back(rep);
            log << epoch << ',' << step;
            for (double l : rep.bce) log << ',' << l;
            log << ',' << rep.smooth << ',' << rep.dice << ',' << rep.total << '\n';
        }
        res.epoch_loss.push_back(loss_sum / seen);
        for (std::size_t k = 0; k < 4; ++k) {
            bool any = false;
            TraceRow row;
            row.epoch = epoch;
            row.level = static_cast<int>(k + 2);
            for (std::size_t s = 0; s < 5; ++s)
                if (wseen[k][s]) {
                    row.weight[s] = wsum[k][s] / seen;
                    any = true;
                }
            if (!any) continue;
            trace << trace_csv_row(row);
            res.trace.push_back(row);
        }
        log.flush();
        trace.flush();
        save_checkpoint(model, (out / "checkpoint.bin").string());
        if (val_log && epoch % cfg.val_every == 0) {
            MetricReport r = evaluate(model, val);
            *val_log << epoch << ',' << r.e_measure << ',' << r.weighted_f << ',' << r.f_mean << ',' << r.f_max << ','
                     << r.mae << '\n';
            val_log->flush();
        }
        if (hooks.on_epoch) hooks.on_epoch(epoch, res.epoch_loss.back());
    }
    return res;
}

/// Saliency PNG for an arbitrary image pair; inputs are resized to the model size and the
/// map is resized back.
inline Tensor predict_pair(const Model& m, const Tensor& rgb, const Tensor& aux)
{
    if (rgb.rank() != 3 || rgb.dim(0) != 3 || aux.shape() != rgb.shape())
        throw DimensionError("predict: rgb " + shape_str(rgb.shape()) + " and aux " + shape_str(aux.shape()) +
                             " must both be [3,H,W] of equal size");
    const long n = static_cast<long>(m.config().encoder.input_size);
    const long h = static_cast<long>(rgb.dim(1)), w = static_cast<long>(rgb.dim(2));
    Tape tape;
    const auto fit = [&](const Tensor& x) {
        Var v = tape.constant(x.reshaped(Shape{1, 3, x.dim(1), x.dim(2)}));
        return (h == n && w == n) ? v : bilinear_resize(v, n, n);
    };
    Binding b(tape, m.params(), false);
    Var s2 = m.forward(b, fit(rgb), fit(aux)).maps.s(2);
    if (h != n || w != n) s2 = bilinear_resize(s2, h, w);
    return s2.value().reshaped(Shape{1, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
}

}  // namespace lafb
