#include "lafb/gradcheck.hpp"
#include "lafb/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

using namespace lafb;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kGenerateKeys{"count", "mix", "height", "width", "extra_label_prob", "split"};

/// Holds --config plus one flag per configuration key; flags win over the file.
struct Overrides {
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;

    void attach(CLI::App& app, const std::set<std::string>& keys)
    {
        app.add_option("--config", config, "key = value configuration file");
        for (const std::string& k : keys) {
            std::string dashed = k;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            const std::string names = dashed == k ? "--" + k : "--" + dashed + ",--" + k;
            if (k == "no_afb" || k == "no_aem" || k == "no_iigm") {
                switches[k] = false;
                app.add_flag(names, switches[k], "set " + k + " = true");
            } else {
                app.add_option(names, values[k], "override " + k);
            }
        }
    }

    KeyValues merged() const
    {
        KeyValues kv = config.empty() ? KeyValues{} : KeyValues::load(config);
        for (const auto& [k, v] : values)
            if (!v.empty()) kv.set(k, v);
        for (const auto& [k, on] : switches)
            if (on) kv.set(k, "true");
        return kv;
    }
};

std::set<std::string> run_keys()
{
    return RunConfig::known_keys();
}

std::set<std::string> generate_keys()
{
    std::set<std::string> k = kGenerateKeys;
    k.insert({"seed", "out", "profile", "input_size"});
    return k;
}

KeyValues pick(const KeyValues& kv, const std::set<std::string>& allowed, const std::set<std::string>& tolerated)
{
    KeyValues out;
    for (const std::string& k : kv.keys()) {
        if (allowed.count(k))
            out.set(k, kv.get(k, ""));
        else if (!tolerated.count(k))
            throw ConfigError("unknown configuration key '" + k + "'");
    }
    return out;
}

RunConfig run_config(const Overrides& o)
{
    std::set<std::string> tolerated = kGenerateKeys;
    return RunConfig::from_kv(pick(o.merged(), run_keys(), tolerated));
}

int cmd_generate(const Overrides& o)
{
    std::set<std::string> tolerated = run_keys();
    const KeyValues kv = pick(o.merged(), generate_keys(), tolerated);
    if (!kv.has("out")) throw ConfigError("generate: --out is required");
    const RunConfig profile = RunConfig::for_profile(kv.get("profile", "desk"));
    GenerateOptions g;
    const long seed = kv.get_int("seed", 7);
    if (seed < 0) throw ConfigError("seed must be non-negative");
    g.seed = static_cast<std::uint64_t>(seed);
    const long count = kv.get_int("count", static_cast<long>(g.count));
    if (count < 0) throw ConfigError("count must be non-negative");
    g.count = static_cast<std::size_t>(count);
    const long side = kv.get_int("input_size", static_cast<long>(profile.model.encoder.input_size));
    const long h = kv.get_int("height", side), w = kv.get_int("width", side);
    if (h < 0 || w < 0) throw ConfigError("image size must be non-negative");
    g.height = static_cast<std::size_t>(h);
    g.width = static_cast<std::size_t>(w);
    g.extra_label_prob = kv.get_double("extra_label_prob", g.extra_label_prob);
    g.split = kv.get("split", g.split);
    if (kv.has("mix")) {
        const std::vector<std::string> parts = kv.get_list("mix");
        const bool codes = !parts.empty() && parse_challenge(parts[0]).has_value();
        if (codes) {
            g.mix = {0, 0, 0, 0, 0};
            for (const std::string& p : parts) {
                auto c = parse_challenge(p);
                if (!c) throw ConfigError("mix: unknown challenge '" + p + "'");
                g.mix[static_cast<std::size_t>(*c)] = 1.0;
            }
        } else {
            if (parts.size() != 5) throw ConfigError("mix: expected five weights (CB,SV,IC,LI,TD) or challenge codes");
            for (std::size_t i = 0; i < 5; ++i) g.mix[i] = KeyValues::to_double("mix", parts[i]);
        }
    }
    const DatasetIndex idx = generate_dataset(kv.get("out", ""), g);
    std::cout << "wrote " << idx.ids.size() << " samples to " << idx.root << '\n';
    return 0;
}

int cmd_train(const Overrides& o)
{
    const RunConfig cfg = run_config(o);
    if (cfg.train_dir.empty()) throw ConfigError("train: --train-dir is required");
    const std::vector<Sample> data = load_dataset(load_index(cfg.train_dir));
    std::vector<Sample> val;
    if (!cfg.test_dir.empty() && cfg.val_every > 0) val = load_dataset(load_index(cfg.test_dir));
    std::cout << "training " << data.size() << " samples, " << cfg.epochs << " epochs, profile " << cfg.profile
              << ", out " << cfg.out << '\n';
    TrainHooks hooks{[](std::size_t epoch, double loss) {
        std::cout << "epoch " << epoch << " loss " << std::setprecision(6) << loss << std::endl;
    }};
    const TrainResult r = train(cfg, data, val, hooks);
    std::cout << "initial loss " << r.steps.front().total << " final epoch loss " << r.epoch_loss.back() << '\n';
    std::cout << "checkpoint " << (fs::path(cfg.out) / "checkpoint.bin").string() << '\n';
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& out, const std::string& method)
{
    const MetricReport r = evaluate_checkpoint(checkpoint, data, out, method);
    std::filesystem::path dp(data);
    if (dp.filename().empty()) dp = dp.parent_path();
    std::cout << report_table(r, method, dp.filename().string());
    return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& rgb, const std::string& aux, const std::string& out)
{
    const Model m = load_checkpoint(checkpoint);
    const Tensor a = read_png_rgb(rgb);
    const Tensor b = read_png_rgb(aux);
    const Tensor s = predict_pair(m, a, b);
    write_png_gray(out, s);
    std::cout << "wrote " << out << '\n';
    return 0;
}

int cmd_gradcheck(const Overrides& o, const std::string& checkpoint, std::size_t probes, std::size_t batch)
{
    KeyValues kv = o.merged();
    if (!kv.has("profile")) kv.set("profile", "desk");
    if (!kv.has("input_size")) kv.set("input_size", "32");
    const RunConfig cfg = RunConfig::from_kv(pick(kv, run_keys(), kGenerateKeys));
    Model m = checkpoint.empty() ? Model(cfg.model) : load_checkpoint(checkpoint);
    if (checkpoint.empty()) m.init(cfg.seed);
    const std::size_t n = m.config().encoder.input_size;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor rgb(Shape{batch, 3, n, n}), aux(Shape{batch, 3, n, n});
    for (double& v : rgb.data()) v = u(rng);
    for (double& v : aux.data()) v = u(rng);
    std::vector<Tensor*> leaves;
    std::size_t total = 0;
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        leaves.push_back(&m.params().value(i));
        total += m.params().value(i).size();
    }
    GradcheckOptions opt;
    opt.seed = cfg.seed;
    opt.fraction = std::min(1.0, double(probes) / double(total));
    const GradcheckResult r = gradcheck(
        [&](Tape& t, std::span<const Var> v) {
            Binding b(std::vector<Var>(v.begin(), v.end()));
            return sum(m.forward(b, t.constant(rgb), t.constant(aux)).maps.s(2));
        },
        leaves, opt);
    std::cout << "parameters " << total << " probed " << r.probed << " max_rel_error " << std::scientific
              << r.max_rel_error << " (analytic " << r.worst_analytic << ", numeric " << r.worst_numeric << ")\n";
    if (!(r.max_rel_error < 1e-3))
        throw ContractError("gradcheck: max relative error " + std::to_string(r.max_rel_error) + " >= 1e-3");
    return 0;
}

int cmd_weight_trace(const std::string& trace, const std::string& challenge, std::size_t window, const std::string& out)
{
    fs::path p(trace);
    if (fs::is_directory(p)) p /= "weight_trace.csv";
    std::optional<Scheme> matched;
    if (!challenge.empty()) {
        auto c = parse_challenge(challenge);
        if (!c) throw ConfigError("unknown challenge '" + challenge + "'");
        matched = matched_scheme(*c);
    }
    const DominanceSummary s = summarize_trace(read_trace_csv(p.string()), matched, window);
    const std::string text = dominance_text(s, matched);
    std::cout << text;
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw IoError("cannot write " + out);
        f << text;
    }
    return 0;
}

std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive fusion bank saliency detector"};
    app.require_subcommand(1);

    Overrides gen_o, train_o, grad_o;
    auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
    gen_o.attach(*gen, generate_keys());

    auto* tr = app.add_subcommand("train", "train a model");
    train_o.attach(*tr, run_keys());

    std::string ckpt, data, out = "eval", method = "lafb";
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    ev->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    ev->add_option("--data", data, "dataset directory")->required();
    ev->add_option("--out", out, "report directory");
    ev->add_option("--method", method, "method name in the report");

    std::string rgb, aux, png;
    auto* pr = app.add_subcommand("predict", "saliency map for one image pair");
    pr->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    pr->add_option("--rgb", rgb, "RGB image")->required();
    pr->add_option("--aux", aux, "auxiliary image")->required();
    pr->add_option("--out", png, "output PNG")->required();

    std::size_t probes = 200, batch = 1;
    std::string grad_ckpt;
    auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full model");
    grad_o.attach(*gc, run_keys());
    gc->add_option("--checkpoint", grad_ckpt, "check a trained model instead of a fresh one");
    gc->add_option("--probes", probes, "approximate number of parameters probed");
    gc->add_option("--batch", batch, "batch size of the random input")->check(CLI::PositiveNumber);

    std::string trace, challenge, summary;
    std::size_t window = 5;
    auto* wt = app.add_subcommand("weight-trace", "summarize fusion weights over the last epochs");
    wt->add_option("--trace", trace, "weight_trace.csv or a run directory")->required();
    wt->add_option("--challenge", challenge, "challenge the run was trained on (CB, SV, IC, LI, TD)");
    wt->add_option("--window", window, "epochs averaged")->check(CLI::PositiveNumber);
    wt->add_option("--out", summary, "also write the summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_o);
        if (tr->parsed()) return cmd_train(train_o);
        if (ev->parsed()) return cmd_eval(ckpt, data, out, method);
        if (pr->parsed()) return cmd_predict(ckpt, rgb, aux, png);
        if (gc->parsed()) return cmd_gradcheck(grad_o, grad_ckpt, probes, batch);
        if (wt->parsed()) return cmd_weight_trace(trace, challenge, window, summary);
    } catch (const std::exception& e) {
        std::cerr << "error: " << error_kind(e) << ": " << one_line(e.what()) << '\n';
        return 1;
    }
    return 1;
}
