#pragma once

#include "lafb/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace lafb {

/// Builds a scalar from leaf variables created by the checker.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradcheckOptions {
    double step = 1e-4;
    /// Fraction of leaf entries probed; 1.0 probes everything.
    double fraction = 1.0;
    std::uint64_t seed = 7;
};

struct GradcheckResult {
    double max_rel_error = 0.0;
    std::size_t probed = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Central finite differences on leaf entries, compared against one reverse sweep.
/// Error per entry is |a - n| / max(1, |a|, |n|). The leaves are perturbed in place and
/// restored before returning.
inline GradcheckResult gradcheck(const ScalarFn& fn, std::span<Tensor* const> leaves, const GradcheckOptions& opt = {})
{
    const auto evaluate = [&](bool with_grad, std::vector<Tensor>* grads) {
        Tape tape;
        std::vector<Var> vars;
        vars.reserve(leaves.size());
        for (Tensor* l : leaves) vars.push_back(tape.leaf_ref(*l, with_grad));
        Var out = fn(tape, vars);
        if (out.value().size() != 1)
            throw ContractError("gradcheck: computation must return a scalar, got " + shape_str(out.shape()));
        const double value = out.value()[0];
        if (grads) {
            tape.backward(out);
            for (const Var& v : vars) grads->push_back(tape.gradient(v));
        }
        return value;
    };

    std::vector<Tensor> analytic;
    evaluate(true, &analytic);

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    GradcheckResult result;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        Tensor& leaf = *leaves[li];
        for (std::size_t i = 0; i < leaf.size(); ++i) {
            if (opt.fraction < 1.0 && coin(rng) >= opt.fraction) continue;
            const double saved = leaf[i];
            leaf[i] = saved + opt.step;
            const double up = evaluate(false, nullptr);
            leaf[i] = saved - opt.step;
            const double down = evaluate(false, nullptr);
            leaf[i] = saved;
            const double numeric = (up - down) / (2.0 * opt.step);
            const double a = analytic[li][i];
            const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            ++result.probed;
            if (err >= result.max_rel_error) {
                result.max_rel_error = err;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace lafb
