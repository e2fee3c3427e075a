#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "training.hpp"

namespace dx {

struct AblationEntry {
    std::string name;
    std::vector<EvalReport> runs;      // one per completed seed (baselines: a single run)
    std::vector<std::string> errors;   // failures, "seed N: why"; recorded, not fatal
    MetricPair mean_scaled;            // averaged over completed runs
    MetricPair mean_raw;
};

struct AblationOptions {
    std::vector<Variant> variants = {Variant::full,    Variant::no_hfr,
                                     Variant::no_jta,  Variant::no_both,
                                     Variant::plain_seq2seq, Variant::att_seq2seq};
    bool baselines = true;
    std::size_t seasonal_period = 7;
    std::size_t ar_order = 7;
};

namespace detail {

inline void finish_entry(AblationEntry& e) {
    if (e.runs.empty()) return;
    for (const EvalReport& r : e.runs) {
        e.mean_scaled.rmse += r.aggregate_scaled.rmse;
        e.mean_scaled.mae += r.aggregate_scaled.mae;
        e.mean_raw.rmse += r.aggregate_raw.rmse;
        e.mean_raw.mae += r.aggregate_raw.mae;
    }
    const double n = static_cast<double>(e.runs.size());
    e.mean_scaled.rmse /= n;
    e.mean_scaled.mae /= n;
    e.mean_raw.rmse /= n;
    e.mean_raw.mae /= n;
}

}  // namespace detail

/**
 * Component-knockout study: trains every requested variant from every
 * seed on the same windowing and scalers, scores k-step rollouts on the
 * held-out test anchors, and appends the training-free baselines scored
 * on exactly the same anchors. The seed drives both the parameter init
 * and the shuffle/dropout streams, so each (variant, seed) cell is
 * reproducible in isolation.
 */
inline std::vector<AblationEntry> run_ablation(const SeriesDataset& data,
                                               const ModelConfig& base,
                                               const TrainConfig& train_cfg,
                                               const std::vector<std::uint64_t>& seeds,
                                               const AblationOptions& opts = {}) {
    if (seeds.empty()) throw ConfigError("ablation: no seeds given");
    ModelConfig resolved = base;
    resolved.resolve();
    const std::size_t h = resolved.history_len;
    const std::size_t l = resolved.half_window;
    const std::size_t k = resolved.horizon;
    Experiment exp = prepare_experiment(data, h, l);

    std::vector<AblationEntry> out;
    for (Variant v : opts.variants) {
        AblationEntry entry;
        entry.name = variant_name(v);
        for (std::uint64_t seed : seeds) {
            try {
                ModelConfig mc = resolved;
                mc.variant = v;
                DeepExpressModel model = init_params(mc, seed);
                TrainConfig tc = train_cfg;
                tc.seed = seed;
                train(model, exp.split.train, exp.split.val, exp.scalers, tc);
                EvalReport rep = evaluate_rollouts(model, data, exp.split.test, exp.scalers, k);
                rep.seeds = {seed};
                entry.runs.push_back(rep);
            } catch (const Error& e) {
                entry.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
            }
        }
        detail::finish_entry(entry);
        out.push_back(std::move(entry));
    }

    if (opts.baselines) {
        {
            AblationEntry entry;
            entry.name = "seasonal_naive";
            try {
                auto predict = [&](const std::vector<double>& hist, std::size_t,
                                   std::size_t steps) {
                    return seasonal_naive(hist, opts.seasonal_period, steps);
                };
                entry.runs.push_back(evaluate_rollouts_with(predict, entry.name, data,
                                                            exp.split.test, exp.scalers, l, k));
            } catch (const Error& e) {
                entry.errors.push_back(e.what());
            }
            detail::finish_entry(entry);
            out.push_back(std::move(entry));
        }
        {
            AblationEntry entry;
            entry.name = "linear_ar";
            try {
                // Fit strictly on the rows the training split can see.
                const std::size_t last_train_day = exp.split.train.back().anchor + 1;
                std::vector<double> ys;
                for (std::size_t i = 0; i <= last_train_day; ++i)
                    ys.push_back(data.rows()[i].y);
                ArModel ar = fit_linear_ar(ys, opts.ar_order);
                auto predict = [&ar](const std::vector<double>& hist, std::size_t,
                                     std::size_t steps) { return ar.forecast(hist, steps); };
                entry.runs.push_back(evaluate_rollouts_with(predict, entry.name, data,
                                                            exp.split.test, exp.scalers, l, k));
            } catch (const Error& e) {
                entry.errors.push_back(e.what());
            }
            detail::finish_entry(entry);
            out.push_back(std::move(entry));
        }
    }
    return out;
}

}  // namespace dx
