#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace dx {

inline double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size())
        throw ShapeError("rmse: length mismatch " + std::to_string(y.size()) + " vs " +
                         std::to_string(yhat.size()));
    if (y.empty()) throw ValueError("rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - yhat[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(y.size()));
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size())
        throw ShapeError("mae: length mismatch " + std::to_string(y.size()) + " vs " +
                         std::to_string(yhat.size()));
    if (y.empty()) throw ValueError("mae: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::fabs(y[i] - yhat[i]);
    return acc / static_cast<double>(y.size());
}

struct MetricPair {
    double rmse = 0.0;
    double mae = 0.0;
};

// The power-mean inequality guarantees rmse >= mae; a violation means the
// metric plumbing itself broke, so report assembly refuses to continue.
inline MetricPair checked_metrics(const std::vector<double>& y,
                                  const std::vector<double>& yhat) {
    MetricPair m{rmse(y, yhat), mae(y, yhat)};
    if (m.rmse < m.mae - 1e-12)
        throw Error("metric assembly: rmse " + std::to_string(m.rmse) + " < mae " +
                    std::to_string(m.mae));
    return m;
}

/**
 * Rollout evaluation summary. Metrics come in both domains: scaled (the
 * min-max space the model trains in, matching the sub-1 magnitudes the
 * literature reports) and raw counts. per_step holds one entry per
 * forecast step 1..k; aggregate pools every step.
 */
struct EvalReport {
    std::string name;  // variant or baseline label
    std::size_t horizon = 0;
    std::size_t samples = 0;  // anchors actually evaluated
    std::vector<MetricPair> per_step_scaled;
    std::vector<MetricPair> per_step_raw;
    MetricPair aggregate_scaled;
    MetricPair aggregate_raw;
    std::vector<std::uint64_t> seeds;
    std::string config_echo;
};

// Anchors whose k-step targets and feature windows both stay inside the
// series. Every variant is scored on the same subset so comparisons are
// apples to apples.
inline bool anchor_evaluable(std::size_t anchor, std::size_t k, std::size_t l,
                             std::size_t series_len) {
    return anchor + k + l <= series_len - 1;
}

/**
 * Scores k-step rollouts from every evaluable sample anchor. The
 * predictor is called as predict(history_raw, anchor, k) with the whole
 * raw series up to and including the anchor day — each predictor slices
 * off the lag depth it needs — and must return k raw-domain forecasts;
 * the scaled view maps both truth and prediction through the y scaler.
 */
template <class F>
EvalReport evaluate_rollouts_with(F&& predict, const std::string& name,
                                  const SeriesDataset& data,
                                  const std::vector<Sample>& samples, const Scalers& scalers,
                                  std::size_t l, std::size_t k) {
    if (k < 1) throw ValueError("evaluate: horizon must be >= 1");
    std::vector<std::vector<double>> truth_raw(k), pred_raw(k), truth_scaled(k), pred_scaled(k);
    std::size_t used = 0;
    for (const Sample& s : samples) {
        if (!anchor_evaluable(s.anchor, k, l, data.size())) continue;
        std::vector<double> hist;
        hist.reserve(s.anchor + 1);
        for (std::size_t i = 0; i <= s.anchor; ++i) hist.push_back(data.rows()[i].y);
        std::vector<double> out = predict(hist, s.anchor, k);
        if (out.size() != k)
            throw ShapeError(name + ": predictor returned " + std::to_string(out.size()) +
                             " values for a " + std::to_string(k) + "-step rollout");
        for (std::size_t j = 0; j < k; ++j) {
            double t = data.rows()[s.anchor + 1 + j].y;
            truth_raw[j].push_back(t);
            pred_raw[j].push_back(out[j]);
            truth_scaled[j].push_back(scalers.y.apply(t));
            pred_scaled[j].push_back(scalers.y.apply(out[j]));
        }
        ++used;
    }
    if (used == 0) throw DataError(name + ": no anchor leaves room for a " + std::to_string(k) +
                                   "-step rollout");

    EvalReport rep;
    rep.name = name;
    rep.horizon = k;
    rep.samples = used;
    std::vector<double> all_truth_raw, all_pred_raw, all_truth_scaled, all_pred_scaled;
    for (std::size_t j = 0; j < k; ++j) {
        rep.per_step_scaled.push_back(checked_metrics(truth_scaled[j], pred_scaled[j]));
        rep.per_step_raw.push_back(checked_metrics(truth_raw[j], pred_raw[j]));
        all_truth_raw.insert(all_truth_raw.end(), truth_raw[j].begin(), truth_raw[j].end());
        all_pred_raw.insert(all_pred_raw.end(), pred_raw[j].begin(), pred_raw[j].end());
        all_truth_scaled.insert(all_truth_scaled.end(), truth_scaled[j].begin(),
                                truth_scaled[j].end());
        all_pred_scaled.insert(all_pred_scaled.end(), pred_scaled[j].begin(),
                               pred_scaled[j].end());
    }
    rep.aggregate_scaled = checked_metrics(all_truth_scaled, all_pred_scaled);
    rep.aggregate_raw = checked_metrics(all_truth_raw, all_pred_raw);
    return rep;
}

inline EvalReport evaluate_rollouts(DeepExpressModel& model, const SeriesDataset& data,
                                    const std::vector<Sample>& samples, const Scalers& scalers,
                                    std::size_t k) {
    FeatureProvider provider = dataset_features(data, model.config.half_window);
    const std::size_t h = model.config.history_len;
    auto predict = [&](const std::vector<double>& hist, std::size_t anchor, std::size_t steps) {
        if (hist.size() < h)
            throw DataError("evaluate: anchor " + std::to_string(anchor) + " has only " +
                            std::to_string(hist.size()) + " days of history, model needs " +
                            std::to_string(h));
        std::vector<double> window(hist.end() - static_cast<long>(h), hist.end());
        return predict_sequence(model, scalers, window, anchor, provider, steps);
    };
    return evaluate_rollouts_with(predict, variant_name(model.config.variant), data, samples,
                                  scalers, model.config.half_window, k);
}

}  // namespace dx
