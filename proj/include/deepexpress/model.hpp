#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "attention.hpp"
#include "autodiff.hpp"
#include "dataset.hpp"
#include "hfr.hpp"
#include "layers.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

enum class Variant { full, no_hfr, no_jta, no_both, plain_seq2seq, att_seq2seq };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_hfr: return "no_hfr";
        case Variant::no_jta: return "no_jta";
        case Variant::no_both: return "no_both";
        case Variant::plain_seq2seq: return "plain_seq2seq";
        case Variant::att_seq2seq: return "att_seq2seq";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::full, Variant::no_hfr, Variant::no_jta, Variant::no_both,
                      Variant::plain_seq2seq, Variant::att_seq2seq})
        if (name == variant_name(v)) return v;
    throw ConfigError("unknown variant '" + name + "'");
}

enum class LossKind { squared, absolute };

inline const char* loss_name(LossKind k) {
    return k == LossKind::squared ? "squared" : "absolute";
}

inline LossKind loss_from_name(const std::string& name) {
    if (name == "squared") return LossKind::squared;
    if (name == "absolute") return LossKind::absolute;
    throw ConfigError("unknown loss '" + name + "'");
}

struct ModelConfig {
    std::size_t history_len = 21;  // h
    std::size_t half_window = 3;   // l; the feature window spans 2l+1 days
    std::size_t horizon = 3;       // k
    std::size_t enc_hidden = 32;
    std::size_t dec_hidden = 32;
    std::size_t score_dim = 0;       // 0 resolves to enc_hidden
    std::size_t head_hidden = 0;     // 0 resolves to dec_hidden
    std::size_t embedding_dim = 4;   // per-feature width in the HFR bank
    std::size_t workday_hidden = 8;  // hidden units of the workday branch MLP
    double dropout_rate = 0.2;
    Activation output_activation = Activation::identity;
    LossKind loss = LossKind::squared;
    Variant variant = Variant::full;
    FeatureSchema schema;  // empty resolves to the delivery default

    std::size_t window_days() const { return 2 * half_window + 1; }

    void resolve() {
        if (embedding_dim == 0) throw ConfigError("embedding dim must be positive");
        if (score_dim == 0) score_dim = enc_hidden;
        if (head_hidden == 0) head_hidden = dec_hidden;
        if (schema.features.empty()) schema = FeatureSchema::express_default(embedding_dim);
        validate();
    }

    void validate() const {
        if (history_len < 1) throw ConfigError("history length must be >= 1");
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (enc_hidden == 0 || dec_hidden == 0 || score_dim == 0 || head_hidden == 0)
            throw ConfigError("hidden sizes must be positive");
        if (dec_hidden != enc_hidden)
            throw ConfigError("decoder hidden size must equal encoder hidden size (got " +
                              std::to_string(dec_hidden) + " vs " + std::to_string(enc_hidden) +
                              ")");
        if (embedding_dim == 0) throw ConfigError("embedding dim must be positive");
        if (workday_hidden == 0) throw ConfigError("workday hidden size must be positive");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw ConfigError("dropout rate must be in [0, 1)");
        schema.validate();
    }
};

/**
 * The assembled forecaster. Which blocks exist depends on the variant:
 *
 *   full           encoder + HFR + temporal & feature attention + fuse
 *   no_hfr         HFR swapped for a shared plain table + identity scalars
 *   no_jta         HFR kept; uniform feature weights, c_H = last state
 *   no_both        bare seq2seq, no feature path at all
 *   plain_seq2seq  same shape as no_both (baseline spelling)
 *   att_seq2seq    temporal attention + raw scaled features concatenated
 *
 * Every learnable tensor is reachable through parameters(), in a fixed
 * order, under a stable name.
 */
class DeepExpressModel {
public:
    ModelConfig config;
    LSTMCellParams encoder;
    LSTMCellParams decoder;
    MLPParams head;
    std::unique_ptr<HFR> hfr;                            // full, no_jta
    std::unique_ptr<CategoricalEmbedding> shared_table;  // no_hfr
    std::unique_ptr<TemporalAttentionParams> temporal;   // full, no_hfr, att_seq2seq
    std::unique_ptr<FeatureAttentionParams> feature_att; // full, no_hfr
    std::unique_ptr<Parameter> w_z;                      // full, no_hfr, no_jta

    explicit DeepExpressModel(ModelConfig cfg) : config(std::move(cfg)) {
        config.resolve();
        const Variant v = config.variant;

        if (v == Variant::full || v == Variant::no_jta)
            hfr = std::make_unique<HFR>(config.schema, config.workday_hidden);
        if (v == Variant::no_hfr) {
            std::size_t max_card = 0;
            for (const auto& f : config.schema.features)
                if (f.kind == FeatureKind::categorical)
                    max_card = std::max(max_card, f.cardinality);
            if (max_card > 0)
                shared_table = std::make_unique<CategoricalEmbedding>(
                    "shared", max_card, config.embedding_dim);
        }
        if (v == Variant::full || v == Variant::no_hfr || v == Variant::att_seq2seq)
            temporal = std::make_unique<TemporalAttentionParams>(
                "temporal", config.enc_hidden, config.enc_hidden, config.score_dim);
        if (v == Variant::full || v == Variant::no_hfr)
            feature_att = std::make_unique<FeatureAttentionParams>("feature", config.enc_hidden,
                                                                   config.score_dim);
        if (v == Variant::full || v == Variant::no_hfr || v == Variant::no_jta)
            w_z = std::make_unique<Parameter>("fuse.w_z",
                                              Tensor({config.enc_hidden, feature_dim()}));

        encoder = LSTMCellParams("encoder", 1, config.enc_hidden);
        decoder = LSTMCellParams("decoder", z_dim(), config.dec_hidden);
        head = MLPParams("head", config.dec_hidden, config.head_hidden, 1, Activation::sigmoid,
                         config.output_activation);
    }

    DeepExpressModel(const DeepExpressModel&) = delete;
    DeepExpressModel& operator=(const DeepExpressModel&) = delete;
    DeepExpressModel(DeepExpressModel&&) = default;
    DeepExpressModel& operator=(DeepExpressModel&&) = default;

    // Width of the per-sample feature vector d for this variant.
    std::size_t feature_dim() const {
        const auto& feats = config.schema.features;
        switch (config.variant) {
            case Variant::full:
            case Variant::no_jta: return config.schema.window_dim(config.window_days());
            case Variant::no_hfr: {
                std::size_t per_day = 0;
                for (const auto& f : feats)
                    per_day += f.kind == FeatureKind::categorical ? config.embedding_dim : 1;
                return per_day * config.window_days();
            }
            case Variant::att_seq2seq: return feats.size() * config.window_days();
            case Variant::no_both:
            case Variant::plain_seq2seq: return 0;
        }
        return 0;
    }

    // Decoder input width.
    std::size_t z_dim() const {
        if (config.variant == Variant::att_seq2seq) return config.enc_hidden + feature_dim();
        return config.enc_hidden;
    }

    // The parameter registry: fixed order, stable names.
    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (Parameter* p : encoder.parameters()) out.push_back(p);
        for (Parameter* p : decoder.parameters()) out.push_back(p);
        for (Parameter* p : head.parameters()) out.push_back(p);
        if (hfr)
            for (Parameter* p : hfr->parameters()) out.push_back(p);
        if (shared_table) out.push_back(&shared_table->table);
        if (temporal)
            for (Parameter* p : temporal->parameters()) out.push_back(p);
        if (feature_att)
            for (Parameter* p : feature_att->parameters()) out.push_back(p);
        if (w_z) out.push_back(w_z.get());
        return out;
    }

    void zero_grads() {
        for (Parameter* p : parameters()) p->zero_grad();
    }

    std::vector<Tensor> snapshot() {
        std::vector<Tensor> out;
        for (Parameter* p : parameters()) out.push_back(p->value);
        return out;
    }

    void restore(const std::vector<Tensor>& snap) {
        auto params = parameters();
        if (snap.size() != params.size())
            throw Error("snapshot size mismatch: " + std::to_string(snap.size()) + " vs " +
                        std::to_string(params.size()));
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
    }

    void init(Rng& rng) {
        encoder.init(rng);
        decoder.init(rng);
        head.init(rng);
        if (hfr) hfr->init(rng);
        if (shared_table) shared_table->init(rng);
        if (temporal) temporal->init(rng);
        if (feature_att) feature_att->init(rng);
        if (w_z) init_uniform_fan_in(*w_z, feature_dim(), rng);
    }
};

inline DeepExpressModel init_params(const ModelConfig& config, std::uint64_t seed) {
    DeepExpressModel model(config);
    Rng rng(seed, 100);
    model.init(rng);
    return model;
}

// ---- forward passes --------------------------------------------------------

struct EncodeOut {
    std::vector<Value> states;  // h hidden states, oldest first
    Value last_hidden;
    Value last_cell;
};

// Unroll the encoder over the scaled history, zero initial state.
inline EncodeOut encode(Tape& tape, DeepExpressModel& model,
                        const std::vector<double>& scaled_history) {
    if (scaled_history.size() != model.config.history_len)
        throw ShapeError("encode: history has " + std::to_string(scaled_history.size()) +
                         " values, config says h=" + std::to_string(model.config.history_len));
    LSTMBound cell = bind(tape, model.encoder);
    Value h = tape.constant(Tensor::zeros({model.config.enc_hidden}));
    Value c = tape.constant(Tensor::zeros({model.config.enc_hidden}));
    EncodeOut out;
    out.states.reserve(scaled_history.size());
    for (double y : scaled_history) {
        LSTMState next = lstm_step(tape, cell, tape.constant(Tensor::scalar(y)), h, c);
        h = next.h;
        c = next.c;
        out.states.push_back(h);
    }
    out.last_hidden = h;
    out.last_cell = c;
    return out;
}

namespace detail {

// Raw window -> scaled copy: numerical features go through the temperature
// scaler (the schema's single numerical column), categoricals stay as ids.
inline std::vector<std::vector<double>> scale_window(const FeatureSchema& schema,
                                                     const std::vector<std::vector<double>>& raw,
                                                     const Scalers& scalers) {
    std::vector<std::vector<double>> out = raw;
    for (auto& day : out) {
        if (day.size() != schema.features.size())
            throw ShapeError("feature window row has " + std::to_string(day.size()) +
                             " values, schema expects " +
                             std::to_string(schema.features.size()));
        for (std::size_t f = 0; f < day.size(); ++f)
            if (schema.features[f].kind == FeatureKind::numerical)
                day[f] = scalers.temperature.apply(day[f]);
    }
    return out;
}

// Feature vector for the no_hfr ablation: scaled scalars for numericals,
// one shared embedding table for every categorical feature.
inline Value plain_feature_vector(Tape& tape, DeepExpressModel& model,
                                  const std::vector<std::vector<double>>& scaled) {
    const auto& feats = model.config.schema.features;
    std::vector<Value> parts;
    for (std::size_t day = 0; day < scaled.size(); ++day) {
        for (std::size_t f = 0; f < feats.size(); ++f) {
            if (feats[f].kind == FeatureKind::categorical) {
                std::size_t id = categorical_id(scaled[day][f], feats[f].name, day,
                                                feats[f].cardinality);
                parts.push_back(embed_categorical(tape, *model.shared_table, id));
            } else {
                parts.push_back(tape.constant(Tensor::scalar(scaled[day][f])));
            }
        }
    }
    return tape.concat(parts);
}

// Flat scaled raw features (no learning) for the attention-only baseline;
// categorical ids are squeezed to [0,1] by their cardinality.
inline Value raw_feature_vector(Tape& tape, DeepExpressModel& model,
                                const std::vector<std::vector<double>>& scaled) {
    const auto& feats = model.config.schema.features;
    std::vector<double> flat;
    flat.reserve(scaled.size() * feats.size());
    for (std::size_t day = 0; day < scaled.size(); ++day)
        for (std::size_t f = 0; f < feats.size(); ++f) {
            double v = scaled[day][f];
            if (feats[f].kind == FeatureKind::categorical) {
                std::size_t id =
                    categorical_id(v, feats[f].name, day, feats[f].cardinality);
                std::size_t denom = feats[f].cardinality > 1 ? feats[f].cardinality - 1 : 1;
                v = static_cast<double>(id) / static_cast<double>(denom);
            }
            flat.push_back(v);
        }
    return tape.constant(Tensor::row(std::move(flat)));
}

}  // namespace detail

struct StepOut {
    Value yhat;  // scaled-domain prediction, shape [1]
    Value s_next;
    Value c_next;
};

/**
 * One decoder application: attention contexts, fuse, decoder LSTM step,
 * prediction head. The window is the raw (2l+1)-day feature block around
 * the target day; feature-free variants ignore it entirely. Dropout hits
 * the fused z and the head's hidden layer, and only in train mode.
 */
inline StepOut predict_one(Tape& tape, DeepExpressModel& model, const EncodeOut& enc,
                           Value s_prev, Value c_prev,
                           const std::vector<std::vector<double>>& window_raw,
                           const Scalers& scalers, bool train_mode = false,
                           Rng* dropout_rng = nullptr) {
    const Variant v = model.config.variant;
    const bool uses_features = v != Variant::no_both && v != Variant::plain_seq2seq;

    Value z;
    if (!uses_features) {
        z = enc.last_hidden;
    } else {
        if (window_raw.size() != model.config.window_days())
            throw ShapeError("feature window has " + std::to_string(window_raw.size()) +
                             " days, expected " + std::to_string(model.config.window_days()));
        auto scaled = detail::scale_window(model.config.schema, window_raw, scalers);

        if (v == Variant::att_seq2seq) {
            Value c_h = temporal_attention(tape, *model.temporal, s_prev, enc.states).context;
            z = tape.concat({c_h, detail::raw_feature_vector(tape, model, scaled)});
        } else {
            Value d = v == Variant::no_hfr
                          ? detail::plain_feature_vector(tape, model, scaled)
                          : represent_window(tape, *model.hfr, scaled,
                                             model.config.window_days());
            Value c_h = v == Variant::no_jta
                            ? enc.last_hidden
                            : temporal_attention(tape, *model.temporal, s_prev, enc.states)
                                  .context;
            Value c_d = v == Variant::no_jta
                            ? tape.scale(d, 1.0 / static_cast<double>(d.value().size()))
                            : feature_attention(tape, *model.feature_att, s_prev, d).context;
            z = joint_fuse(tape, *model.w_z, c_h, c_d);
        }
    }

    DropoutSpec drop{model.config.dropout_rate, train_mode};
    if (train_mode && dropout_rng != nullptr) z = dropout(tape, z, drop, *dropout_rng);

    LSTMState s = lstm_step(tape, model.decoder, z, s_prev, c_prev);
    Value yhat = mlp_forward(tape, model.head, s.h,
                             train_mode && dropout_rng != nullptr ? &drop : nullptr,
                             dropout_rng);
    return {yhat, s.h, s.c};
}

// Whole-sample forward: encode the history, run one decoder step against
// the sample's feature window.
inline Value forward_sample(Tape& tape, DeepExpressModel& model, const Sample& sample,
                            const Scalers& scalers, bool train_mode = false,
                            Rng* dropout_rng = nullptr) {
    EncodeOut enc = encode(tape, model, sample.history);
    return predict_one(tape, model, enc, enc.last_hidden, enc.last_cell, sample.feature_window,
                       scalers, train_mode, dropout_rng)
        .yhat;
}

// Supplies the raw (2l+1)-day feature window whose center is the given
// 0-based day index.
using FeatureProvider = std::function<std::vector<std::vector<double>>(std::size_t target_day)>;

inline FeatureProvider dataset_features(const SeriesDataset& data, std::size_t l) {
    return [&data, l](std::size_t target_day) {
        if (target_day < l || target_day + l >= data.size())
            throw DataError("feature window around day " + std::to_string(target_day) +
                            " runs outside the series (need days " +
                            std::to_string(static_cast<long>(target_day) - static_cast<long>(l)) +
                            ".." + std::to_string(target_day + l) + ", have 0.." +
                            std::to_string(data.size() - 1) + ")");
        return feature_window_rows(data, target_day - l, target_day + l);
    };
}

/**
 * k-step autoregressive rollout: each step encodes the current h-day
 * history, predicts one day, appends the scaled prediction to the history
 * and slides the window forward. Outputs are inverse-scaled to counts.
 * history_raw holds the last h observed y values (unscaled); anchor_day is
 * the 0-based index of the last of them.
 */
inline std::vector<double> predict_sequence(DeepExpressModel& model, const Scalers& scalers,
                                            const std::vector<double>& history_raw,
                                            std::size_t anchor_day,
                                            const FeatureProvider& features, std::size_t k) {
    if (history_raw.size() != model.config.history_len)
        throw ShapeError("predict_sequence: history has " + std::to_string(history_raw.size()) +
                         " values, config says h=" + std::to_string(model.config.history_len));
    const Variant v = model.config.variant;
    const bool uses_features = v != Variant::no_both && v != Variant::plain_seq2seq;

    std::vector<double> hist;
    hist.reserve(history_raw.size());
    for (double y : history_raw) hist.push_back(scalers.y.apply(y));

    std::vector<double> out;
    out.reserve(k);
    for (std::size_t j = 1; j <= k; ++j) {
        Tape tape;
        EncodeOut enc = encode(tape, model, hist);
        std::vector<std::vector<double>> window;
        if (uses_features) window = features(anchor_day + j);
        StepOut step = predict_one(tape, model, enc, enc.last_hidden, enc.last_cell, window,
                                   scalers, false, nullptr);
        double yhat_scaled = step.yhat.value()[0];
        out.push_back(scalers.y.invert(yhat_scaled));
        hist.erase(hist.begin());
        hist.push_back(yhat_scaled);
    }
    return out;
}

}  // namespace dx
