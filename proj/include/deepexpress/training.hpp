#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

// Mean batch loss as a tape node. Squared: (1/B)·Σ(ŷ−y)²; absolute:
// (1/B)·Σ|ŷ−y| with subgradient 0 at the kink.
inline Value loss_node(Tape& tape, Value yhat, Value y, LossKind kind) {
    if (yhat.value().size() == 0) throw ShapeError("loss: empty batch");
    Value diff = tape.sub(yhat, y);
    Value per = kind == LossKind::squared ? tape.mul(diff, diff) : tape.abs(diff);
    return tape.scale(tape.sum(per), 1.0 / static_cast<double>(yhat.value().size()));
}

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    LossKind loss = LossKind::squared;
    std::uint64_t seed = 1;
    std::size_t patience = 0;  // stop after this many epochs without val improvement; 0 = off

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw ConfigError("train: bad learning rate");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw ConfigError("train: Adam betas must lie in [0, 1)");
        if (!(eps > 0.0)) throw ConfigError("train: Adam eps must be positive");
    }
};

// First/second moment estimates, one slot per registered parameter.
struct AdamState {
    std::vector<Tensor> m, v;
    std::size_t step = 0;

    AdamState() = default;
    explicit AdamState(const std::vector<Parameter*>& params) {
        for (const Parameter* p : params) {
            m.push_back(Tensor::zeros(p->value.shape()));
            v.push_back(Tensor::zeros(p->value.shape()));
        }
    }
};

// Standard bias-corrected Adam, updating in place. Each parameter's
// update depends only on its own state, so registry order never matters.
inline void adam_step(AdamState& state, const std::vector<Parameter*>& params,
                      const TrainConfig& cfg) {
    if (params.size() != state.m.size())
        throw Error("adam: state tracks " + std::to_string(state.m.size()) +
                    " parameters, got " + std::to_string(params.size()));
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (!p.grad.same_shape(p.value))
            throw Error("adam: gradient shape mismatch for " + p.name);
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            double g = p.grad[j];
            state.m[i][j] = cfg.beta1 * state.m[i][j] + (1.0 - cfg.beta1) * g;
            state.v[i][j] = cfg.beta2 * state.v[i][j] + (1.0 - cfg.beta2) * g * g;
            double mhat = state.m[i][j] / bc1;
            double vhat = state.v[i][j] / bc2;
            p.value[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        if (!p.value.all_finite()) throw ValueError("adam: non-finite value in " + p.name);
    }
}

struct TrainResult {
    std::vector<double> train_loss;  // one entry per epoch actually run
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;  // 0-based index into the histories
    double best_val = std::numeric_limits<double>::infinity();
};

namespace detail {

// Mean eval-mode loss over a sample set; no tape survives this.
inline double eval_loss(DeepExpressModel& model, const std::vector<Sample>& samples,
                        const Scalers& scalers, LossKind kind) {
    double acc = 0.0;
    for (const Sample& s : samples) {
        Tape tape;
        double e = forward_sample(tape, model, s, scalers).value()[0] - s.target;
        acc += kind == LossKind::squared ? e * e : std::fabs(e);
    }
    return acc / static_cast<double>(samples.size());
}

}  // namespace detail

/**
 * Minibatch training: per epoch, shuffle the training samples with the
 * seeded order stream, run forward (dropout on) / loss / backward / Adam
 * per batch, then score the validation set in eval mode. The parameters
 * with the best validation loss are restored into the model before
 * returning. Deterministic for a fixed seed.
 */
inline TrainResult train(DeepExpressModel& model, const std::vector<Sample>& train_samples,
                         const std::vector<Sample>& val_samples, const Scalers& scalers,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (train_samples.empty()) throw DataError("train: no training samples");
    if (val_samples.empty()) throw DataError("train: no validation samples");

    auto params = model.parameters();
    AdamState adam(params);
    Rng order_rng(cfg.seed, 17);
    Rng drop_rng(cfg.seed, 23);

    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::vector<Tensor> best_params = model.snapshot();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0, batch_no = 1; start < order.size();
             start += cfg.batch_size, ++batch_no) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            try {
                Tape tape;
                std::vector<Value> preds;
                Tensor targets({stop - start});
                for (std::size_t i = start; i < stop; ++i) {
                    const Sample& s = train_samples[order[i]];
                    preds.push_back(forward_sample(tape, model, s, scalers, true, &drop_rng));
                    targets[i - start] = s.target;
                }
                Value loss = loss_node(tape, tape.concat(preds), tape.constant(targets),
                                       cfg.loss);
                epoch_loss += loss.value()[0] * static_cast<double>(stop - start);
                tape.backward(loss);
                adam_step(adam, params, cfg);
                model.zero_grads();
            } catch (const Error& e) {
                throw Error("training aborted at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(batch_no) + ": " + e.what());
            }
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
        double val = detail::eval_loss(model, val_samples, scalers, cfg.loss);
        result.val_loss.push_back(val);
        if (val < result.best_val) {
            result.best_val = val;
            result.best_epoch = epoch;
            best_params = model.snapshot();
        }
        if (cfg.patience > 0 && epoch - result.best_epoch >= cfg.patience) break;
    }
    model.restore(best_params);
    return result;
}

// ---- checkpoints ------------------------------------------------------------

inline constexpr const char* kCheckpointHeader = "deepexpress checkpoint v1";

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double_strict(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("checkpoint: bad number '" + s + "' for " + what);
    }
}

}  // namespace detail

/**
 * Versioned text format: a header line, the full configuration (schema
 * included), then every registered parameter by name with its shape and
 * values at 17 significant digits — enough for doubles to round-trip
 * bitwise.
 */
inline void checkpoint_save(DeepExpressModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("checkpoint: cannot write '" + path + "'");
    const ModelConfig& c = model.config;
    out << kCheckpointHeader << "\n";
    out << "variant " << variant_name(c.variant) << "\n";
    out << "loss " << loss_name(c.loss) << "\n";
    out << "history_len " << c.history_len << "\n";
    out << "half_window " << c.half_window << "\n";
    out << "horizon " << c.horizon << "\n";
    out << "enc_hidden " << c.enc_hidden << "\n";
    out << "dec_hidden " << c.dec_hidden << "\n";
    out << "score_dim " << c.score_dim << "\n";
    out << "head_hidden " << c.head_hidden << "\n";
    out << "embedding_dim " << c.embedding_dim << "\n";
    out << "workday_hidden " << c.workday_hidden << "\n";
    out << "dropout_rate " << detail::format_double(c.dropout_rate) << "\n";
    out << "output_activation " << activation_name(c.output_activation) << "\n";
    out << "features " << c.schema.features.size() << "\n";
    for (const FeatureSpec& f : c.schema.features)
        out << "feature " << f.name << " "
            << (f.kind == FeatureKind::categorical ? "categorical" : "numerical") << " "
            << f.cardinality << " " << f.embedding_dim << " "
            << (f.weekend_gated ? "gated" : "plain") << " " << f.week_index << "\n";

    auto params = model.parameters();
    out << "params " << params.size() << "\n";
    for (const Parameter* p : params) {
        out << "param " << p->name << " " << p->value.rank();
        for (std::size_t d : p->value.shape()) out << " " << d;
        out << "\n";
        for (std::size_t i = 0; i < p->value.size(); ++i)
            out << (i ? " " : "") << detail::format_double(p->value[i]);
        out << "\n";
    }
    out << "end\n";
    if (!out) throw Error("checkpoint: write to '" + path + "' failed");
}

/**
 * Rebuilds the model from a checkpoint. When `expected` is given, the
 * stored configuration must match it exactly — loading a model into a
 * pipeline built for different shapes is an error, not a surprise.
 */
inline DeepExpressModel checkpoint_load(const std::string& path,
                                        const ModelConfig* expected = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error("checkpoint: cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCheckpointHeader)
        throw Error("checkpoint: '" + path + "' is not a supported checkpoint (header '" +
                    line + "')");

    ModelConfig cfg;
    cfg.schema.features.clear();
    std::size_t n_params = 0;
    bool saw_params = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        auto rest = [&]() {
            std::string w;
            if (!(ls >> w)) throw Error("checkpoint: missing value for '" + key + "'");
            return w;
        };
        if (key == "variant") cfg.variant = variant_from_name(rest());
        else if (key == "loss") cfg.loss = loss_from_name(rest());
        else if (key == "history_len") cfg.history_len = std::stoul(rest());
        else if (key == "half_window") cfg.half_window = std::stoul(rest());
        else if (key == "horizon") cfg.horizon = std::stoul(rest());
        else if (key == "enc_hidden") cfg.enc_hidden = std::stoul(rest());
        else if (key == "dec_hidden") cfg.dec_hidden = std::stoul(rest());
        else if (key == "score_dim") cfg.score_dim = std::stoul(rest());
        else if (key == "head_hidden") cfg.head_hidden = std::stoul(rest());
        else if (key == "embedding_dim") cfg.embedding_dim = std::stoul(rest());
        else if (key == "workday_hidden") cfg.workday_hidden = std::stoul(rest());
        else if (key == "dropout_rate")
            cfg.dropout_rate = detail::parse_double_strict(rest(), "dropout_rate");
        else if (key == "output_activation") cfg.output_activation = activation_from_name(rest());
        else if (key == "features") continue;  // count is implied by the feature lines
        else if (key == "feature") {
            FeatureSpec f;
            std::string kind, gated;
            if (!(ls >> f.name >> kind >> f.cardinality >> f.embedding_dim >> gated >>
                  f.week_index))
                throw Error("checkpoint: malformed feature line '" + line + "'");
            f.kind = kind == "categorical" ? FeatureKind::categorical : FeatureKind::numerical;
            f.weekend_gated = gated == "gated";
            cfg.schema.features.push_back(f);
        } else if (key == "params") {
            n_params = std::stoul(rest());
            saw_params = true;
            break;
        } else if (key.empty()) continue;
        else throw Error("checkpoint: unknown field '" + key + "'");
    }
    if (!saw_params) throw Error("checkpoint: '" + path + "' is truncated (no params section)");

    if (expected != nullptr) {
        ModelConfig want = *expected;
        want.resolve();
        auto need = [&](bool ok, const std::string& field, const std::string& got,
                        const std::string& exp) {
            if (!ok)
                throw Error("checkpoint: config mismatch on " + field + ": file has " + got +
                            ", expected " + exp);
        };
        need(cfg.variant == want.variant, "variant", variant_name(cfg.variant),
             variant_name(want.variant));
        need(cfg.history_len == want.history_len, "history_len",
             std::to_string(cfg.history_len), std::to_string(want.history_len));
        need(cfg.half_window == want.half_window, "half_window",
             std::to_string(cfg.half_window), std::to_string(want.half_window));
        need(cfg.horizon == want.horizon, "horizon", std::to_string(cfg.horizon),
             std::to_string(want.horizon));
        need(cfg.enc_hidden == want.enc_hidden, "enc_hidden", std::to_string(cfg.enc_hidden),
             std::to_string(want.enc_hidden));
        need(cfg.embedding_dim == want.embedding_dim, "embedding_dim",
             std::to_string(cfg.embedding_dim), std::to_string(want.embedding_dim));
    }

    DeepExpressModel model(cfg);
    auto params = model.parameters();
    if (n_params != params.size())
        throw Error("checkpoint: file has " + std::to_string(n_params) +
                    " parameters, model needs " + std::to_string(params.size()));
    std::map<std::string, Parameter*> registry;
    for (Parameter* p : params) registry[p->name] = p;
    std::map<std::string, bool> filled;

    for (std::size_t n = 0; n < n_params; ++n) {
        if (!std::getline(in, line)) throw Error("checkpoint: truncated parameter section");
        std::istringstream hs(line);
        std::string tag, name;
        std::size_t rank = 0;
        if (!(hs >> tag >> name >> rank) || tag != "param")
            throw Error("checkpoint: expected a param header, got '" + line + "'");
        Shape shape(rank);
        for (std::size_t d = 0; d < rank; ++d)
            if (!(hs >> shape[d])) throw Error("checkpoint: bad shape for '" + name + "'");
        auto it = registry.find(name);
        if (it == registry.end())
            throw Error("checkpoint: unknown parameter '" + name + "' for this config");
        Parameter& p = *it->second;
        if (shape != p.value.shape())
            throw Error("checkpoint: shape mismatch for '" + name + "': file " +
                        shape_string(shape) + ", model " + shape_string(p.value.shape()));
        if (!std::getline(in, line))
            throw Error("checkpoint: missing values for '" + name + "'");
        std::istringstream vs(line);
        std::string tok;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            if (!(vs >> tok))
                throw Error("checkpoint: too few values for '" + name + "' (got " +
                            std::to_string(i) + " of " + std::to_string(p.value.size()) + ")");
            p.value[i] = detail::parse_double_strict(tok, name);
        }
        if (vs >> tok) throw Error("checkpoint: too many values for '" + name + "'");
        filled[name] = true;
    }
    for (const auto& [name, p] : registry)
        if (!filled.count(name)) throw Error("checkpoint: missing parameter '" + name + "'");
    return model;
}

// ---- grid search ------------------------------------------------------------

struct GridSpec {
    std::vector<std::size_t> history_len;
    std::vector<std::size_t> half_window;
    std::vector<std::size_t> horizon;
    std::vector<std::size_t> hidden;
    std::vector<std::size_t> batch_size;
    std::vector<std::size_t> epochs;

    void validate() const {
        auto chk = [](const std::vector<std::size_t>& v, const char* what) {
            if (v.empty()) throw ConfigError(std::string("grid: empty candidate list for ") + what);
        };
        chk(history_len, "history_len");
        chk(half_window, "half_window");
        chk(horizon, "horizon");
        chk(hidden, "hidden");
        chk(batch_size, "batch_size");
        chk(epochs, "epochs");
    }
};

struct GridRow {
    std::size_t history_len = 0, half_window = 0, horizon = 0, hidden = 0, batch_size = 0,
                epochs = 0;
    double val_rmse = std::numeric_limits<double>::infinity();  // scaled domain
    double val_mae = std::numeric_limits<double>::infinity();
    bool skipped = false;
    std::string reason;
};

/**
 * Exhaustive sweep over the Cartesian product. Each cell re-windows the
 * series for its (h, l), trains from the same seed, and is scored by
 * scaled-domain validation RMSE over k-step rollouts. Cells the data
 * cannot support are kept in the table with the reason, after the ranked
 * rows.
 */
inline std::vector<GridRow> grid_search(const SeriesDataset& data, const GridSpec& grid,
                                        const ModelConfig& base_model,
                                        const TrainConfig& base_train) {
    grid.validate();
    std::vector<GridRow> rows;
    for (std::size_t h : grid.history_len)
        for (std::size_t l : grid.half_window)
            for (std::size_t k : grid.horizon)
                for (std::size_t units : grid.hidden)
                    for (std::size_t batch : grid.batch_size)
                        for (std::size_t ep : grid.epochs) {
                            GridRow row;
                            row.history_len = h;
                            row.half_window = l;
                            row.horizon = k;
                            row.hidden = units;
                            row.batch_size = batch;
                            row.epochs = ep;
                            try {
                                Experiment exp = prepare_experiment(data, h, l);
                                ModelConfig mc = base_model;
                                mc.history_len = h;
                                mc.half_window = l;
                                mc.horizon = k;
                                mc.enc_hidden = mc.dec_hidden = units;
                                mc.score_dim = 0;  // re-derive from the new width
                                mc.head_hidden = 0;
                                DeepExpressModel model = init_params(mc, base_train.seed);
                                TrainConfig tc = base_train;
                                tc.batch_size = batch;
                                tc.epochs = ep;
                                train(model, exp.split.train, exp.split.val, exp.scalers, tc);
                                EvalReport rep = evaluate_rollouts(model, data, exp.split.val,
                                                                   exp.scalers, k);
                                row.val_rmse = rep.aggregate_scaled.rmse;
                                row.val_mae = rep.aggregate_scaled.mae;
                            } catch (const Error& e) {
                                row.skipped = true;
                                row.reason = e.what();
                            }
                            rows.push_back(row);
                        }
    std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
        if (a.skipped != b.skipped) return !a.skipped;
        return a.val_rmse < b.val_rmse;
    });
    return rows;
}

}  // namespace dx
