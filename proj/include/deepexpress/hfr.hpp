#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "layers.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

enum class FeatureKind { numerical, categorical };

/**
 * One exogenous feature column. Categorical features carry a vocabulary
 * size; numerical ones may be weekend-gated, meaning their embedding
 * switches between a quadratic weekend branch and a workday MLP based on
 * the day-of-week feature named by week_index.
 */
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numerical;
    std::size_t cardinality = 0;    // categorical only
    std::size_t embedding_dim = 1;  // width this feature contributes per day
    bool weekend_gated = false;     // numerical only
    int week_index = -1;            // schema position of the gating week feature
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;

    std::size_t per_day_dim() const {
        std::size_t n = 0;
        for (const auto& f : features) n += f.embedding_dim;
        return n;
    }

    std::size_t window_dim(std::size_t days) const { return per_day_dim() * days; }

    void validate() const {
        if (features.empty()) throw ValueError("feature schema: no features");
        for (std::size_t i = 0; i < features.size(); ++i) {
            const FeatureSpec& f = features[i];
            if (f.name.empty()) throw ValueError("feature schema: unnamed feature");
            if (f.embedding_dim == 0)
                throw ValueError("feature '" + f.name + "': embedding_dim must be positive");
            if (f.kind == FeatureKind::categorical && f.cardinality == 0)
                throw ValueError("feature '" + f.name + "': categorical needs a cardinality");
            if (f.weekend_gated) {
                if (f.kind != FeatureKind::numerical)
                    throw ValueError("feature '" + f.name + "': only numericals can be gated");
                if (f.week_index < 0 ||
                    static_cast<std::size_t>(f.week_index) >= features.size())
                    throw ValueError("feature '" + f.name + "': week_index out of range");
                const FeatureSpec& wk = features[static_cast<std::size_t>(f.week_index)];
                if (wk.kind != FeatureKind::categorical || wk.cardinality != 7)
                    throw ValueError("feature '" + f.name +
                                     "': gate must reference a 7-way day-of-week feature");
            }
        }
    }

    // The delivery dataset: temperature gated by day of week, then weather,
    // holiday and week vocabularies.
    static FeatureSchema express_default(std::size_t embed_dim) {
        FeatureSchema s;
        s.features = {
            {"temperature", FeatureKind::numerical, 0, embed_dim, true, 3},
            {"weather", FeatureKind::categorical, 15, embed_dim, false, -1},
            {"holiday", FeatureKind::categorical, 5, embed_dim, false, -1},
            {"week", FeatureKind::categorical, 7, embed_dim, false, -1},
        };
        s.validate();
        return s;
    }
};

// Day-of-week ids follow ISO order starting at Monday = 0.
inline bool is_weekend_day(std::size_t week_id) { return week_id == 5 || week_id == 6; }

// ---- embeddings ----------------------------------------------------------

/** Lookup table; embedding a category id is one-hot times table. */
struct CategoricalEmbedding {
    std::size_t cardinality = 0, dim = 0;
    Parameter table;  // [cardinality x dim]

    CategoricalEmbedding() = default;
    CategoricalEmbedding(const std::string& name, std::size_t card, std::size_t d)
        : cardinality(card), dim(d), table(name + ".table", Tensor({card, d})) {
        if (card == 0 || d == 0) throw ValueError("embedding " + name + ": zero dims");
    }

    void init(Rng& rng) { init_uniform_fan_in(table, cardinality, rng); }
};

inline Value embed_categorical(Tape& tape, CategoricalEmbedding& emb, std::size_t id) {
    if (id >= emb.cardinality)
        throw ValueError("category id " + std::to_string(id) + " out of range for " +
                         emb.table.name + " (cardinality " + std::to_string(emb.cardinality) +
                         ")");
    return tape.select_row(tape.param(emb.table), id);
}

/**
 * Scalar-to-vector embedding with two branches. The weekend branch is a
 * componentwise product of two affine maps, (w x + b) * (v x + c), which
 * realizes an arbitrary quadratic in x per output component; workdays go
 * through a small MLP instead. Ungated features always use the MLP.
 */
struct NumericEmbedding {
    std::size_t dim = 0;
    bool gated = false;
    Parameter wq_w, wq_b, wq_v, wq_c;
    MLPParams workday;

    NumericEmbedding() = default;
    NumericEmbedding(const std::string& name, std::size_t d, bool gate,
                     std::size_t mlp_hidden = 8)
        : dim(d),
          gated(gate),
          workday(name + ".workday", 1, mlp_hidden, d, Activation::relu,
                  Activation::identity) {
        if (d == 0) throw ValueError("embedding " + name + ": zero dim");
        if (gate) {
            wq_w = Parameter(name + ".weekend.w", Tensor({d, 1}));
            wq_b = Parameter(name + ".weekend.b", Tensor({d}));
            wq_v = Parameter(name + ".weekend.v", Tensor({d, 1}));
            wq_c = Parameter(name + ".weekend.c", Tensor({d}));
        }
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        if (gated) out = {&wq_w, &wq_b, &wq_v, &wq_c};
        for (Parameter* p : workday.parameters()) out.push_back(p);
        return out;
    }

    void init(Rng& rng) {
        if (gated)
            for (Parameter* p : {&wq_w, &wq_b, &wq_v, &wq_c}) init_uniform_fan_in(*p, 1, rng);
        workday.init(rng);
    }
};

// x must be a scaled scalar node of shape [1].
inline Value embed_numerical(Tape& tape, NumericEmbedding& emb, Value x, bool weekend) {
    if (x.value().size() != 1)
        throw ShapeError("embed_numerical: expected a scalar, got " +
                         shape_string(x.value().shape()));
    if (weekend && emb.gated) {
        Value left = tape.add(tape.matmul(tape.param(emb.wq_w), x), tape.param(emb.wq_b));
        Value right = tape.add(tape.matmul(tape.param(emb.wq_v), x), tape.param(emb.wq_c));
        return tape.mul(left, right);
    }
    return mlp_forward(tape, emb.workday, x);
}

// ---- whole-window representation -----------------------------------------

/** Embedding bank for one schema; owns one embedding per feature. */
struct HFR {
    FeatureSchema schema;
    std::vector<std::unique_ptr<CategoricalEmbedding>> cats;
    std::vector<std::unique_ptr<NumericEmbedding>> nums;

    HFR() = default;

    explicit HFR(FeatureSchema s, std::size_t workday_hidden = 8) : schema(std::move(s)) {
        schema.validate();
        cats.resize(schema.features.size());
        nums.resize(schema.features.size());
        for (std::size_t i = 0; i < schema.features.size(); ++i) {
            const FeatureSpec& f = schema.features[i];
            if (f.kind == FeatureKind::categorical)
                cats[i] = std::make_unique<CategoricalEmbedding>("hfr." + f.name, f.cardinality,
                                                                 f.embedding_dim);
            else
                nums[i] = std::make_unique<NumericEmbedding>("hfr." + f.name, f.embedding_dim,
                                                             f.weekend_gated, workday_hidden);
        }
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (std::size_t i = 0; i < schema.features.size(); ++i) {
            if (cats[i]) out.push_back(&cats[i]->table);
            if (nums[i])
                for (Parameter* p : nums[i]->parameters()) out.push_back(p);
        }
        return out;
    }

    void init(Rng& rng) {
        for (std::size_t i = 0; i < schema.features.size(); ++i) {
            if (cats[i]) cats[i]->init(rng);
            if (nums[i]) nums[i]->init(rng);
        }
    }
};

// Validated categorical id from a raw double.
inline std::size_t categorical_id(double v, const std::string& feature, std::size_t day,
                                  std::size_t cardinality) {
    if (!std::isfinite(v))
        throw ValueError("missing value for feature '" + feature + "' on window day " +
                         std::to_string(day));
    if (v != std::floor(v) || v < 0.0)
        throw ValueError("feature '" + feature + "' on window day " + std::to_string(day) +
                         " is not a category id: " + std::to_string(v));
    auto id = static_cast<std::size_t>(v);
    if (id >= cardinality)
        throw ValueError("feature '" + feature + "' on window day " + std::to_string(day) +
                         ": id " + std::to_string(id) + " out of range (cardinality " +
                         std::to_string(cardinality) + ")");
    return id;
}

/**
 * Embed a (2l+1)-day window into one flat vector, day-major and
 * feature-minor: day 0's features first, each feature contributing its
 * embedding_dim slots in schema order. Numerical inputs must already be
 * scaled; categorical inputs are exact ids.
 */
inline Value represent_window(Tape& tape, HFR& hfr,
                              const std::vector<std::vector<double>>& window,
                              std::size_t expected_days) {
    if (window.size() != expected_days)
        throw ShapeError("feature window has " + std::to_string(window.size()) +
                         " days, expected " + std::to_string(expected_days));
    const auto& feats = hfr.schema.features;
    std::vector<Value> parts;
    parts.reserve(window.size() * feats.size());
    for (std::size_t day = 0; day < window.size(); ++day) {
        const auto& row = window[day];
        if (row.size() != feats.size())
            throw ShapeError("window day " + std::to_string(day) + " has " +
                             std::to_string(row.size()) + " features, schema expects " +
                             std::to_string(feats.size()));
        for (std::size_t f = 0; f < feats.size(); ++f) {
            const FeatureSpec& spec = feats[f];
            if (spec.kind == FeatureKind::categorical) {
                std::size_t id = categorical_id(row[f], spec.name, day, spec.cardinality);
                parts.push_back(embed_categorical(tape, *hfr.cats[f], id));
            } else {
                if (!std::isfinite(row[f]))
                    throw ValueError("missing value for feature '" + spec.name +
                                     "' on window day " + std::to_string(day));
                bool weekend = false;
                if (spec.weekend_gated) {
                    std::size_t wf = static_cast<std::size_t>(spec.week_index);
                    std::size_t week_id =
                        categorical_id(row[wf], feats[wf].name, day, feats[wf].cardinality);
                    weekend = is_weekend_day(week_id);
                }
                Value x = tape.constant(Tensor::scalar(row[f]));
                parts.push_back(embed_numerical(tape, *hfr.nums[f], x, weekend));
            }
        }
    }
    return tape.concat(parts);
}

}  // namespace dx
