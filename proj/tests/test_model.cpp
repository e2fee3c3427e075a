#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <deepexpress/model.hpp>
#include <deepexpress/synthetic.hpp>

#include "test_support.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

const std::vector<dx::Variant> kAllVariants = {
    dx::Variant::full,          dx::Variant::no_hfr,      dx::Variant::no_jta,
    dx::Variant::no_both,       dx::Variant::plain_seq2seq, dx::Variant::att_seq2seq,
};

dx::ModelConfig micro_config(dx::Variant v) {
    dx::ModelConfig cfg;
    cfg.history_len = 5;
    cfg.half_window = 1;
    cfg.horizon = 2;
    cfg.enc_hidden = 8;
    cfg.dec_hidden = 8;
    cfg.embedding_dim = 2;
    cfg.workday_hidden = 4;
    cfg.variant = v;
    return cfg;
}

dx::Scalers test_scalers() {
    std::vector<double> ys{100.0, 300.0};
    std::vector<double> ts{-5.0, 35.0};
    dx::Scalers s;
    s.y = dx::ScalerState::fit(ys);
    s.temperature = dx::ScalerState::fit(ts);
    return s;
}

// Friday, Saturday, Sunday: both the workday and the weekend temperature
// branches get exercised.
std::vector<std::vector<double>> window3() {
    return {{12.0, 1, 0, 4}, {18.5, 3, 1, 5}, {25.0, 0, 2, 6}};
}

dx::Sample micro_sample() {
    dx::Sample s;
    s.history = {0.10, 0.35, 0.20, 0.55, 0.40};
    s.feature_window = window3();
    s.target = 0.45;
    return s;
}

}  // namespace

TEST_CASE("model config validation and resolution") {
    SECTION("decoder width must match encoder width") {
        dx::ModelConfig cfg = micro_config(dx::Variant::full);
        cfg.dec_hidden = 16;
        CHECK_THROWS_AS(dx::DeepExpressModel(cfg), dx::ConfigError);
        CHECK_THROWS_WITH(dx::DeepExpressModel(cfg), ContainsSubstring("decoder hidden"));
    }
    SECTION("basic bounds") {
        auto bad = [](auto&& tweak) {
            dx::ModelConfig cfg = micro_config(dx::Variant::full);
            tweak(cfg);
            CHECK_THROWS_AS(dx::DeepExpressModel(cfg), dx::ConfigError);
        };
        bad([](dx::ModelConfig& c) { c.history_len = 0; });
        bad([](dx::ModelConfig& c) { c.horizon = 0; });
        bad([](dx::ModelConfig& c) { c.dropout_rate = 1.0; });
        bad([](dx::ModelConfig& c) { c.dropout_rate = -0.1; });
        bad([](dx::ModelConfig& c) { c.enc_hidden = c.dec_hidden = 0; });
        bad([](dx::ModelConfig& c) { c.embedding_dim = 0; });
    }
    SECTION("zero sizes resolve to defaults") {
        dx::DeepExpressModel model(micro_config(dx::Variant::full));
        CHECK(model.config.score_dim == 8);
        CHECK(model.config.head_hidden == 8);
        CHECK(model.config.schema.features.size() == 4);
        CHECK(model.config.window_days() == 3);
    }
    SECTION("variant and loss names round-trip") {
        for (dx::Variant v : kAllVariants)
            CHECK(dx::variant_from_name(dx::variant_name(v)) == v);
        CHECK_THROWS_AS(dx::variant_from_name("bogus"), dx::ConfigError);
        CHECK(dx::loss_from_name("squared") == dx::LossKind::squared);
        CHECK(dx::loss_from_name("absolute") == dx::LossKind::absolute);
        CHECK_THROWS_AS(dx::loss_from_name("huber"), dx::ConfigError);
    }
}

TEST_CASE("per-variant structure: feature width, decoder width, registry") {
    auto dims = [](dx::Variant v) {
        dx::DeepExpressModel m(micro_config(v));
        return std::pair<std::size_t, std::size_t>{m.feature_dim(), m.z_dim()};
    };
    // Schema: temperature + 3 categoricals, embedding width 2, 3-day window.
    CHECK(dims(dx::Variant::full) == std::pair<std::size_t, std::size_t>{24, 8});
    CHECK(dims(dx::Variant::no_jta) == std::pair<std::size_t, std::size_t>{24, 8});
    CHECK(dims(dx::Variant::no_hfr) == std::pair<std::size_t, std::size_t>{21, 8});
    CHECK(dims(dx::Variant::att_seq2seq) == std::pair<std::size_t, std::size_t>{12, 20});
    CHECK(dims(dx::Variant::no_both) == std::pair<std::size_t, std::size_t>{0, 8});
    CHECK(dims(dx::Variant::plain_seq2seq) == std::pair<std::size_t, std::size_t>{0, 8});

    for (dx::Variant v : kAllVariants) {
        dx::DeepExpressModel m(micro_config(v));
        auto params = m.parameters();
        std::set<std::string> names;
        for (dx::Parameter* p : params) names.insert(p->name);
        INFO(dx::variant_name(v));
        CHECK(names.size() == params.size());  // no duplicate names
        if (m.w_z) CHECK(m.w_z->value.shape() == dx::Shape{8, m.feature_dim()});
        CHECK(m.decoder.w_in.value.shape() == dx::Shape{8, m.z_dim()});
    }

    // Bare LSTM + head: 12 encoder + 12 decoder + 4 head tensors.
    dx::DeepExpressModel plain(micro_config(dx::Variant::plain_seq2seq));
    CHECK(plain.parameters().size() == 28);
    // Full adds HFR (8 temperature + 3 tables), two attentions, fuse.
    dx::DeepExpressModel full(micro_config(dx::Variant::full));
    CHECK(full.parameters().size() == 48);
}

TEST_CASE("all-zero parameters with identity head give exactly zero") {
    dx::Scalers scalers = test_scalers();
    dx::Sample sample = micro_sample();
    for (dx::Variant v : kAllVariants) {
        INFO(dx::variant_name(v));
        dx::DeepExpressModel model(micro_config(v));  // never initialized
        dx::Tape tape;
        dx::Value yhat = forward_sample(tape, model, sample, scalers);
        REQUIRE(yhat.value().shape() == dx::Shape{1});
        CHECK(yhat.value()[0] == 0.0);
    }
}

TEST_CASE("encode unrolls the encoder cell") {
    dx::ModelConfig cfg = micro_config(dx::Variant::plain_seq2seq);
    cfg.history_len = 3;

    SECTION("zero parameters leave every state at zero") {
        dx::DeepExpressModel model(cfg);
        dx::Tape tape;
        dx::EncodeOut enc = encode(tape, model, {0.3, -0.2, 0.9});
        REQUIRE(enc.states.size() == 3);
        for (const dx::Value& s : enc.states)
            for (std::size_t i = 0; i < s.value().size(); ++i) CHECK(s.value()[i] == 0.0);
        for (std::size_t i = 0; i < enc.last_cell.value().size(); ++i)
            CHECK(enc.last_cell.value()[i] == 0.0);
    }

    SECTION("matches three chained lstm_step calls") {
        dx::DeepExpressModel model = dx::init_params(cfg, 5);
        std::vector<double> hist{0.2, -0.1, 0.6};

        dx::Tape tape;
        dx::EncodeOut enc = encode(tape, model, hist);

        dx::Value h = tape.constant(dx::Tensor::zeros({8}));
        dx::Value c = tape.constant(dx::Tensor::zeros({8}));
        for (std::size_t i = 0; i < hist.size(); ++i) {
            dx::LSTMState next = lstm_step(tape, model.encoder,
                                           tape.constant(dx::Tensor::scalar(hist[i])), h, c);
            h = next.h;
            c = next.c;
            CHECK(tsup::max_abs_diff(enc.states[i].value(), h.value()) <= 1e-12);
        }
        CHECK(tsup::max_abs_diff(enc.last_cell.value(), c.value()) <= 1e-12);
    }

    SECTION("wrong history length is rejected") {
        dx::DeepExpressModel model(cfg);
        dx::Tape tape;
        CHECK_THROWS_AS(encode(tape, model, {0.1, 0.2}), dx::ShapeError);
    }
}

TEST_CASE("registry covers every parameter the forward pass binds") {
    dx::Scalers scalers = test_scalers();
    dx::Sample sample = micro_sample();
    for (dx::Variant v : kAllVariants) {
        INFO(dx::variant_name(v));
        dx::DeepExpressModel model = dx::init_params(micro_config(v), 9);
        std::set<const dx::Parameter*> registry;
        for (dx::Parameter* p : model.parameters()) registry.insert(p);

        dx::Tape tape;
        dx::Rng drop_rng(3);
        dx::Value yhat = forward_sample(tape, model, sample, scalers, true, &drop_rng);
        dx::Value diff = tape.sub(yhat, tape.constant(dx::Tensor::scalar(sample.target)));
        dx::Value loss = tape.sum(tape.mul(diff, diff));
        tape.backward(loss);

        for (const dx::Parameter* bound : tape.bound_parameters()) {
            INFO("bound parameter: " << bound->name);
            CHECK(registry.count(bound) == 1);
        }
    }
}

TEST_CASE("seeded init is reproducible and seed-sensitive") {
    for (dx::Variant v : {dx::Variant::full, dx::Variant::att_seq2seq}) {
        INFO(dx::variant_name(v));
        dx::DeepExpressModel a = dx::init_params(micro_config(v), 7);
        dx::DeepExpressModel b = dx::init_params(micro_config(v), 7);
        dx::DeepExpressModel c = dx::init_params(micro_config(v), 8);

        auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
        REQUIRE(pa.size() == pb.size());
        bool any_diff = false;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            CHECK(tsup::bitwise_equal(pa[i]->value, pb[i]->value));
            if (!tsup::bitwise_equal(pa[i]->value, pc[i]->value)) any_diff = true;
        }
        CHECK(any_diff);
    }
}

TEST_CASE("end-to-end gradients agree with finite differences at micro scale") {
    dx::Scalers scalers = test_scalers();
    dx::Sample sample = micro_sample();
    std::uint64_t seed = 11;
    for (dx::Variant v : kAllVariants) {
        INFO(dx::variant_name(v));
        dx::DeepExpressModel model = dx::init_params(micro_config(v), seed++);
        auto build_loss = [&](dx::Tape& tape) {
            dx::Value yhat = forward_sample(tape, model, sample, scalers);
            dx::Value diff = tape.sub(yhat, tape.constant(dx::Tensor::scalar(sample.target)));
            return tape.sum(tape.mul(diff, diff));
        };
        // 1e-6 floor: the difference quotient at full-model depth carries
        // ~1e-11 of evaluation noise, which the op-level 1e-8 floor would
        // misread as error on structurally-zero gradients.
        dx::GradCheckReport rep =
            dx::finite_diff_params(model.parameters(), build_loss, 1e-5, 1e-6);
        INFO("worst: " << rep.worst_param << "[" << rep.worst_index
                       << "] analytic=" << rep.analytic << " numeric=" << rep.numeric);
        CHECK(rep.max_rel_error < 1e-4);
    }
}

TEST_CASE("no_jta path equals a hand-assembled uniform-weight forward") {
    dx::Scalers scalers = test_scalers();
    dx::Sample sample = micro_sample();
    dx::DeepExpressModel model = dx::init_params(micro_config(dx::Variant::no_jta), 21);

    dx::Tape t1;
    double via_model = forward_sample(t1, model, sample, scalers).value()[0];

    // Same parameters, assembled by hand: HFR window, uniform weights 1/m,
    // c_H = last encoder state, fuse, one decoder step, head.
    auto scaled = sample.feature_window;
    for (auto& day : scaled) day[0] = scalers.temperature.apply(day[0]);

    dx::Tape t2;
    dx::EncodeOut enc = encode(t2, model, sample.history);
    dx::Value d = represent_window(t2, *model.hfr, scaled, 3);
    REQUIRE(d.value().size() == 24);
    dx::Value c_d = t2.scale(d, 1.0 / 24.0);
    dx::Value z = joint_fuse(t2, *model.w_z, enc.last_hidden, c_d);
    dx::LSTMState s = lstm_step(t2, model.decoder, z, enc.last_hidden, enc.last_cell);
    double by_hand = mlp_forward(t2, model.head, s.h).value()[0];

    CHECK(via_model == by_hand);
}

TEST_CASE("feature-free variants never look at features") {
    dx::Scalers scalers = test_scalers();
    dx::Sample a = micro_sample();
    dx::Sample b = micro_sample();
    b.feature_window = {{-3.0, 7, 4, 0}, {30.0, 14, 3, 1}, {0.5, 9, 2, 2}};

    for (dx::Variant v : {dx::Variant::no_both, dx::Variant::plain_seq2seq}) {
        INFO(dx::variant_name(v));
        dx::DeepExpressModel model = dx::init_params(micro_config(v), 13);
        dx::Tape ta, tb;
        double ya = forward_sample(ta, model, a, scalers).value()[0];
        double yb = forward_sample(tb, model, b, scalers).value()[0];
        CHECK(ya == yb);  // bitwise: the feature window is never consumed

        // Rollout never even calls the provider.
        dx::FeatureProvider poisoned = [](std::size_t) -> std::vector<std::vector<double>> {
            throw dx::DataError("provider must not be called");
        };
        std::vector<double> out;
        REQUIRE_NOTHROW(out = predict_sequence(model, scalers,
                                               {150.0, 220.0, 90.0, 130.0, 175.0}, 10,
                                               poisoned, 3));
        REQUIRE(out.size() == 3);
        for (double y : out) CHECK(std::isfinite(y));
    }
}

TEST_CASE("one-step prediction sees nothing past day t+1+l") {
    dx::GeneratorSpec gspec;
    gspec.length = 40;
    gspec.seed = 3;
    dx::SeriesDataset data = dx::generate_synthetic(gspec).data;
    dx::Experiment exp = dx::prepare_experiment(data, 7, 1);

    dx::ModelConfig cfg = micro_config(dx::Variant::full);
    cfg.history_len = 7;
    dx::DeepExpressModel model = dx::init_params(cfg, 31);

    const std::size_t anchor = 30;  // target day 31, window days 30..32
    std::vector<double> hist;
    for (std::size_t i = anchor - 6; i <= anchor; ++i) hist.push_back(data.rows()[i].y);

    dx::FeatureProvider base = dx::dataset_features(data, 1);
    double y_base = predict_sequence(model, exp.scalers, hist, anchor, base, 1)[0];

    SECTION("perturbing days beyond t+1+l changes nothing (bitwise)") {
        std::vector<dx::DailyRecord> rows = data.rows();
        for (std::size_t i = 33; i < rows.size(); ++i) {
            rows[i].y += 500.0;
            rows[i].temperature += 3.0;
            rows[i].weather = (rows[i].weather + 1) % 15;
            rows[i].holiday = (rows[i].holiday + 1) % 5;
        }
        dx::SeriesDataset perturbed(std::move(rows));
        dx::FeatureProvider prov = dx::dataset_features(perturbed, 1);
        double y_pert = predict_sequence(model, exp.scalers, hist, anchor, prov, 1)[0];
        CHECK(y_pert == y_base);
    }

    SECTION("perturbing a day inside the window does change the output") {
        std::vector<dx::DailyRecord> rows = data.rows();
        rows[32].weather = (rows[32].weather + 1) % 15;
        dx::SeriesDataset perturbed(std::move(rows));
        dx::FeatureProvider prov = dx::dataset_features(perturbed, 1);
        double y_pert = predict_sequence(model, exp.scalers, hist, anchor, prov, 1)[0];
        CHECK(y_pert != y_base);
    }
}

TEST_CASE("autoregressive rollout") {
    dx::GeneratorSpec gspec;
    gspec.length = 40;
    gspec.seed = 3;
    dx::SeriesDataset data = dx::generate_synthetic(gspec).data;
    dx::Experiment exp = dx::prepare_experiment(data, 7, 1);

    dx::ModelConfig cfg = micro_config(dx::Variant::full);
    cfg.history_len = 7;
    dx::DeepExpressModel model = dx::init_params(cfg, 19);

    const std::size_t anchor = 20;
    std::vector<double> hist_raw;
    for (std::size_t i = anchor - 6; i <= anchor; ++i) hist_raw.push_back(data.rows()[i].y);
    dx::FeatureProvider prov = dx::dataset_features(data, 1);

    SECTION("an all-zero model predicts the inverse-scaled zero k times") {
        dx::DeepExpressModel zero(cfg);
        dx::Scalers scalers = test_scalers();  // y range [100, 300]
        dx::FeatureProvider fixed = [](std::size_t) { return window3(); };
        std::vector<double> out =
            predict_sequence(zero, scalers, {150.0, 220.0, 90.0, 130.0, 175.0, 160.0, 140.0},
                             10, fixed, 3);
        REQUIRE(out.size() == 3);
        for (double y : out) CHECK(y == 100.0);
    }

    SECTION("k=1 equals a single encode + decoder application") {
        std::vector<double> rolled = predict_sequence(model, exp.scalers, hist_raw, anchor,
                                                      prov, 1);
        REQUIRE(rolled.size() == 1);

        std::vector<double> hist_scaled;
        for (double y : hist_raw) hist_scaled.push_back(exp.scalers.y.apply(y));
        dx::Tape tape;
        dx::EncodeOut enc = encode(tape, model, hist_scaled);
        dx::StepOut step = predict_one(tape, model, enc, enc.last_hidden, enc.last_cell,
                                       prov(anchor + 1), exp.scalers);
        CHECK(rolled[0] == exp.scalers.y.invert(step.yhat.value()[0]));
    }

    SECTION("teacher forcing matches step 1 and diverges afterwards") {
        std::vector<double> rolled = predict_sequence(model, exp.scalers, hist_raw, anchor,
                                                      prov, 3);
        REQUIRE(rolled.size() == 3);

        // Re-predict each step from the TRUE history instead of the model's
        // own outputs.
        std::vector<double> forced;
        for (std::size_t j = 1; j <= 3; ++j) {
            std::vector<double> h;
            for (std::size_t i = anchor - 6 + (j - 1); i <= anchor + (j - 1); ++i)
                h.push_back(exp.scalers.y.apply(data.rows()[i].y));
            dx::Tape tape;
            dx::EncodeOut enc = encode(tape, model, h);
            dx::StepOut step = predict_one(tape, model, enc, enc.last_hidden, enc.last_cell,
                                           prov(anchor + j), exp.scalers);
            forced.push_back(exp.scalers.y.invert(step.yhat.value()[0]));
        }
        CHECK(rolled[0] == forced[0]);  // same inputs -> bitwise same
        CHECK(rolled[1] != forced[1]);
        CHECK(rolled[2] != forced[2]);
    }

    SECTION("a feature gap is reported with the offending day") {
        CHECK_THROWS_WITH(predict_sequence(model, exp.scalers,
                                           {data.rows()[32].y, data.rows()[33].y,
                                            data.rows()[34].y, data.rows()[35].y,
                                            data.rows()[36].y, data.rows()[37].y,
                                            data.rows()[38].y},
                                           38, prov, 2),
                          ContainsSubstring("day 39"));
    }

    SECTION("history length mismatches are rejected") {
        CHECK_THROWS_AS(predict_sequence(model, exp.scalers, {1.0, 2.0}, anchor, prov, 1),
                        dx::ShapeError);
    }
}

TEST_CASE("evaluation is deterministic; train-mode noise is seed-driven") {
    dx::Scalers scalers = test_scalers();
    dx::Sample sample = micro_sample();
    dx::ModelConfig cfg = micro_config(dx::Variant::full);
    cfg.dropout_rate = 0.5;
    dx::DeepExpressModel model = dx::init_params(cfg, 23);

    auto eval_once = [&]() {
        dx::Tape tape;
        return forward_sample(tape, model, sample, scalers).value()[0];
    };
    CHECK(eval_once() == eval_once());

    auto train_once = [&](std::uint64_t seed) {
        dx::Tape tape;
        dx::Rng rng(seed);
        return forward_sample(tape, model, sample, scalers, true, &rng).value()[0];
    };
    CHECK(train_once(42) == train_once(42));
    CHECK(train_once(42) != train_once(43));
}

TEST_CASE("attention-only baseline reacts to raw feature changes") {
    dx::Scalers scalers = test_scalers();
    dx::DeepExpressModel model = dx::init_params(micro_config(dx::Variant::att_seq2seq), 29);

    dx::Sample a = micro_sample();
    dx::Sample b = micro_sample();
    b.feature_window[1][1] = 9;  // different weather id on the middle day

    dx::Tape ta, tb;
    double ya = forward_sample(ta, model, a, scalers).value()[0];
    double yb = forward_sample(tb, model, b, scalers).value()[0];
    CHECK(ya != yb);

    dx::Sample bad = micro_sample();
    bad.feature_window[0][1] = 15;  // weather id out of range
    dx::Tape tc;
    CHECK_THROWS_AS(forward_sample(tc, model, bad, scalers), dx::ValueError);
}
