#include <catch2/catch_amalgamated.hpp>

#include <deepexpress/attention.hpp>

#include "test_support.hpp"

using dx::FeatureAttentionParams;
using dx::Parameter;
using dx::Rng;
using dx::Tape;
using dx::TemporalAttentionParams;
using dx::Tensor;
using dx::Value;

TEST_CASE("attention weights sum to one across random configurations") {
    Rng rng(414);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t enc = 1 + rng.index(6);
        std::size_t dec = 1 + rng.index(6);
        std::size_t score = 1 + rng.index(6);
        std::size_t steps = 1 + rng.index(10);
        std::size_t m = 1 + rng.index(20);

        TemporalAttentionParams tp("ta", enc, dec, score);
        tp.init(rng);
        FeatureAttentionParams fp("fa", dec, score);
        fp.init(rng);

        Tape tape;
        Value s = tape.constant(tsup::random_tensor(rng, {dec}, -2.0, 2.0));
        std::vector<Value> states;
        for (std::size_t i = 0; i < steps; ++i)
            states.push_back(tape.constant(tsup::random_tensor(rng, {enc}, -2.0, 2.0)));
        auto ta = dx::temporal_attention(tape, tp, s, states);
        double sum_alpha = 0.0;
        for (std::size_t i = 0; i < steps; ++i) sum_alpha += ta.weights.value()[i];
        REQUIRE(std::fabs(sum_alpha - 1.0) <= 1e-12);
        REQUIRE(ta.context.value().shape() == dx::Shape{enc});

        Value d = tape.constant(tsup::random_tensor(rng, {m}, -2.0, 2.0));
        auto fa = dx::feature_attention(tape, fp, s, d);
        double sum_beta = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum_beta += fa.weights.value()[j];
        REQUIRE(std::fabs(sum_beta - 1.0) <= 1e-12);
        REQUIRE(fa.context.value().shape() == dx::Shape{m});
    }
}

TEST_CASE("a single encoder state takes all the weight") {
    Rng rng(1);
    TemporalAttentionParams tp("ta", 3, 2, 4);
    tp.init(rng);
    Tape tape;
    Value s = tape.constant(tsup::random_tensor(rng, {2}));
    std::vector<Value> states{tape.constant(tsup::random_tensor(rng, {3}))};
    auto out = dx::temporal_attention(tape, tp, s, states);
    REQUIRE(out.weights.value()[0] == 1.0);
    REQUIRE(tsup::max_abs_diff(out.context.value(), states[0].value()) <= 1e-15);
}

TEST_CASE("identical states share identical weights") {
    Rng rng(2);
    TemporalAttentionParams tp("ta", 4, 3, 4);
    tp.init(rng);
    Tape tape;
    Value s = tape.constant(tsup::random_tensor(rng, {3}));
    Tensor h = tsup::random_tensor(rng, {4});
    std::vector<Value> states{tape.constant(h), tape.constant(tsup::random_tensor(rng, {4})),
                              tape.constant(h)};
    auto out = dx::temporal_attention(tape, tp, s, states);
    REQUIRE(out.weights.value()[0] == out.weights.value()[2]);
}

TEST_CASE("attention is equivariant under permutation of the states") {
    Rng rng(3);
    TemporalAttentionParams tp("ta", 3, 2, 5);
    tp.init(rng);
    std::vector<Tensor> hs;
    for (int i = 0; i < 4; ++i) hs.push_back(tsup::random_tensor(rng, {3}));
    Tensor s = tsup::random_tensor(rng, {2});

    auto run = [&](const std::vector<std::size_t>& order) {
        Tape tape;
        std::vector<Value> states;
        for (std::size_t i : order) states.push_back(tape.constant(hs[i]));
        auto out = dx::temporal_attention(tape, tp, tape.constant(s), states);
        return std::pair<Tensor, Tensor>(out.weights.value(), out.context.value());
    };
    auto [w_fwd, c_fwd] = run({0, 1, 2, 3});
    auto [w_rev, c_rev] = run({3, 2, 1, 0});
    for (std::size_t i = 0; i < 4; ++i)
        REQUIRE(std::fabs(w_fwd[i] - w_rev[3 - i]) <= 1e-12);
    REQUIRE(tsup::max_abs_diff(c_fwd, c_rev) <= 1e-12);
}

TEST_CASE("weights follow the score ordering for a transparent setup") {
    // w_dec = 0, b = 0, u = I, v = e0: score_i = tanh(h_i[0]).
    TemporalAttentionParams tp("ta", 2, 2, 2);
    tp.v.value[0] = 1.0;
    tp.u_enc.value[0] = 1.0;  // u_enc[0][0]
    tp.u_enc.value[3] = 1.0;  // u_enc[1][1]
    Tape tape;
    Value s = tape.constant(Tensor::zeros({2}));
    std::vector<Value> states{tape.constant(Tensor::row({-1.0, 0.0})),
                              tape.constant(Tensor::row({0.5, 0.0})),
                              tape.constant(Tensor::row({2.0, 0.0}))};
    auto out = dx::temporal_attention(tape, tp, s, states);
    REQUIRE(out.weights.value()[0] < out.weights.value()[1]);
    REQUIRE(out.weights.value()[1] < out.weights.value()[2]);
}

TEST_CASE("feature attention over identical components is uniform") {
    Rng rng(4);
    FeatureAttentionParams fp("fa", 3, 4);
    fp.init(rng);
    Tape tape;
    Value s = tape.constant(tsup::random_tensor(rng, {3}));
    Value d = tape.constant(Tensor::full({8}, 0.37));
    auto out = dx::feature_attention(tape, fp, s, d);
    for (std::size_t j = 0; j < 8; ++j)
        REQUIRE(std::fabs(out.weights.value()[j] - 0.125) <= 1e-15);
    // context = beta * d keeps the layout
    for (std::size_t j = 0; j < 8; ++j)
        REQUIRE(std::fabs(out.context.value()[j] - 0.125 * 0.37) <= 1e-15);
}

TEST_CASE("feature attention context preserves component positions") {
    Rng rng(5);
    FeatureAttentionParams fp("fa", 2, 3);
    fp.init(rng);
    Tape tape;
    Value s = tape.constant(tsup::random_tensor(rng, {2}));
    Tensor d = tsup::random_tensor(rng, {6});
    auto out = dx::feature_attention(tape, fp, s, tape.constant(d));
    for (std::size_t j = 0; j < 6; ++j)
        REQUIRE(out.context.value()[j] == out.weights.value()[j] * d[j]);
}

TEST_CASE("attention gradients match finite differences") {
    Rng rng(6);
    TemporalAttentionParams tp("ta", 3, 2, 3);
    tp.init(rng);
    FeatureAttentionParams fp("fa", 2, 3);
    fp.init(rng);
    Parameter w_z("w_z", Tensor({3, 5}));
    dx::init_uniform_fan_in(w_z, 5, rng);

    Tensor s = tsup::random_tensor(rng, {2});
    std::vector<Tensor> hs;
    for (int i = 0; i < 4; ++i) hs.push_back(tsup::random_tensor(rng, {3}));
    Tensor d = tsup::random_tensor(rng, {5});

    auto build = [&](Tape& tape) {
        Value sv = tape.constant(s);
        std::vector<Value> states;
        for (const Tensor& h : hs) states.push_back(tape.constant(h));
        auto ta = dx::temporal_attention(tape, tp, sv, states);
        auto fa = dx::feature_attention(tape, fp, sv, tape.constant(d));
        Value z = dx::joint_fuse(tape, w_z, ta.context, fa.context);
        return tape.sum(tape.mul(z, z));
    };
    std::vector<Parameter*> params = tp.parameters();
    for (Parameter* p : fp.parameters()) params.push_back(p);
    params.push_back(&w_z);
    auto report = dx::finite_diff_params(params, build, 1e-5);
    INFO("worst " << report.worst_param << "[" << report.worst_index << "]");
    REQUIRE(report.max_rel_error < 1e-5);
}

TEST_CASE("joint fuse validates shapes through its primitives") {
    Rng rng(7);
    Parameter w_z("w_z", Tensor({3, 5}));
    dx::init_uniform_fan_in(w_z, 5, rng);
    Tape tape;
    Value c_h = tape.constant(tsup::random_tensor(rng, {3}));
    Value bad_d = tape.constant(tsup::random_tensor(rng, {4}));
    REQUIRE_THROWS_AS(dx::joint_fuse(tape, w_z, c_h, bad_d), dx::ShapeError);

    Value good_d = tape.constant(tsup::random_tensor(rng, {5}));
    Value z = dx::joint_fuse(tape, w_z, c_h, good_d);
    REQUIRE(z.value().shape() == dx::Shape{3});
}

TEST_CASE("attention rejects empty inputs") {
    Rng rng(8);
    TemporalAttentionParams tp("ta", 2, 2, 2);
    tp.init(rng);
    Tape tape;
    Value s = tape.constant(Tensor::zeros({2}));
    REQUIRE_THROWS_AS(dx::temporal_attention(tape, tp, s, {}), dx::ShapeError);
}
