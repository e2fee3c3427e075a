#pragma once

#include <string>
#include <vector>

#include "autodiff.hpp"
#include "layers.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

struct AttentionOut {
    Value weights;  // softmax scores, sums to one
    Value context;
};

/**
 * Additive attention of the decoder state over encoder states:
 *   score_i = v . tanh(W s_prev + U h_i + b),  alpha = softmax(score),
 *   context = sum_i alpha_i h_i.
 */
struct TemporalAttentionParams {
    std::size_t enc_dim = 0, dec_dim = 0, score_dim = 0;
    Parameter v, w_dec, u_enc, b;

    TemporalAttentionParams() = default;
    TemporalAttentionParams(const std::string& prefix, std::size_t enc, std::size_t dec,
                            std::size_t score)
        : enc_dim(enc),
          dec_dim(dec),
          score_dim(score),
          v(prefix + ".v", Tensor({score})),
          w_dec(prefix + ".w_dec", Tensor({score, dec})),
          u_enc(prefix + ".u_enc", Tensor({score, enc})),
          b(prefix + ".b", Tensor({score})) {
        if (enc == 0 || dec == 0 || score == 0)
            throw ValueError("attention " + prefix + ": dims must be positive");
    }

    std::vector<Parameter*> parameters() { return {&v, &w_dec, &u_enc, &b}; }

    void init(Rng& rng) {
        init_uniform_fan_in(v, score_dim, rng);
        init_uniform_fan_in(w_dec, dec_dim, rng);
        init_uniform_fan_in(u_enc, enc_dim, rng);
        init_uniform_fan_in(b, dec_dim, rng);
    }
};

inline AttentionOut temporal_attention(Tape& tape, TemporalAttentionParams& p, Value s_prev,
                                       const std::vector<Value>& enc_states) {
    if (enc_states.empty()) throw ShapeError("temporal attention: no encoder states");
    Value common = tape.add(tape.matmul(tape.param(p.w_dec), s_prev), tape.param(p.b));
    Value u = tape.param(p.u_enc);
    Value v = tape.param(p.v);
    std::vector<Value> scores;
    scores.reserve(enc_states.size());
    std::vector<Value> rows;
    rows.reserve(enc_states.size());
    for (const Value& h : enc_states) {
        scores.push_back(tape.matmul(v, tape.tanh(tape.add(common, tape.matmul(u, h)))));
        rows.push_back(tape.reshape(h, {1, h.value().size()}));
    }
    Value alpha = tape.softmax(tape.concat(scores));
    Value context = tape.matmul(alpha, tape.concat(rows, 0));
    return {alpha, context};
}

/**
 * The same scoring over the components of one feature vector d:
 *   score_j = v . tanh(W s_prev + u d_j + b),  beta = softmax(score),
 *   context = beta * d  (componentwise, so the vector keeps its layout).
 */
struct FeatureAttentionParams {
    std::size_t dec_dim = 0, score_dim = 0;
    Parameter v, w_dec, u_comp, b;

    FeatureAttentionParams() = default;
    FeatureAttentionParams(const std::string& prefix, std::size_t dec, std::size_t score)
        : dec_dim(dec),
          score_dim(score),
          v(prefix + ".v", Tensor({score})),
          w_dec(prefix + ".w_dec", Tensor({score, dec})),
          u_comp(prefix + ".u_comp", Tensor({score, 1})),
          b(prefix + ".b", Tensor({score})) {
        if (dec == 0 || score == 0)
            throw ValueError("attention " + prefix + ": dims must be positive");
    }

    std::vector<Parameter*> parameters() { return {&v, &w_dec, &u_comp, &b}; }

    void init(Rng& rng) {
        init_uniform_fan_in(v, score_dim, rng);
        init_uniform_fan_in(w_dec, dec_dim, rng);
        init_uniform_fan_in(u_comp, 1, rng);
        init_uniform_fan_in(b, dec_dim, rng);
    }
};

inline AttentionOut feature_attention(Tape& tape, FeatureAttentionParams& p, Value s_prev,
                                      Value d) {
    if (d.value().rank() != 1 || d.value().size() == 0)
        throw ShapeError("feature attention: d must be a non-empty vector, got " +
                         shape_string(d.value().shape()));
    std::size_t m = d.value().size();
    Value common = tape.add(tape.matmul(tape.param(p.w_dec), s_prev), tape.param(p.b));
    Value u = tape.param(p.u_comp);
    Value v = tape.param(p.v);
    std::vector<Value> scores;
    scores.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        Value dj = tape.slice(d, j, 1);
        scores.push_back(tape.matmul(v, tape.tanh(tape.add(common, tape.matmul(u, dj)))));
    }
    Value beta = tape.softmax(tape.concat(scores));
    return {beta, tape.mul(beta, d)};
}

// z = c_h * (W_z c_d): project the feature context into the temporal
// context's space, then gate the two multiplicatively.
inline Value joint_fuse(Tape& tape, Parameter& w_z, Value c_h, Value c_d) {
    return tape.mul(c_h, tape.matmul(tape.param(w_z), c_d));
}

}  // namespace dx
