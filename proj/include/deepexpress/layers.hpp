#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), the usual torch-style reset.
// Elements are drawn in flat order so a fixed seed fixes the tensor.
inline void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng) {
    if (fan_in == 0) throw ValueError("init: fan_in must be positive for " + p.name);
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-bound, bound);
}

// ---- LSTM cell ---------------------------------------------------------

/**
 * One LSTM cell: four gates, each with an input weight [hidden x in], a
 * recurrent weight [hidden x hidden] and a bias [hidden].
 *
 *   i = sigmoid(Wi x + Ui h + bi)      f = sigmoid(Wf x + Uf h + bf)
 *   o = sigmoid(Wo x + Uo h + bo)      g = tanh  (Wg x + Ug h + bg)
 *   c' = f * c + i * g                 h' = o * tanh(c')
 */
struct LSTMCellParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Parameter w_in, u_in, b_in;
    Parameter w_forget, u_forget, b_forget;
    Parameter w_out, u_out, b_out;
    Parameter w_cell, u_cell, b_cell;

    LSTMCellParams() = default;

    LSTMCellParams(const std::string& prefix, std::size_t in, std::size_t hidden)
        : input_dim(in), hidden_dim(hidden) {
        if (in == 0 || hidden == 0)
            throw ValueError("lstm " + prefix + ": dims must be positive");
        auto mk = [&](Parameter& p, const std::string& tag, Shape shape) {
            p = Parameter(prefix + "." + tag, Tensor(std::move(shape)));
        };
        mk(w_in, "w_in", {hidden, in}), mk(u_in, "u_in", {hidden, hidden});
        mk(b_in, "b_in", {hidden});
        mk(w_forget, "w_forget", {hidden, in}), mk(u_forget, "u_forget", {hidden, hidden});
        mk(b_forget, "b_forget", {hidden});
        mk(w_out, "w_out", {hidden, in}), mk(u_out, "u_out", {hidden, hidden});
        mk(b_out, "b_out", {hidden});
        mk(w_cell, "w_cell", {hidden, in}), mk(u_cell, "u_cell", {hidden, hidden});
        mk(b_cell, "b_cell", {hidden});
    }

    std::vector<Parameter*> parameters() {
        return {&w_in,  &u_in,  &b_in,  &w_forget, &u_forget, &b_forget,
                &w_out, &u_out, &b_out, &w_cell,   &u_cell,   &b_cell};
    }

    void init(Rng& rng) {
        // Input weights see the input, recurrent weights and biases see the
        // hidden state.
        for (Parameter* p : {&w_in, &w_forget, &w_out, &w_cell})
            init_uniform_fan_in(*p, input_dim, rng);
        for (Parameter* p : {&u_in, &u_forget, &u_out, &u_cell})
            init_uniform_fan_in(*p, hidden_dim, rng);
        for (Parameter* p : {&b_in, &b_forget, &b_out, &b_cell})
            init_uniform_fan_in(*p, hidden_dim, rng);
    }
};

// Tape-bound handles for one cell; bind once, reuse across timesteps.
struct LSTMBound {
    Value w_in, u_in, b_in;
    Value w_forget, u_forget, b_forget;
    Value w_out, u_out, b_out;
    Value w_cell, u_cell, b_cell;
};

inline LSTMBound bind(Tape& tape, LSTMCellParams& p) {
    LSTMBound b;
    b.w_in = tape.param(p.w_in), b.u_in = tape.param(p.u_in), b.b_in = tape.param(p.b_in);
    b.w_forget = tape.param(p.w_forget), b.u_forget = tape.param(p.u_forget);
    b.b_forget = tape.param(p.b_forget);
    b.w_out = tape.param(p.w_out), b.u_out = tape.param(p.u_out), b.b_out = tape.param(p.b_out);
    b.w_cell = tape.param(p.w_cell), b.u_cell = tape.param(p.u_cell);
    b.b_cell = tape.param(p.b_cell);
    return b;
}

struct LSTMState {
    Value h;
    Value c;
};

inline LSTMState lstm_step(Tape& tape, const LSTMBound& p, Value x, Value h_prev, Value c_prev) {
    auto gate = [&](Value w, Value u, Value b) {
        return tape.add_bias(tape.add(tape.matmul(w, x), tape.matmul(u, h_prev)), b);
    };
    Value i = tape.sigmoid(gate(p.w_in, p.u_in, p.b_in));
    Value f = tape.sigmoid(gate(p.w_forget, p.u_forget, p.b_forget));
    Value o = tape.sigmoid(gate(p.w_out, p.u_out, p.b_out));
    Value g = tape.tanh(gate(p.w_cell, p.u_cell, p.b_cell));
    Value c = tape.add(tape.mul(f, c_prev), tape.mul(i, g));
    Value h = tape.mul(o, tape.tanh(c));
    return {h, c};
}

inline LSTMState lstm_step(Tape& tape, LSTMCellParams& params, Value x, Value h_prev,
                           Value c_prev) {
    return lstm_step(tape, bind(tape, params), x, h_prev, c_prev);
}

// ---- dropout -----------------------------------------------------------

struct DropoutSpec {
    double rate = 0.0;
    bool train = false;
};

// Inverted dropout mask: entries are 0 with probability rate, else
// 1/(1 - rate), so the expected value of the masked signal is unchanged.
inline Tensor dropout_mask(std::size_t n, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw ValueError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    Tensor mask({n});
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    return mask;
}

// Identity (same node, no rng consumed) when not training or rate is zero.
inline Value dropout(Tape& tape, Value x, const DropoutSpec& spec, Rng& rng) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0))
        throw ValueError("dropout: rate must be in [0, 1), got " + std::to_string(spec.rate));
    if (!spec.train || spec.rate == 0.0) return x;
    Tensor mask = dropout_mask(x.value().size(), spec.rate, rng);
    return tape.mul(x, tape.constant(Tensor(x.value().shape(), mask.data())));
}

// ---- two-layer perceptron ----------------------------------------------

enum class Activation { identity, sigmoid, relu, tanh };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw ValueError("unknown activation '" + name + "'");
}

inline Value apply_activation(Tape& tape, Value x, Activation a) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::sigmoid: return tape.sigmoid(x);
        case Activation::relu: return tape.relu(x);
        case Activation::tanh: return tape.tanh(x);
    }
    throw Error("apply_activation: bad enum");
}

/** w2 * act(w1 x + b1) + b2, with a configurable output activation. */
struct MLPParams {
    std::size_t in_dim = 0, hidden_dim = 0, out_dim = 0;
    Activation hidden_activation = Activation::sigmoid;
    Activation output_activation = Activation::identity;
    Parameter w1, b1, w2, b2;

    MLPParams() = default;

    MLPParams(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out,
              Activation hidden_act = Activation::sigmoid,
              Activation output_act = Activation::identity)
        : in_dim(in),
          hidden_dim(hidden),
          out_dim(out),
          hidden_activation(hidden_act),
          output_activation(output_act),
          w1(prefix + ".w1", Tensor({hidden, in})),
          b1(prefix + ".b1", Tensor({hidden})),
          w2(prefix + ".w2", Tensor({out, hidden})),
          b2(prefix + ".b2", Tensor({out})) {
        if (in == 0 || hidden == 0 || out == 0)
            throw ValueError("mlp " + prefix + ": dims must be positive");
    }

    std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }

    void init(Rng& rng) {
        init_uniform_fan_in(w1, in_dim, rng);
        init_uniform_fan_in(b1, in_dim, rng);
        init_uniform_fan_in(w2, hidden_dim, rng);
        init_uniform_fan_in(b2, hidden_dim, rng);
    }
};

// Optional dropout is applied to the hidden layer only, and only when the
// spec says training.
inline Value mlp_forward(Tape& tape, MLPParams& p, Value x, const DropoutSpec* drop = nullptr,
                         Rng* drop_rng = nullptr) {
    Value hidden = apply_activation(
        tape, tape.add_bias(tape.matmul(tape.param(p.w1), x), tape.param(p.b1)),
        p.hidden_activation);
    if (drop != nullptr && drop_rng != nullptr) hidden = dropout(tape, hidden, *drop, *drop_rng);
    Value out = tape.add_bias(tape.matmul(tape.param(p.w2), hidden), tape.param(p.b2));
    return apply_activation(tape, out, p.output_activation);
}

}  // namespace dx
