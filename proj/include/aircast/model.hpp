#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/rng.hpp"
#include "aircast/tensor.hpp"

namespace aircast {

enum class Mode { train, eval };

// Carried inside checkpoints so a run's provenance travels with the weights.
struct TrainingMeta {
    std::size_t iterations_completed = 0;
    double final_loss = 0.0;
};

struct ModelConfig {
    std::size_t input_features = 6;   // F
    std::size_t window = 730;         // T
    std::size_t hidden = 512;         // H per LSTM layer
    std::size_t targets = 2;          // P
    std::size_t attention_dim = 64;   // width of the attention projection
    double dropout_p = 0.2;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_features == 0 || window == 0 || hidden == 0 || targets == 0 ||
            attention_dim == 0)
            throw config_error("model config: all dimensions must be positive");
        if (dropout_p < 0.0 || dropout_p >= 1.0)
            throw config_error("model config: dropout_p must be in [0, 1)");
        if (bn_eps <= 0.0) throw config_error("model config: bn_eps must be positive");
        if (bn_momentum < 0.0 || bn_momentum > 1.0)
            throw config_error("model config: bn_momentum must be in [0, 1]");
    }
};

// Additive temporal attention: score_t = score_vec . tanh(proj x_t + bias).
struct AttentionParams {
    ad::TensorPtr proj;       // [d_a, F]
    ad::TensorPtr proj_bias;  // [d_a]
    ad::TensorPtr score_vec;  // [d_a]
};

// One LSTM layer; the 4H gate axis is ordered input, forget, cell, output.
struct LstmParams {
    ad::TensorPtr w_input;      // [D_in, 4H]
    ad::TensorPtr w_recurrent;  // [H, 4H]
    ad::TensorPtr bias;         // [4H]
};

struct BatchNormParams {
    ad::TensorPtr gamma;  // [H]
    ad::TensorPtr beta;   // [H]
    std::vector<double> running_mean;  // [H]
    std::vector<double> running_var;   // [H]
};

struct ForecastModel {
    ModelConfig config;
    AttentionParams attention;
    LstmParams lstm1, lstm2;
    BatchNormParams norm1, norm2;
    ad::TensorPtr head_weight;  // [P, H]
    ad::TensorPtr head_bias;    // [P]
    Mode mode = Mode::train;

    // Trainable tensors in a fixed, checkpoint-stable order.
    std::vector<std::pair<std::string, ad::TensorPtr>> named_parameters() const {
        return {
            {"attention.proj", attention.proj},
            {"attention.proj_bias", attention.proj_bias},
            {"attention.score_vec", attention.score_vec},
            {"lstm1.w_input", lstm1.w_input},
            {"lstm1.w_recurrent", lstm1.w_recurrent},
            {"lstm1.bias", lstm1.bias},
            {"norm1.gamma", norm1.gamma},
            {"norm1.beta", norm1.beta},
            {"lstm2.w_input", lstm2.w_input},
            {"lstm2.w_recurrent", lstm2.w_recurrent},
            {"lstm2.bias", lstm2.bias},
            {"norm2.gamma", norm2.gamma},
            {"norm2.beta", norm2.beta},
            {"head.weight", head_weight},
            {"head.bias", head_bias},
        };
    }

    std::vector<ad::TensorPtr> parameters() const {
        std::vector<ad::TensorPtr> out;
        for (auto& [name, p] : named_parameters()) out.push_back(p);
        return out;
    }

    void zero_grads() const {
        for (auto& p : parameters()) p->zero_grad();
    }
};

namespace detail {

inline ad::TensorPtr xavier_matrix(ad::Shape shape, std::size_t fan_in, std::size_t fan_out,
                                   Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    ad::Tensor t(std::move(shape), 0.0, /*rg=*/true);
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return ad::make_tensor(std::move(t));
}

inline ad::TensorPtr param_full(ad::Shape shape, double fill) {
    return ad::make_tensor(ad::Tensor(std::move(shape), fill, /*rg=*/true));
}

inline LstmParams init_lstm(std::size_t d_in, std::size_t hidden, Rng& rng) {
    LstmParams p;
    p.w_input = xavier_matrix({d_in, 4 * hidden}, d_in, 4 * hidden, rng);
    p.w_recurrent = xavier_matrix({hidden, 4 * hidden}, hidden, 4 * hidden, rng);
    p.bias = param_full({4 * hidden}, 0.0);
    // forget-gate bias starts at 1 so early cell state is retained
    for (std::size_t i = hidden; i < 2 * hidden; ++i) p.bias->data[i] = 1.0;
    return p;
}

inline BatchNormParams init_batchnorm(std::size_t hidden) {
    BatchNormParams p;
    p.gamma = param_full({hidden}, 1.0);
    p.beta = param_full({hidden}, 0.0);
    p.running_mean.assign(hidden, 0.0);
    p.running_var.assign(hidden, 1.0);
    return p;
}

}  // namespace detail

// Deterministic per seed: weight matrices are Xavier-uniform
// (+-sqrt(6/(fan_in+fan_out))), biases zero except the LSTM forget gates.
inline ForecastModel init_weights(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(derive_seed(seed, 0x11));
    ForecastModel m;
    m.config = cfg;
    m.config.seed = seed;
    m.attention.proj =
        detail::xavier_matrix({cfg.attention_dim, cfg.input_features}, cfg.input_features,
                              cfg.attention_dim, rng);
    m.attention.proj_bias = detail::param_full({cfg.attention_dim}, 0.0);
    m.attention.score_vec = detail::xavier_matrix({cfg.attention_dim}, cfg.attention_dim, 1, rng);
    m.lstm1 = detail::init_lstm(cfg.input_features, cfg.hidden, rng);
    m.lstm2 = detail::init_lstm(cfg.hidden, cfg.hidden, rng);
    m.norm1 = detail::init_batchnorm(cfg.hidden);
    m.norm2 = detail::init_batchnorm(cfg.hidden);
    m.head_weight = detail::xavier_matrix({cfg.targets, cfg.hidden}, cfg.hidden, cfg.targets, rng);
    m.head_bias = detail::param_full({cfg.targets}, 0.0);
    m.mode = Mode::train;
    return m;
}

inline ForecastModel init_weights(const ModelConfig& cfg) { return init_weights(cfg, cfg.seed); }

// ---------------------------------------------------------------------------
// Layer forwards. All inputs are [B, T, D] sequences.
// ---------------------------------------------------------------------------

// Per-sample softmax weights over the time axis, [B, T]; rows sum to 1.
// score_t = score_vec . tanh(proj x_t + proj_bias).
inline ad::TensorPtr attention_weights(ad::Tape& tape, const ad::TensorPtr& x,
                                       const ForecastModel& model) {
    const auto& cfg = model.config;
    if (x->rank() != 3 || x->shape[2] != cfg.input_features)
        throw std::invalid_argument("attention_weights: expected [B,T,F] input, got " +
                                    ad::shape_str(x->shape));
    const std::size_t seq = x->shape[1];
    auto proj_t = ad::transpose(tape, model.attention.proj);                   // [F, d_a]
    auto v_col = ad::reshape(tape, model.attention.score_vec, {cfg.attention_dim, 1});

    std::vector<ad::TensorPtr> scores;  // each [B, 1]
    scores.reserve(seq);
    for (std::size_t t = 0; t < seq; ++t) {
        auto x_t = ad::slice_step(tape, x, t);                         // [B, F]
        auto pre = ad::add(tape, ad::matmul(tape, x_t, proj_t),
                           model.attention.proj_bias);                 // [B, d_a]
        auto u = ad::tanh_op(tape, pre);
        scores.push_back(ad::matmul(tape, u, v_col));                  // [B, 1]
    }
    auto score_mat = ad::concat_cols(tape, scores);                    // [B, T]
    return ad::softmax_axis(tape, score_mat, 1);
}

// Soft attention over time, rescaled by T so uniform weights are an exact
// identity: out_t = T * alpha_t * x_t with alpha = softmax_t(score_t).
inline ad::TensorPtr attention_forward(ad::Tape& tape, const ad::TensorPtr& x,
                                       const ForecastModel& model) {
    const std::size_t seq = x->shape[1];
    auto alpha = attention_weights(tape, x, model);

    auto ones_row = ad::make_tensor(ad::Tensor({1, model.config.input_features}, 1.0));
    std::vector<ad::TensorPtr> weighted;
    weighted.reserve(seq);
    for (std::size_t t = 0; t < seq; ++t) {
        auto alpha_t = ad::slice_cols(tape, alpha, t, 1);              // [B, 1]
        auto alpha_mat = ad::matmul(tape, alpha_t, ones_row);          // [B, F]
        auto x_t = ad::slice_step(tape, x, t);
        weighted.push_back(
            ad::mul_scalar(tape, ad::mul(tape, alpha_mat, x_t), static_cast<double>(seq)));
    }
    return ad::stack_steps(tape, weighted);                            // [B, T, F]
}

// Standard LSTM over the time axis; returns every hidden state.
// Gate pre-activations: z_t = x_t W_in + h_{t-1} W_rec + bias, split into
// (input, forget, cell, output); c_t = f*c_{t-1} + i*g; h_t = o*tanh(c_t).
inline ad::TensorPtr lstm_forward(ad::Tape& tape, const ad::TensorPtr& x, const LstmParams& params,
                                  std::size_t hidden, ad::TensorPtr h0 = nullptr,
                                  ad::TensorPtr c0 = nullptr) {
    if (x->rank() != 3) throw std::invalid_argument("lstm_forward: expected [B,T,D] input");
    const std::size_t batch = x->shape[0], seq = x->shape[1], d_in = x->shape[2];
    if (params.w_input->shape != ad::Shape{d_in, 4 * hidden})
        throw std::invalid_argument("lstm_forward: input weights " +
                                    ad::shape_str(params.w_input->shape) + " do not match D_in " +
                                    std::to_string(d_in));
    auto h = h0 ? h0 : ad::make_tensor(ad::Tensor({batch, hidden}, 0.0));
    auto c = c0 ? c0 : ad::make_tensor(ad::Tensor({batch, hidden}, 0.0));
    if (h->shape != ad::Shape{batch, hidden} || c->shape != ad::Shape{batch, hidden})
        throw std::invalid_argument("lstm_forward: state shape mismatch");

    std::vector<ad::TensorPtr> outputs;
    outputs.reserve(seq);
    for (std::size_t t = 0; t < seq; ++t) {
        auto x_t = ad::slice_step(tape, x, t);
        auto z = ad::add(tape,
                         ad::add(tape, ad::matmul(tape, x_t, params.w_input),
                                 ad::matmul(tape, h, params.w_recurrent)),
                         params.bias);                                  // [B, 4H]
        auto gate_in = ad::sigmoid(tape, ad::slice_cols(tape, z, 0, hidden));
        auto gate_forget = ad::sigmoid(tape, ad::slice_cols(tape, z, hidden, hidden));
        auto gate_cell = ad::tanh_op(tape, ad::slice_cols(tape, z, 2 * hidden, hidden));
        auto gate_out = ad::sigmoid(tape, ad::slice_cols(tape, z, 3 * hidden, hidden));
        c = ad::add(tape, ad::mul(tape, gate_forget, c), ad::mul(tape, gate_in, gate_cell));
        h = ad::mul(tape, gate_out, ad::tanh_op(tape, c));
        outputs.push_back(h);
    }
    return ad::stack_steps(tape, outputs);                              // [B, T, H]
}

// Normalizes each hidden channel over the combined batch*time axis.
// Train mode uses batch statistics (population variance) and updates the
// running estimates; eval mode uses the running estimates only.
inline ad::TensorPtr batchnorm_forward(ad::Tape& tape, const ad::TensorPtr& x,
                                       BatchNormParams& params, Mode mode, double eps,
                                       double momentum) {
    if (x->rank() != 3) throw std::invalid_argument("batchnorm_forward: expected [B,T,H] input");
    const std::size_t channels = x->shape[2];
    if (params.gamma->shape != ad::Shape{channels})
        throw std::invalid_argument("batchnorm_forward: channel mismatch");

    if (mode == Mode::train) {
        if (x->shape[0] * x->shape[1] < 2)
            throw std::invalid_argument("batchnorm_forward: train mode needs B*T >= 2");
        auto mean = ad::reduce_mean(tape, x, {0, 1});                    // [H]
        auto centered = ad::sub(tape, x, mean);
        auto var = ad::reduce_mean(tape, ad::mul(tape, centered, centered), {0, 1});
        auto inv_std = ad::rsqrt(tape, ad::add_scalar(tape, var, eps));
        auto normalized = ad::mul(tape, centered, inv_std);
        for (std::size_t h = 0; h < channels; ++h) {
            params.running_mean[h] =
                (1.0 - momentum) * params.running_mean[h] + momentum * mean->data[h];
            params.running_var[h] =
                (1.0 - momentum) * params.running_var[h] + momentum * var->data[h];
        }
        return ad::add(tape, ad::mul(tape, normalized, params.gamma), params.beta);
    }

    auto neg_mean = ad::make_tensor(ad::Tensor({channels}, 0.0));
    auto inv_std = ad::make_tensor(ad::Tensor({channels}, 0.0));
    for (std::size_t h = 0; h < channels; ++h) {
        neg_mean->data[h] = -params.running_mean[h];
        inv_std->data[h] = 1.0 / std::sqrt(params.running_var[h] + eps);
    }
    auto centered = ad::add(tape, x, neg_mean);
    return ad::add(tape, ad::mul(tape, ad::mul(tape, centered, inv_std), params.gamma),
                   params.beta);
}

// Inverted dropout between the first normalization and the second LSTM;
// identity in eval mode.
inline ad::TensorPtr dropout_forward(ad::Tape& tape, const ad::TensorPtr& x, double p, Mode mode,
                                     Rng* rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout_forward: p must be in [0, 1)");
    if (mode == Mode::eval || p == 0.0) return x;
    if (rng == nullptr) throw std::invalid_argument("dropout_forward: train mode needs an rng");
    return ad::dropout(tape, x, p, *rng);
}

// Full network: attention -> LSTM -> BatchNorm -> Dropout -> LSTM ->
// BatchNorm -> per-step linear head. Returns [B, T, P].
inline ad::TensorPtr model_forward(ad::Tape& tape, const ad::TensorPtr& x, ForecastModel& model,
                                   Rng* rng = nullptr) {
    const auto& cfg = model.config;
    if (x->rank() != 3 || x->shape[2] != cfg.input_features)
        throw std::invalid_argument("model_forward: expected [B,T,F] input, got " +
                                    ad::shape_str(x->shape));
    const std::size_t seq = x->shape[1];

    auto attended = attention_forward(tape, x, model);
    auto h1 = lstm_forward(tape, attended, model.lstm1, cfg.hidden);
    auto n1 = batchnorm_forward(tape, h1, model.norm1, model.mode, cfg.bn_eps, cfg.bn_momentum);
    auto dropped = dropout_forward(tape, n1, cfg.dropout_p, model.mode, rng);
    auto h2 = lstm_forward(tape, dropped, model.lstm2, cfg.hidden);
    auto n2 = batchnorm_forward(tape, h2, model.norm2, model.mode, cfg.bn_eps, cfg.bn_momentum);

    auto head_t = ad::transpose(tape, model.head_weight);  // [H, P]
    std::vector<ad::TensorPtr> outputs;
    outputs.reserve(seq);
    for (std::size_t t = 0; t < seq; ++t) {
        auto h_t = ad::slice_step(tape, n2, t);
        outputs.push_back(ad::add(tape, ad::matmul(tape, h_t, head_t), model.head_bias));
    }
    return ad::stack_steps(tape, outputs);  // [B, T, P]
}

}  // namespace aircast
