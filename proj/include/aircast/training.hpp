#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/frame.hpp"
#include "aircast/model.hpp"
#include "aircast/rng.hpp"
#include "aircast/tensor.hpp"

namespace aircast {

struct TrainConfig {
    std::size_t iterations = 200;  // epochs over the training windows
    double learning_rate = 0.001;
    std::size_t batch_size = 8;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    // learning_rate 0 is allowed here (a null update, useful for dry runs);
    // the CLI-facing run config insists on a strictly positive rate.
    void validate() const {
        if (iterations < 1) throw config_error("train config: iterations must be >= 1");
        if (batch_size < 1) throw config_error("train config: batch_size must be >= 1");
        if (!(learning_rate >= 0.0))
            throw config_error("train config: learning_rate must not be negative");
    }
};

// Per-parameter first/second moment buffers plus the shared step counter.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;

    static AdamState for_parameters(const std::vector<ad::TensorPtr>& params) {
        AdamState s;
        for (const auto& p : params) {
            s.m.emplace_back(p->numel(), 0.0);
            s.v.emplace_back(p->numel(), 0.0);
        }
        return s;
    }
};

struct TrainReport {
    std::vector<double> epoch_loss;     // mean training loss per epoch
    std::vector<double> epoch_seconds;  // wall clock per epoch
    TrainingMeta meta() const {
        TrainingMeta m;
        m.iterations_completed = epoch_loss.size();
        m.final_loss = epoch_loss.empty() ? 0.0 : epoch_loss.back();
        return m;
    }
};

// Mean absolute error over every element; subgradient 0 at exact ties.
inline ad::TensorPtr mae_loss(ad::Tape& tape, const ad::TensorPtr& pred,
                              const ad::TensorPtr& truth) {
    if (pred->shape != truth->shape)
        throw std::invalid_argument("mae_loss: shape mismatch " + ad::shape_str(pred->shape) +
                                    " vs " + ad::shape_str(truth->shape));
    return ad::reduce_mean_all(tape, ad::abs_op(tape, ad::sub(tape, pred, truth)));
}

// One bias-corrected Adam update over all parameter tensors. Gradients are
// read from each tensor's grad buffer; the caller zeroes them afterwards.
inline void adam_step(const std::vector<ad::TensorPtr>& params, AdamState& state,
                      const TrainConfig& cfg) {
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state does not match parameter count");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double corr2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        if (!p.has_grad()) p.ensure_grad();
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double g = p.grad[i];
            if (!std::isfinite(g))
                throw numeric_error("adam_step: non-finite gradient at parameter " +
                                    std::to_string(k) + "[" + std::to_string(i) + "]");
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
            const double m_hat = m[i] / corr1;
            const double v_hat = v[i] / corr2;
            p.data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
        }
    }
}

namespace detail {

// Packs selected samples into a [B, T, D] tensor.
inline ad::TensorPtr pack_batch(const std::vector<std::vector<double>>& samples,
                                const std::vector<std::size_t>& order, std::size_t begin,
                                std::size_t count, std::size_t seq, std::size_t width) {
    ad::Tensor t({count, seq, width}, 0.0);
    for (std::size_t b = 0; b < count; ++b) {
        const auto& src = samples[order[begin + b]];
        std::copy(src.begin(), src.end(), t.data.begin() + b * seq * width);
    }
    return ad::make_tensor(std::move(t));
}

}  // namespace detail

// Deterministic training loop: per epoch, shuffle sample order with an
// epoch-seeded stream, process batches of cfg.batch_size (final short batch
// included), forward in train mode, MAE loss, backward, Adam update.
inline TrainReport train(ForecastModel& model, const WindowedDataset& dataset,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.n_samples() == 0) throw data_error("train: empty dataset");
    if (dataset.n_features() != model.config.input_features ||
        dataset.n_targets() != model.config.targets ||
        dataset.window != model.config.window)
        throw config_error("train: dataset shape does not match model config");

    model.mode = Mode::train;
    auto params = model.parameters();
    auto state = AdamState::for_parameters(params);
    TrainReport report;

    std::vector<std::size_t> order(dataset.n_samples());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.iterations; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(cfg.seed, 0xe90c, epoch));
        shuffle_rng.shuffle(order);

        double weighted_loss = 0.0;
        std::size_t seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
            auto inputs = detail::pack_batch(dataset.inputs, order, begin, count, dataset.window,
                                             dataset.n_features());
            auto targets = detail::pack_batch(dataset.targets, order, begin, count, dataset.window,
                                              dataset.n_targets());
            Rng dropout_rng(derive_seed(cfg.seed, 0xd0, epoch * 1000003 + batch_index));

            ad::Tape tape;
            auto pred = model_forward(tape, inputs, model, &dropout_rng);
            auto loss = mae_loss(tape, pred, targets);
            const double loss_value = loss->data[0];
            if (!std::isfinite(loss_value))
                throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                    ", batch " + std::to_string(batch_index + 1));
            tape.backward(loss);
            adam_step(params, state, cfg);
            model.zero_grads();

            weighted_loss += loss_value * static_cast<double>(count);
            seen += count;
        }
        report.epoch_loss.push_back(weighted_loss / static_cast<double>(seen));
        report.epoch_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return report;
}

inline void write_train_report_csv(const TrainReport& report, std::ostream& out) {
    out << "epoch,mean_loss,seconds\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", report.epoch_loss[e]);
        out << (e + 1) << "," << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", report.epoch_seconds[e]);
        out << buf << "\n";
    }
}

}  // namespace aircast
