#include "hetnet/nn/training.hpp"

#include "hetnet/errors.hpp"
#include "hetnet/nn/allocator.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hetnet::nn {

double loss_total(const ModelOutput& output, const Target& target, const LossWeights& weights) {
    if (target.class_index >= output.class_probs.size()) throw ContractError("target class outside the class head");
    if (target.power_norm.size() != output.power_norm.size()) throw ContractError("power target width mismatch");
    const double ce = -std::log(output.class_probs[target.class_index] + kLogClamp);
    double mse = 0.0;
    for (std::size_t i = 0; i < target.power_norm.size(); ++i) {
        const double d = target.power_norm[i] - output.power_norm[i];
        mse += d * d;
    }
    return weights.crossentropy * ce + weights.mse * mse;
}

namespace {

void check_targets(const Model& model, std::span<const Target> targets) {
    for (const auto& t : targets) {
        if (t.class_index >= static_cast<std::size_t>(model.spec().class_outputs))
            throw ContractError("target class outside the class head");
        if (t.power_norm.size() != static_cast<std::size_t>(model.spec().power_outputs))
            throw ContractError("power target width mismatch");
    }
}

// Loss of a forwarded batch and, when `grad` is given, its full gradient.
double loss_and_backprop(const Model& model, kernels::Workspace& ws, std::span<const Target> targets,
                         const LossWeights& weights, std::vector<double>* grad) {
    const std::size_t B = ws.batch;
    const std::size_t A = static_cast<std::size_t>(model.spec().class_outputs);
    const std::size_t P = static_cast<std::size_t>(model.spec().power_outputs);
    const double scale = 1.0 / static_cast<double>(B);

    double loss = 0.0;
    std::vector<double> d_logits(B * A);
    std::vector<double> d_power(B * P);
    for (std::size_t b = 0; b < B; ++b) {
        const auto& t = targets[b];
        const double* prob = ws.probs.data() + b * A;
        const double* pw = ws.power.data() + b * P;
        const double pc = prob[t.class_index];
        double mse = 0.0;
        for (std::size_t i = 0; i < P; ++i) {
            const double d = t.power_norm[i] - pw[i];
            mse += d * d;
            d_power[b * P + i] = -2.0 * weights.mse * d * scale;
        }
        loss += weights.crossentropy * -std::log(pc + kLogClamp) + weights.mse * mse;
        // d/dz_j of -log(p_c + delta) = -p_c (1[j = c] - p_j) / (p_c + delta)
        const double coeff = -weights.crossentropy * pc / (pc + kLogClamp) * scale;
        for (std::size_t j = 0; j < A; ++j)
            d_logits[b * A + j] = coeff * ((j == t.class_index ? 1.0 : 0.0) - prob[j]);
    }
    loss *= scale;
    if (!grad) return loss;

    grad->assign(model.params().size(), 0.0);
    const auto& layers = model.layers();
    const std::size_t trunk = model.trunk_size();
    const auto& trunk_out = ws.acts.back();
    const std::size_t trunk_width = model.class_head().in.size();

    std::vector<double> d_act(B * trunk_width);
    std::vector<double> d_tmp(B * trunk_width);
    kernels::backward_layer(model.class_head(), model.params(), trunk_out.data(), d_logits.data(), d_act.data(), B, *grad,
                            ws.col);
    kernels::backward_layer(model.power_head(), model.params(), trunk_out.data(), d_power.data(), d_tmp.data(), B, *grad,
                            ws.col);
    for (std::size_t i = 0; i < d_act.size(); ++i) d_act[i] += d_tmp[i];

    for (std::size_t li = trunk; li-- > 0;) {
        const auto& g = layers[li];
        const auto& out = ws.acts[li + 1];
        if (g.relu)
            for (std::size_t i = 0; i < d_act.size(); ++i)
                if (!(out[i] > 0.0)) d_act[i] = 0.0;
        std::vector<double> d_in;
        if (li > 0) d_in.resize(B * g.in.size());
        kernels::backward_layer(g, model.params(), ws.acts[li].data(), d_act.data(), li > 0 ? d_in.data() : nullptr, B,
                                *grad, ws.col);
        d_act = std::move(d_in);
    }
    return loss;
}

} // namespace

LossAndGradient backward(const Model& model, std::span<const double> inputs, std::span<const Target> targets,
                         const LossWeights& weights) {
    if (targets.empty()) throw ContractError("backward needs a nonempty batch");
    check_targets(model, targets);
    kernels::Workspace ws;
    kernels::run_forward(model, inputs, targets.size(), ws);
    LossAndGradient out;
    out.loss = loss_and_backprop(model, ws, targets, weights, &out.grad);
    return out;
}

void TrainingConfig::validate() const {
    if (epochs < 1) throw ContractError("epochs must be >= 1");
    if (batch_size < 1) throw ContractError("batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ContractError("Adam betas must lie in (0, 1)");
    if (!(adam_epsilon > 0.0)) throw ContractError("Adam epsilon must be positive");
    if (!(loss_weights.crossentropy > 0.0) || !(loss_weights.mse > 0.0)) throw ContractError("loss weights must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw ContractError("validation fraction must lie in [0, 1)");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainingConfig& tc) {
    if (grads.size() != params.size()) throw ContractError("gradient size does not match parameters");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.step = 0;
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = tc.beta1 * state.m[i] + (1.0 - tc.beta1) * g;
        state.v[i] = tc.beta2 * state.v[i] + (1.0 - tc.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= tc.learning_rate * m_hat / (std::sqrt(v_hat) + tc.adam_epsilon);
    }
}

TrainingSet make_training_set(const Dataset& ds, const NormalizationStats& stats) {
    const auto& cfg = ds.metadata.config;
    TrainingSet set;
    set.input_size = scenario_input_shape(cfg).size();
    set.inputs.reserve(ds.samples.size() * set.input_size);
    set.targets.reserve(ds.samples.size());
    for (const auto& s : ds.samples) {
        const auto x = preprocess_input(s.channel, stats);
        set.inputs.insert(set.inputs.end(), x.begin(), x.end());
        set.targets.push_back({s.assignment_class, normalize_power(s.power_w, cfg)});
    }
    return set;
}

namespace {

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
}

void gather(const TrainingSet& set, std::span<const std::size_t> rows, std::vector<double>& inputs,
            std::vector<Target>& targets) {
    inputs.resize(rows.size() * set.input_size);
    targets.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(set.inputs.begin() + static_cast<std::ptrdiff_t>(rows[r] * set.input_size), set.input_size,
                    inputs.begin() + static_cast<std::ptrdiff_t>(r * set.input_size));
        targets[r] = set.targets[rows[r]];
    }
}

} // namespace

std::vector<EpochStats> train(Model& model, const Dataset& ds, const TrainingConfig& tc,
                              const std::function<void(const EpochStats&)>& on_epoch) {
    tc.validate();
    if (ds.samples.empty()) throw ContractError("cannot train on an empty dataset");
    if (!(model.spec().input == scenario_input_shape(ds.metadata.config)))
        throw ContractError("model input shape does not match the dataset scenario");

    const auto stats = ds.metadata.normalization;
    const TrainingSet set = make_training_set(ds, stats);
    check_targets(model, set.targets);

    Rng rng(tc.seed);
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    std::size_t n_val = static_cast<std::size_t>(std::floor(tc.validation_fraction * static_cast<double>(set.size())));
    n_val = std::min(n_val, set.size() - 1);
    std::vector<std::size_t> train_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    const std::vector<std::size_t> val_rows(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());

    model.normalization = stats;
    model.grid_levels = ds.metadata.grid_levels;
    model.scenario = ds.metadata.config;

    AdamState adam(model.params().size());
    kernels::Workspace ws;
    std::vector<double> batch_inputs;
    std::vector<Target> batch_targets;
    std::vector<double> grad;
    std::vector<EpochStats> history;

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        shuffle(train_rows, rng);
        double total = 0.0;
        for (std::size_t start = 0; start < train_rows.size(); start += static_cast<std::size_t>(tc.batch_size)) {
            const std::size_t end = std::min(train_rows.size(), start + static_cast<std::size_t>(tc.batch_size));
            gather(set, std::span(train_rows).subspan(start, end - start), batch_inputs, batch_targets);
            kernels::run_forward(model, batch_inputs, end - start, ws);
            const double loss = loss_and_backprop(model, ws, batch_targets, tc.loss_weights, &grad);
            total += loss * static_cast<double>(end - start);
            adam_step(model.params(), grad, adam, tc);
        }

        EpochStats stats_row{epoch, total / static_cast<double>(train_rows.size()),
                             std::numeric_limits<double>::quiet_NaN()};
        if (!val_rows.empty()) {
            double val_total = 0.0;
            for (std::size_t start = 0; start < val_rows.size(); start += static_cast<std::size_t>(tc.batch_size)) {
                const std::size_t end = std::min(val_rows.size(), start + static_cast<std::size_t>(tc.batch_size));
                gather(set, std::span(val_rows).subspan(start, end - start), batch_inputs, batch_targets);
                kernels::run_forward(model, batch_inputs, end - start, ws);
                val_total += loss_and_backprop(model, ws, batch_targets, tc.loss_weights, nullptr) *
                             static_cast<double>(end - start);
            }
            stats_row.validation_loss = val_total / static_cast<double>(val_rows.size());
        }
        history.push_back(stats_row);
        if (on_epoch) on_epoch(stats_row);
    }
    return history;
}

GradCheckResult gradient_check(const Model& model, std::span<const double> inputs, std::span<const Target> targets,
                               double h, double floor, const LossWeights& weights) {
    const auto analytic = backward(model, inputs, targets, weights).grad;

    // Central differences of the mean loss, evaluated through forward() and
    // loss_total() only.
    auto mean_loss = [&](const Model& m) {
        const auto outputs = forward(m, inputs, targets.size());
        double sum = 0.0;
        for (std::size_t b = 0; b < targets.size(); ++b) sum += loss_total(outputs[b], targets[b], weights);
        return sum / static_cast<double>(targets.size());
    };

    Model probe = model;
    GradCheckResult result;
    for (std::size_t i = 0; i < probe.params().size(); ++i) {
        const double saved = probe.params()[i];
        probe.params()[i] = saved + h;
        const double up = mean_loss(probe);
        probe.params()[i] = saved - h;
        const double down = mean_loss(probe);
        probe.params()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
        ++result.checked;
    }
    return result;
}

Model random_small_model(Rng& rng) {
    ModelSpec spec;
    spec.arch = Architecture::custom;
    const int side = 3 + static_cast<int>(uniform_index(rng, 2));
    spec.input = {1, side, side + static_cast<int>(uniform_index(rng, 2))};
    const int c1 = 2 + static_cast<int>(uniform_index(rng, 2));
    const int c2 = 2 + static_cast<int>(uniform_index(rng, 2));
    spec.trunk = {Conv2dSpec{c1, 3}, Conv2dSpec{c2, 3}, DenseSpec{4 + static_cast<int>(uniform_index(rng, 5))}};
    spec.class_outputs = 2 + static_cast<int>(uniform_index(rng, 7));
    spec.power_outputs = 1 + static_cast<int>(uniform_index(rng, 6));
    Model model(std::move(spec));
    // Standard init keeps the loss O(1); U(-0.8, 0.8) weights saturate the
    // softmax and push central differences into roundoff. Nonzero biases keep
    // ReLU units off their kink at zero input.
    model.init_params(rng());
    for (const auto& layer : model.layers())
        for (std::size_t i = 0; i < layer.bias_count; ++i)
            model.params()[layer.bias_offset + i] = 0.2 * (2.0 * uniform01(rng) - 1.0);
    return model;
}

} // namespace hetnet::nn
