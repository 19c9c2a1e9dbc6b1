#pragma once

#include "hetnet/dataset.hpp"
#include "hetnet/nn/model.hpp"
#include "hetnet/random.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hetnet::nn {

/// Supervision for one sample: the oracle's assignment class and its powers
/// normalized per BS by P_max.
struct Target {
    std::size_t class_index = 0;
    std::vector<double> power_norm;
};

struct LossWeights {
    double crossentropy = 1.0;
    double mse = 1.0;
};

/// Clamp inside the crossentropy logarithm.
inline constexpr double kLogClamp = 1e-12;

/// w_ce * -log(p_c + delta) + w_mse * sum_i (t_i - y_i)^2, natural log.
double loss_total(const ModelOutput& output, const Target& target, const LossWeights& weights = {});

struct LossAndGradient {
    double loss = 0.0;           ///< mean over the batch
    std::vector<double> grad;    ///< d(mean loss)/d(params)
};

/// Exact gradient of the mean batch loss by backpropagation.
LossAndGradient backward(const Model& model, std::span<const double> inputs, std::span<const Target> targets,
                         const LossWeights& weights = {});

struct TrainingConfig {
    int epochs = 50;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 1;
    LossWeights loss_weights;
    double validation_fraction = 0.1;

    /// Throws ContractError when a field is out of range.
    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainingConfig& tc);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;  ///< NaN when the validation split is empty
};

/// Preprocessed network inputs and targets for a whole dataset.
struct TrainingSet {
    std::size_t input_size = 0;
    std::vector<double> inputs;
    std::vector<Target> targets;

    std::size_t size() const { return targets.size(); }
};

TrainingSet make_training_set(const Dataset& ds, const NormalizationStats& stats);

/// Mini-batch Adam on the dataset, standardized with the dataset's own
/// statistics (stored into the model). Seeded shuffling makes the run
/// deterministic. Throws ContractError on an empty dataset.
std::vector<EpochStats> train(Model& model, const Dataset& ds, const TrainingConfig& tc,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
};

/// Compares backward() with central differences of the mean loss at step h.
/// Relative error per parameter is |a - f| / max(|a|, |f|, floor).
GradCheckResult gradient_check(const Model& model, std::span<const double> inputs, std::span<const Target> targets,
                               double h = 1e-5, double floor = 1e-6, const LossWeights& weights = {});

/// Small random conv + dense model (at most 1000 parameters) with random
/// parameters, for gradient checking.
Model random_small_model(Rng& rng);

} // namespace hetnet::nn
