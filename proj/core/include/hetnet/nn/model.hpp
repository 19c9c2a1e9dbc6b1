#pragma once

#include "hetnet/dataset.hpp"
#include "hetnet/system_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace hetnet::nn {

enum class Architecture { cnn, dnn, custom };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view s);

struct Shape3 {
    int channels = 1;
    int height = 1;
    int width = 1;

    std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
    bool operator==(const Shape3&) const = default;
};

/// Stride-1 convolution with zero "same" padding; the kernel must be odd.
struct Conv2dSpec {
    int out_channels = 1;
    int kernel = 3;
    bool relu = true;

    bool operator==(const Conv2dSpec&) const = default;
};

/// Fully connected layer. Flattens a preceding feature map in (c, y, x) order.
struct DenseSpec {
    int out_features = 1;
    bool relu = true;

    bool operator==(const DenseSpec&) const = default;
};

using LayerSpec = std::variant<Conv2dSpec, DenseSpec>;

/// A shared trunk followed by two linear heads on the trunk output: a class
/// head (softmax applied in forward) and a power regression head.
struct ModelSpec {
    Architecture arch = Architecture::custom;
    Shape3 input;
    std::vector<LayerSpec> trunk;
    int class_outputs = 1;
    int power_outputs = 1;

    bool operator==(const ModelSpec&) const = default;
};

enum class LayerKind { conv2d, dense };

/// Resolved layer with its slice of the flat parameter vector.
/// Conv weights are laid out [out][in][ky][kx]; dense weights [in][out].
struct LayerGeometry {
    LayerKind kind = LayerKind::dense;
    bool relu = false;
    Shape3 in;
    Shape3 out;
    int kernel = 0;
    std::size_t weight_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_offset = 0;
    std::size_t bias_count = 0;
};

class Model {
public:
    explicit Model(ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }
    /// Trunk layers followed by the class head and the power head.
    const std::vector<LayerGeometry>& layers() const { return layers_; }
    const LayerGeometry& class_head() const { return layers_[layers_.size() - 2]; }
    const LayerGeometry& power_head() const { return layers_.back(); }
    std::size_t trunk_size() const { return layers_.size() - 2; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    /// He-uniform weights (LeCun-uniform for the heads), zero biases.
    void init_params(std::uint64_t seed);

    /// Input standardization used at training time.
    NormalizationStats normalization;
    /// Power grid of the training labels, 0 when unknown.
    int grid_levels = 0;
    /// Scenario the model was built for, when known.
    std::optional<NetworkConfig> scenario;

    bool operator==(const Model& other) const {
        return spec_ == other.spec_ && params_ == other.params_ && normalization == other.normalization &&
               grid_levels == other.grid_levels && scenario == other.scenario;
    }

private:
    ModelSpec spec_;
    std::vector<LayerGeometry> layers_;
    std::vector<double> params_;
};

std::size_t count_params(const Model& model);

/// Input shape for a scenario: one channel of (N*K) x (sum U_n).
Shape3 scenario_input_shape(const NetworkConfig& cfg);

/// Dense 256-256-128-128 trunk with ReLU.
Model build_dnn(const NetworkConfig& cfg);

/// Four same-padded convolutions (16, 16, 32, 32 channels) then Dense 256-256-128.
Model build_cnn(const NetworkConfig& cfg, int kernel = 3);

struct ModelOutput {
    std::vector<double> class_probs;
    std::vector<double> power_norm;
};

/// Batched forward pass. `inputs` holds `batch` rows of spec().input.size() values.
std::vector<ModelOutput> forward(const Model& model, std::span<const double> inputs, std::size_t batch);

inline ModelOutput forward(const Model& model, std::span<const double> input) {
    return std::move(forward(model, input, 1).front());
}

} // namespace hetnet::nn
