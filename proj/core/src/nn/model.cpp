#include "hetnet/nn/model.hpp"

#include "hetnet/errors.hpp"
#include "hetnet/random.hpp"
#include "hetnet/solvers.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetnet::nn {

std::string_view to_string(Architecture a) {
    switch (a) {
    case Architecture::cnn: return "cnn";
    case Architecture::dnn: return "dnn";
    case Architecture::custom: return "custom";
    }
    return "custom";
}

Architecture architecture_from_string(std::string_view s) {
    if (s == "cnn") return Architecture::cnn;
    if (s == "dnn") return Architecture::dnn;
    if (s == "custom") return Architecture::custom;
    throw ContractError("unknown architecture '" + std::string(s) + "'");
}

namespace {

LayerGeometry dense_geometry(Shape3 in, int out_features, bool relu, std::size_t& offset) {
    if (out_features < 1) throw ContractError("dense layer needs at least one output");
    LayerGeometry g;
    g.kind = LayerKind::dense;
    g.relu = relu;
    g.in = in;
    g.out = {out_features, 1, 1};
    g.weight_offset = offset;
    g.weight_count = in.size() * static_cast<std::size_t>(out_features);
    g.bias_offset = g.weight_offset + g.weight_count;
    g.bias_count = static_cast<std::size_t>(out_features);
    offset = g.bias_offset + g.bias_count;
    return g;
}

} // namespace

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
    if (spec_.input.channels < 1 || spec_.input.height < 1 || spec_.input.width < 1)
        throw ContractError("model input shape must be positive");
    if (spec_.class_outputs < 1 || spec_.power_outputs < 1) throw ContractError("model heads need at least one output");

    std::size_t offset = 0;
    Shape3 shape = spec_.input;
    bool flattened = false;
    for (const auto& layer : spec_.trunk) {
        if (const auto* conv = std::get_if<Conv2dSpec>(&layer)) {
            if (flattened) throw ContractError("convolution cannot follow a dense layer");
            if (conv->kernel < 1 || conv->kernel % 2 == 0) throw ContractError("convolution kernel must be odd");
            if (conv->out_channels < 1) throw ContractError("convolution needs at least one output channel");
            LayerGeometry g;
            g.kind = LayerKind::conv2d;
            g.relu = conv->relu;
            g.in = shape;
            g.out = {conv->out_channels, shape.height, shape.width};
            g.kernel = conv->kernel;
            g.weight_offset = offset;
            g.weight_count = static_cast<std::size_t>(conv->out_channels) * shape.channels * conv->kernel * conv->kernel;
            g.bias_offset = g.weight_offset + g.weight_count;
            g.bias_count = static_cast<std::size_t>(conv->out_channels);
            offset = g.bias_offset + g.bias_count;
            layers_.push_back(g);
            shape = g.out;
        } else {
            const auto& dense = std::get<DenseSpec>(layer);
            layers_.push_back(dense_geometry(shape, dense.out_features, dense.relu, offset));
            shape = layers_.back().out;
            flattened = true;
        }
    }
    layers_.push_back(dense_geometry(shape, spec_.class_outputs, false, offset));
    layers_.push_back(dense_geometry(shape, spec_.power_outputs, false, offset));
    params_.assign(offset, 0.0);
}

void Model::init_params(std::uint64_t seed) {
    Rng rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& g = layers_[i];
        const std::size_t fan_in =
            g.kind == LayerKind::conv2d ? static_cast<std::size_t>(g.in.channels) * g.kernel * g.kernel : g.in.size();
        const bool head = i >= trunk_size();
        const double limit = std::sqrt((head ? 3.0 : 6.0) / static_cast<double>(fan_in));
        for (std::size_t w = 0; w < g.weight_count; ++w) params_[g.weight_offset + w] = limit * (2.0 * uniform01(rng) - 1.0);
    }
}

std::size_t count_params(const Model& model) { return model.params().size(); }

Shape3 scenario_input_shape(const NetworkConfig& cfg) {
    return {1, cfg.n_bs() * cfg.n_subchannels, cfg.total_users()};
}

namespace {

ModelSpec scenario_spec(const NetworkConfig& cfg, Architecture arch) {
    cfg.validate();
    ModelSpec spec;
    spec.arch = arch;
    spec.input = scenario_input_shape(cfg);
    spec.class_outputs = static_cast<int>(solvers::AssignmentCatalog(cfg).size());
    spec.power_outputs = cfg.n_bs() * cfg.n_subchannels;
    return spec;
}

} // namespace

Model build_dnn(const NetworkConfig& cfg) {
    auto spec = scenario_spec(cfg, Architecture::dnn);
    spec.trunk = {DenseSpec{256}, DenseSpec{256}, DenseSpec{128}, DenseSpec{128}};
    Model model(std::move(spec));
    model.scenario = cfg;
    return model;
}

Model build_cnn(const NetworkConfig& cfg, int kernel) {
    auto spec = scenario_spec(cfg, Architecture::cnn);
    spec.trunk = {Conv2dSpec{16, kernel}, Conv2dSpec{16, kernel}, Conv2dSpec{32, kernel}, Conv2dSpec{32, kernel},
                  DenseSpec{256},         DenseSpec{256},         DenseSpec{128}};
    Model model(std::move(spec));
    model.scenario = cfg;
    return model;
}

namespace kernels {

namespace {

void im2col(const LayerGeometry& g, const double* in, std::vector<double>& col) {
    const int C = g.in.channels, H = g.in.height, W = g.in.width, k = g.kernel, pad = g.kernel / 2;
    const std::size_t HW = static_cast<std::size_t>(H) * W;
    col.assign(static_cast<std::size_t>(C) * k * k * HW, 0.0);
    std::size_t j = 0;
    for (int c = 0; c < C; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx, ++j) {
                double* row = col.data() + j * HW;
                const int dy = ky - pad, dx = kx - pad;
                for (int y = std::max(0, -dy); y < std::min(H, H - dy); ++y)
                    for (int x = std::max(0, -dx); x < std::min(W, W - dx); ++x)
                        row[y * W + x] = in[(static_cast<std::size_t>(c) * H + (y + dy)) * W + (x + dx)];
            }
}

void col2im_add(const LayerGeometry& g, const std::vector<double>& dcol, double* d_in) {
    const int C = g.in.channels, H = g.in.height, W = g.in.width, k = g.kernel, pad = g.kernel / 2;
    const std::size_t HW = static_cast<std::size_t>(H) * W;
    std::size_t j = 0;
    for (int c = 0; c < C; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx, ++j) {
                const double* row = dcol.data() + j * HW;
                const int dy = ky - pad, dx = kx - pad;
                for (int y = std::max(0, -dy); y < std::min(H, H - dy); ++y)
                    for (int x = std::max(0, -dx); x < std::min(W, W - dx); ++x)
                        d_in[(static_cast<std::size_t>(c) * H + (y + dy)) * W + (x + dx)] += row[y * W + x];
            }
}

} // namespace

void forward_layer(const LayerGeometry& g, std::span<const double> params, const double* in, double* out,
                   std::size_t batch, std::vector<double>& col) {
    const double* w = params.data() + g.weight_offset;
    const double* bias = params.data() + g.bias_offset;
    const std::size_t in_size = g.in.size();
    const std::size_t out_size = g.out.size();

    if (g.kind == LayerKind::dense) {
        const std::size_t O = out_size;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = in + b * in_size;
            double* y = out + b * O;
            std::copy(bias, bias + O, y);
            for (std::size_t i = 0; i < in_size; ++i) {
                if (x[i] == 0.0) continue;
                axpy(x[i], w + i * O, y, O);
            }
        }
    } else {
        const std::size_t F = static_cast<std::size_t>(g.out.channels);
        const std::size_t HW = static_cast<std::size_t>(g.out.height) * g.out.width;
        const std::size_t J = static_cast<std::size_t>(g.in.channels) * g.kernel * g.kernel;
        for (std::size_t b = 0; b < batch; ++b) {
            im2col(g, in + b * in_size, col);
            double* y = out + b * out_size;
            for (std::size_t f = 0; f < F; ++f) {
                double* yf = y + f * HW;
                std::fill(yf, yf + HW, bias[f]);
                for (std::size_t j = 0; j < J; ++j) axpy(w[f * J + j], col.data() + j * HW, yf, HW);
            }
        }
    }
    if (g.relu)
        for (std::size_t i = 0; i < batch * out_size; ++i) out[i] = std::max(0.0, out[i]);
}

void backward_layer(const LayerGeometry& g, std::span<const double> params, const double* in, const double* d_out,
                    double* d_in, std::size_t batch, std::span<double> grad, std::vector<double>& col) {
    const double* w = params.data() + g.weight_offset;
    double* dw = grad.data() + g.weight_offset;
    double* db = grad.data() + g.bias_offset;
    const std::size_t in_size = g.in.size();
    const std::size_t out_size = g.out.size();

    if (g.kind == LayerKind::dense) {
        const std::size_t O = out_size;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = in + b * in_size;
            const double* dy = d_out + b * O;
            for (std::size_t o = 0; o < O; ++o) db[o] += dy[o];
            for (std::size_t i = 0; i < in_size; ++i) {
                if (x[i] != 0.0) axpy(x[i], dy, dw + i * O, O);
                if (d_in) d_in[b * in_size + i] = dot(w + i * O, dy, O);
            }
        }
    } else {
        const std::size_t F = static_cast<std::size_t>(g.out.channels);
        const std::size_t HW = static_cast<std::size_t>(g.out.height) * g.out.width;
        const std::size_t J = static_cast<std::size_t>(g.in.channels) * g.kernel * g.kernel;
        std::vector<double> dcol;
        for (std::size_t b = 0; b < batch; ++b) {
            im2col(g, in + b * in_size, col);
            const double* dy = d_out + b * out_size;
            for (std::size_t f = 0; f < F; ++f) {
                const double* dyf = dy + f * HW;
                double s = 0.0;
                for (std::size_t p = 0; p < HW; ++p) s += dyf[p];
                db[f] += s;
                for (std::size_t j = 0; j < J; ++j) dw[f * J + j] += dot(dyf, col.data() + j * HW, HW);
            }
            if (d_in) {
                dcol.assign(J * HW, 0.0);
                for (std::size_t f = 0; f < F; ++f)
                    for (std::size_t j = 0; j < J; ++j) axpy(w[f * J + j], dy + f * HW, dcol.data() + j * HW, HW);
                double* dx = d_in + b * in_size;
                std::fill(dx, dx + in_size, 0.0);
                col2im_add(g, dcol, dx);
            }
        }
    }
}

void softmax_rows(const std::vector<double>& logits, std::vector<double>& probs, std::size_t rows, std::size_t cols) {
    probs.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* z = logits.data() + r * cols;
        double* p = probs.data() + r * cols;
        const double zmax = *std::max_element(z, z + cols);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            p[c] = std::exp(z[c] - zmax);
            sum += p[c];
        }
        for (std::size_t c = 0; c < cols; ++c) p[c] /= sum;
    }
}

void run_forward(const Model& model, std::span<const double> inputs, std::size_t batch, Workspace& ws) {
    const auto& layers = model.layers();
    const std::size_t in_size = model.spec().input.size();
    if (inputs.size() != batch * in_size) throw ContractError("input batch size does not match model input shape");

    ws.batch = batch;
    ws.acts.resize(model.trunk_size() + 1);
    ws.acts[0].assign(inputs.begin(), inputs.end());
    for (std::size_t i = 0; i < model.trunk_size(); ++i) {
        ws.acts[i + 1].resize(batch * layers[i].out.size());
        forward_layer(layers[i], model.params(), ws.acts[i].data(), ws.acts[i + 1].data(), batch, ws.col);
    }
    const auto& trunk_out = ws.acts.back();
    const auto& ch = model.class_head();
    const auto& ph = model.power_head();
    ws.logits.resize(batch * ch.out.size());
    ws.power.resize(batch * ph.out.size());
    forward_layer(ch, model.params(), trunk_out.data(), ws.logits.data(), batch, ws.col);
    forward_layer(ph, model.params(), trunk_out.data(), ws.power.data(), batch, ws.col);
    softmax_rows(ws.logits, ws.probs, batch, ch.out.size());
}

} // namespace kernels

std::vector<ModelOutput> forward(const Model& model, std::span<const double> inputs, std::size_t batch) {
    kernels::Workspace ws;
    kernels::run_forward(model, inputs, batch, ws);
    const std::size_t A = static_cast<std::size_t>(model.spec().class_outputs);
    const std::size_t P = static_cast<std::size_t>(model.spec().power_outputs);
    std::vector<ModelOutput> out(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        out[b].class_probs.assign(ws.probs.begin() + static_cast<std::ptrdiff_t>(b * A),
                                  ws.probs.begin() + static_cast<std::ptrdiff_t>((b + 1) * A));
        out[b].power_norm.assign(ws.power.begin() + static_cast<std::ptrdiff_t>(b * P),
                                 ws.power.begin() + static_cast<std::ptrdiff_t>((b + 1) * P));
    }
    return out;
}

} // namespace hetnet::nn
