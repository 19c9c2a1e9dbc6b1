#pragma once

// Layer kernels and the forward workspace shared by inference and training.

#include "hetnet/nn/model.hpp"

#include <span>
#include <vector>

namespace hetnet::nn::kernels {

/// Four-accumulator dot product. The fixed association order keeps results
/// deterministic while letting the compiler vectorize.
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

inline void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

/// Activations of one batch: acts[0] is the input, acts[i + 1] the output of
/// trunk layer i (after ReLU). Head outputs are kept separately.
struct Workspace {
    std::size_t batch = 0;
    std::vector<std::vector<double>> acts;
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> power;
    std::vector<double> col;  ///< im2col scratch
};

void forward_layer(const LayerGeometry& g, std::span<const double> params, const double* in, double* out,
                   std::size_t batch, std::vector<double>& col);

/// d_in may be null for the first layer. `d_out` must already include the
/// ReLU mask. Accumulates into `grad`.
void backward_layer(const LayerGeometry& g, std::span<const double> params, const double* in, const double* d_out,
                    double* d_in, std::size_t batch, std::span<double> grad, std::vector<double>& col);

void run_forward(const Model& model, std::span<const double> inputs, std::size_t batch, Workspace& ws);

void softmax_rows(const std::vector<double>& logits, std::vector<double>& probs, std::size_t rows, std::size_t cols);

} // namespace hetnet::nn::kernels
