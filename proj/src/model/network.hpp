#pragma once

// Forward and backward passes for the four classifier families over a flat
// parameter vector. Internal to the model library.

#include <cstddef>
#include <vector>

#include "uawr/model.hpp"
#include "uawr/rng.hpp"

namespace uawr {

/// Per-call scratch buffers. Sized lazily; reuse across calls avoids churn.
struct Workspace {
    std::size_t length = 0;
    std::vector<double> emb;                 // length x D
    std::vector<double> pooled;              // D
    std::vector<std::vector<double>> act;    // per hidden layer
    std::vector<double> top;                 // input of the output layer
    std::vector<std::size_t> pool_arg;       // CONV_1D max-pool argmax per unit
    std::vector<double> window;              // CONV_1D concatenated window
    // backward scratch
    std::vector<double> d_top;
    std::vector<double> d_a;
    std::vector<double> d_b;
    std::vector<double> d_pre;
    std::vector<double> d_carry;
    std::vector<double> d_window;
};

/// Receives embedding-row gradients so callers can track touched rows.
struct EmbeddingGradSink {
    double* grad = nullptr;
    std::vector<int>* touched = nullptr;
    std::vector<char>* touched_flag = nullptr;
};

class Network {
public:
    Network(Architecture arch, int depth, std::size_t vocab, std::size_t emb_dim,
            std::size_t hidden, std::size_t labels);

    std::size_t parameter_count() const { return total_; }
    std::size_t embedding_size() const { return vocab_ * emb_dim_; }
    std::size_t output_weight_offset() const { return out_w_; }
    std::size_t output_in() const { return out_in_; }
    std::size_t output_bias_offset() const { return out_b_; }

    /// Random embeddings in (-0.1, 0.1), Glorot-uniform hidden weights, zero
    /// biases and a zero output layer.
    void initialize(std::vector<double>& params, Rng& rng) const;

    void forward(const double* params, const int* ids, const int* offsets, std::size_t length,
                 Workspace& ws, double* logits) const;

    /// Accumulates d(loss)/d(params) given d(loss)/d(logits); `ws` must hold
    /// the matching forward pass. Embedding gradients go through `sink`.
    void backward(const double* params, const int* ids, const int* offsets, std::size_t length,
                  Workspace& ws, const double* d_logits, double* grad,
                  const EmbeddingGradSink& sink) const;

private:
    struct Layer {
        std::size_t in = 0;
        std::size_t w = 0;  // input weights (H x in, or H x 3in for conv)
        std::size_t u = 0;  // recurrent weights (H x H)
        std::size_t b = 0;  // bias (H)
    };

    void embed(const double* params, const int* ids, const int* offsets, std::size_t length,
               Workspace& ws) const;

    Architecture arch_;
    std::size_t vocab_, emb_dim_, hidden_, labels_;
    std::vector<Layer> layers_;
    std::size_t out_in_ = 0, out_w_ = 0, out_b_ = 0, total_ = 0;
};

}  // namespace uawr
