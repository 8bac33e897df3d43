#include "network.hpp"

#include <algorithm>
#include <cmath>

#include "uawr/simd/kernels.hpp"

namespace uawr {

namespace {

void zero(std::vector<double>& v, std::size_t n) {
    v.assign(n, 0.0);
}

}  // namespace

Network::Network(Architecture arch, int depth, std::size_t vocab, std::size_t emb_dim,
                 std::size_t hidden, std::size_t labels)
    : arch_(arch), vocab_(vocab), emb_dim_(emb_dim), hidden_(hidden), labels_(labels) {
    std::size_t off = vocab * emb_dim;
    const auto n_layers = static_cast<std::size_t>(arch == Architecture::kLinearBow ? depth - 1 : depth);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.in = l == 0 ? emb_dim : hidden;
        layer.w = off;
        off += hidden * layer.in * (arch == Architecture::kConv1d ? 3 : 1);
        if (arch == Architecture::kRecurrent) {
            layer.u = off;
            off += hidden * hidden;
        }
        if (arch != Architecture::kLinearBow) {
            layer.b = off;
            off += hidden;
        }
        layers_.push_back(layer);
    }
    out_in_ = layers_.empty() ? emb_dim : hidden;
    out_w_ = off;
    off += labels * out_in_;
    out_b_ = off;
    off += labels;
    total_ = off;
}

void Network::initialize(std::vector<double>& params, Rng& rng) const {
    params.assign(total_, 0.0);
    for (std::size_t i = 0; i < vocab_ * emb_dim_; ++i) params[i] = rng.uniform(-0.1, 0.1);
    for (const auto& layer : layers_) {
        const std::size_t fan_in = layer.in * (arch_ == Architecture::kConv1d ? 3 : 1);
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + hidden_));
        for (std::size_t i = 0; i < hidden_ * fan_in; ++i) params[layer.w + i] = rng.uniform(-s, s);
        if (arch_ == Architecture::kRecurrent) {
            const double su = std::sqrt(6.0 / static_cast<double>(2 * hidden_));
            for (std::size_t i = 0; i < hidden_ * hidden_; ++i) params[layer.u + i] = rng.uniform(-su, su);
        }
    }
}

void Network::embed(const double* params, const int* ids, const int* offsets, std::size_t length,
                    Workspace& ws) const {
    const auto& k = simd::kernels();
    ws.length = length;
    zero(ws.emb, length * emb_dim_);
    for (std::size_t t = 0; t < length; ++t) {
        const int begin = offsets[t];
        const int end = offsets[t + 1];
        const double scale = 1.0 / static_cast<double>(end - begin);
        double* e = ws.emb.data() + t * emb_dim_;
        for (int f = begin; f < end; ++f) {
            k.axpy(scale, params + static_cast<std::size_t>(ids[f]) * emb_dim_, e, emb_dim_);
        }
    }
}

void Network::forward(const double* params, const int* ids, const int* offsets, std::size_t length,
                      Workspace& ws, double* logits) const {
    const auto& k = simd::kernels();
    embed(params, ids, offsets, length, ws);
    const std::size_t L = length;
    const std::size_t D = emb_dim_;
    const std::size_t H = hidden_;
    ws.act.resize(layers_.size());

    switch (arch_) {
        case Architecture::kLinearBow: {
            zero(ws.pooled, D);
            for (std::size_t t = 0; t < L; ++t) k.axpy(1.0, ws.emb.data() + t * D, ws.pooled.data(), D);
            const double* in = ws.pooled.data();
            for (std::size_t l = 0; l < layers_.size(); ++l) {
                ws.act[l].resize(H);
                k.gemv(params + layers_[l].w, in, ws.act[l].data(), H, layers_[l].in, false);
                in = ws.act[l].data();
            }
            ws.top.assign(in, in + out_in_);
            break;
        }
        case Architecture::kAvgEmbMlp: {
            zero(ws.pooled, D);
            for (std::size_t t = 0; t < L; ++t) {
                k.axpy(1.0 / static_cast<double>(L), ws.emb.data() + t * D, ws.pooled.data(), D);
            }
            const double* in = ws.pooled.data();
            for (std::size_t l = 0; l < layers_.size(); ++l) {
                auto& a = ws.act[l];
                a.assign(params + layers_[l].b, params + layers_[l].b + H);
                k.gemv(params + layers_[l].w, in, a.data(), H, layers_[l].in, true);
                for (double& v : a) v = std::tanh(v);
                in = a.data();
            }
            ws.top.assign(in, in + H);
            break;
        }
        case Architecture::kConv1d: {
            const double* in = ws.emb.data();
            for (std::size_t l = 0; l < layers_.size(); ++l) {
                const std::size_t C = layers_[l].in;
                auto& a = ws.act[l];
                a.resize(L * H);
                ws.window.resize(3 * C);
                for (std::size_t t = 0; t < L; ++t) {
                    std::fill(ws.window.begin(), ws.window.end(), 0.0);
                    if (t > 0) std::copy_n(in + (t - 1) * C, C, ws.window.begin());
                    std::copy_n(in + t * C, C, ws.window.begin() + static_cast<std::ptrdiff_t>(C));
                    if (t + 1 < L) std::copy_n(in + (t + 1) * C, C, ws.window.begin() + static_cast<std::ptrdiff_t>(2 * C));
                    double* y = a.data() + t * H;
                    std::copy_n(params + layers_[l].b, H, y);
                    k.gemv(params + layers_[l].w, ws.window.data(), y, H, 3 * C, true);
                    for (std::size_t j = 0; j < H; ++j) y[j] = std::tanh(y[j]);
                }
                in = a.data();
            }
            ws.top.assign(H, 0.0);
            ws.pool_arg.assign(H, 0);
            for (std::size_t j = 0; j < H; ++j) {
                double best = in[j];
                for (std::size_t t = 1; t < L; ++t) {
                    if (in[t * H + j] > best) {
                        best = in[t * H + j];
                        ws.pool_arg[j] = t;
                    }
                }
                ws.top[j] = best;
            }
            break;
        }
        case Architecture::kRecurrent: {
            const double* in = ws.emb.data();
            for (std::size_t l = 0; l < layers_.size(); ++l) {
                const std::size_t C = layers_[l].in;
                auto& a = ws.act[l];
                a.assign((L + 1) * H, 0.0);
                for (std::size_t t = 0; t < L; ++t) {
                    double* h = a.data() + (t + 1) * H;
                    std::copy_n(params + layers_[l].b, H, h);
                    k.gemv(params + layers_[l].w, in + t * C, h, H, C, true);
                    k.gemv(params + layers_[l].u, a.data() + t * H, h, H, H, true);
                    for (std::size_t j = 0; j < H; ++j) h[j] = std::tanh(h[j]);
                }
                in = a.data() + H;  // rows 1..L are the layer outputs
            }
            const auto& last = ws.act.back();
            ws.top.assign(last.begin() + static_cast<std::ptrdiff_t>(L * H), last.end());
            break;
        }
    }

    std::copy_n(params + out_b_, labels_, logits);
    k.gemv(params + out_w_, ws.top.data(), logits, labels_, out_in_, true);
}

void Network::backward(const double* params, const int* ids, const int* offsets, std::size_t length,
                       Workspace& ws, const double* d_logits, double* grad,
                       const EmbeddingGradSink& sink) const {
    const auto& k = simd::kernels();
    const std::size_t L = length;
    const std::size_t D = emb_dim_;
    const std::size_t H = hidden_;

    // output layer
    k.ger(1.0, d_logits, ws.top.data(), grad + out_w_, labels_, out_in_);
    for (std::size_t z = 0; z < labels_; ++z) grad[out_b_ + z] += d_logits[z];
    zero(ws.d_top, out_in_);
    k.gemv_t(params + out_w_, d_logits, ws.d_top.data(), labels_, out_in_);

    // d_emb: gradient w.r.t. each position's embedding (L x D), kept in d_b
    switch (arch_) {
        case Architecture::kLinearBow:
        case Architecture::kAvgEmbMlp: {
            ws.d_a = ws.d_top;
            for (std::size_t l = layers_.size(); l-- > 0;) {
                const double* in = l == 0 ? ws.pooled.data() : ws.act[l - 1].data();
                if (arch_ == Architecture::kAvgEmbMlp) {
                    for (std::size_t j = 0; j < H; ++j) {
                        const double y = ws.act[l][j];
                        ws.d_a[j] *= 1.0 - y * y;
                    }
                    for (std::size_t j = 0; j < H; ++j) grad[layers_[l].b + j] += ws.d_a[j];
                }
                k.ger(1.0, ws.d_a.data(), in, grad + layers_[l].w, H, layers_[l].in);
                zero(ws.d_pre, layers_[l].in);
                k.gemv_t(params + layers_[l].w, ws.d_a.data(), ws.d_pre.data(), H, layers_[l].in);
                ws.d_a.swap(ws.d_pre);
            }
            // ws.d_a now holds d(pooled)
            const double share = arch_ == Architecture::kLinearBow ? 1.0 : 1.0 / static_cast<double>(L);
            zero(ws.d_b, L * D);
            for (std::size_t t = 0; t < L; ++t) k.axpy(share, ws.d_a.data(), ws.d_b.data() + t * D, D);
            break;
        }
        case Architecture::kConv1d: {
            // d_a: gradient on current layer outputs (L x H)
            zero(ws.d_a, L * H);
            for (std::size_t j = 0; j < H; ++j) ws.d_a[ws.pool_arg[j] * H + j] = ws.d_top[j];
            for (std::size_t l = layers_.size(); l-- > 0;) {
                const std::size_t C = layers_[l].in;
                const double* in = l == 0 ? ws.emb.data() : ws.act[l - 1].data();
                const auto& y = ws.act[l];
                zero(ws.d_b, L * C);
                ws.d_pre.resize(H);
                ws.window.resize(3 * C);
                ws.d_window.resize(3 * C);
                for (std::size_t t = 0; t < L; ++t) {
                    bool any = false;
                    for (std::size_t j = 0; j < H; ++j) {
                        const double yj = y[t * H + j];
                        ws.d_pre[j] = ws.d_a[t * H + j] * (1.0 - yj * yj);
                        any = any || ws.d_pre[j] != 0.0;
                    }
                    if (!any) continue;
                    std::fill(ws.window.begin(), ws.window.end(), 0.0);
                    if (t > 0) std::copy_n(in + (t - 1) * C, C, ws.window.begin());
                    std::copy_n(in + t * C, C, ws.window.begin() + static_cast<std::ptrdiff_t>(C));
                    if (t + 1 < L) std::copy_n(in + (t + 1) * C, C, ws.window.begin() + static_cast<std::ptrdiff_t>(2 * C));
                    k.ger(1.0, ws.d_pre.data(), ws.window.data(), grad + layers_[l].w, H, 3 * C);
                    for (std::size_t j = 0; j < H; ++j) grad[layers_[l].b + j] += ws.d_pre[j];
                    std::fill(ws.d_window.begin(), ws.d_window.end(), 0.0);
                    k.gemv_t(params + layers_[l].w, ws.d_pre.data(), ws.d_window.data(), H, 3 * C);
                    if (t > 0) k.axpy(1.0, ws.d_window.data(), ws.d_b.data() + (t - 1) * C, C);
                    k.axpy(1.0, ws.d_window.data() + C, ws.d_b.data() + t * C, C);
                    if (t + 1 < L) k.axpy(1.0, ws.d_window.data() + 2 * C, ws.d_b.data() + (t + 1) * C, C);
                }
                ws.d_a.swap(ws.d_b);
            }
            ws.d_b.swap(ws.d_a);
            break;
        }
        case Architecture::kRecurrent: {
            zero(ws.d_a, L * H);
            for (std::size_t j = 0; j < H; ++j) ws.d_a[(L - 1) * H + j] = ws.d_top[j];
            for (std::size_t l = layers_.size(); l-- > 0;) {
                const std::size_t C = layers_[l].in;
                const double* in = l == 0 ? ws.emb.data() : ws.act[l - 1].data() + H;
                const auto& a = ws.act[l];
                zero(ws.d_b, L * C);
                zero(ws.d_carry, H);
                ws.d_pre.resize(H);
                for (std::size_t t = L; t-- > 0;) {
                    const double* h = a.data() + (t + 1) * H;
                    const double* h_prev = a.data() + t * H;
                    for (std::size_t j = 0; j < H; ++j) {
                        ws.d_pre[j] = (ws.d_a[t * H + j] + ws.d_carry[j]) * (1.0 - h[j] * h[j]);
                    }
                    k.ger(1.0, ws.d_pre.data(), in + t * C, grad + layers_[l].w, H, C);
                    k.ger(1.0, ws.d_pre.data(), h_prev, grad + layers_[l].u, H, H);
                    for (std::size_t j = 0; j < H; ++j) grad[layers_[l].b + j] += ws.d_pre[j];
                    k.gemv_t(params + layers_[l].w, ws.d_pre.data(), ws.d_b.data() + t * C, H, C);
                    std::fill(ws.d_carry.begin(), ws.d_carry.end(), 0.0);
                    k.gemv_t(params + layers_[l].u, ws.d_pre.data(), ws.d_carry.data(), H, H);
                }
                ws.d_a.swap(ws.d_b);
            }
            ws.d_b.swap(ws.d_a);
            break;
        }
    }

    // embedding rows
    double* g_emb = sink.grad != nullptr ? sink.grad : grad;
    for (std::size_t t = 0; t < L; ++t) {
        const int begin = offsets[t];
        const int end = offsets[t + 1];
        const double scale = 1.0 / static_cast<double>(end - begin);
        for (int f = begin; f < end; ++f) {
            const auto row = static_cast<std::size_t>(ids[f]);
            k.axpy(scale, ws.d_b.data() + t * D, g_emb + row * D, D);
            if (sink.touched != nullptr && !(*sink.touched_flag)[row]) {
                (*sink.touched_flag)[row] = 1;
                sink.touched->push_back(ids[f]);
            }
        }
    }
}

}  // namespace uawr
