// SPDX-License-Identifier: Apache-2.0
//
// Copyright (c) 2026 The wisense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "wisense/matrix.hpp"
#include "wisense/nn.hpp"

namespace wisense::nn {

/// The production embedding is four blocks of 64 filters; the miniature
/// configurations exist for gradient checks and fast tests.
struct NetConfig {
    int blocks = 4;
    int filters = 64;

    /// Smallest square input that survives every 2x2 pooling stage.
    int min_input() const { return 1 << blocks; }

    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Spatial size after each conv block (convolutions preserve size, each
/// pool halves with floor).
inline std::vector<int> spatial_sizes(int input, int blocks) {
    std::vector<int> sizes;
    int s = input;
    for (int b = 0; b < blocks; ++b) {
        s /= 2;
        sizes.push_back(s);
    }
    return sizes;
}

/// conv(3x3, same) -> batch norm -> ReLU -> max-pool(2x2).
template <typename T>
class ConvBlock {
public:
    ConvBlock() = default;
    ConvBlock(int in_ch, int out_ch) : conv_(in_ch, out_ch), bn_(out_ch) {}

    Tensor4<T> forward(const Tensor4<T>& x, BnMode mode) {
        Tensor4<T> a = bn_.forward(conv_.forward(x), mode);
        relu_out_ = std::move(a);
        for (auto& v : relu_out_.data) v = v > T(0) ? v : T(0);
        return pool_.forward(relu_out_);
    }

    Tensor4<T> backward(const Tensor4<T>& dy) {
        Tensor4<T> d = pool_.backward(dy);
        for (std::size_t i = 0; i < d.data.size(); ++i)
            if (!(relu_out_.data[i] > T(0))) d.data[i] = T(0);
        return conv_.backward(bn_.backward(d));
    }

    Conv3x3<T>& conv() { return conv_; }
    BatchNorm2d<T>& bn() { return bn_; }
    const Conv3x3<T>& conv() const { return conv_; }
    const BatchNorm2d<T>& bn() const { return bn_; }

private:
    Conv3x3<T> conv_;
    BatchNorm2d<T> bn_;
    Tensor4<T> relu_out_;
    MaxPool2x2<T> pool_;
};

/// Stacked conv blocks with a terminal global average pool. The embedding
/// width equals the filter count, independent of the input size.
template <typename T>
class EmbeddingNet {
public:
    EmbeddingNet() : EmbeddingNet(NetConfig{}) {}
    explicit EmbeddingNet(NetConfig cfg) : cfg_(cfg) {
        blocks_.reserve(cfg.blocks);
        for (int b = 0; b < cfg.blocks; ++b)
            blocks_.emplace_back(b == 0 ? 1 : cfg.filters, cfg.filters);
    }

    void init(std::uint64_t seed) {
        Rng rng(seed);
        for (auto& block : blocks_) block.conv().init(rng);
    }

    const NetConfig& config() const { return cfg_; }
    int embedding_dim() const { return cfg_.filters; }

    void validate_input(int s) const {
        if (s < cfg_.min_input())
            throw ShapeError("feature size " + std::to_string(s) + " below minimum " +
                             std::to_string(cfg_.min_input()) + " for " +
                             std::to_string(cfg_.blocks) + " pooling stages");
    }

    /// Returns batch x embedding_dim, row-major.
    std::vector<T> forward(const Tensor4<T>& x, BnMode mode) {
        validate_input(std::min(x.h, x.w));
        Tensor4<T> a = x;
        for (auto& block : blocks_) a = block.forward(a, mode);
        gap_h_ = a.h;
        gap_w_ = a.w;
        gap_n_ = a.n;
        std::vector<T> emb(static_cast<std::size_t>(a.n) * cfg_.filters);
        const T scale = T(1) / static_cast<T>(a.plane_size());
        for (int in = 0; in < a.n; ++in) {
            for (int ic = 0; ic < cfg_.filters; ++ic) {
                const T* p = a.plane(in, ic);
                T acc = T(0);
                for (std::size_t i = 0; i < a.plane_size(); ++i) acc += p[i];
                emb[static_cast<std::size_t>(in) * cfg_.filters + ic] = acc * scale;
            }
        }
        return emb;
    }

    /// d_emb is batch x embedding_dim; parameter gradients accumulate.
    void backward(const std::vector<T>& d_emb) {
        Tensor4<T> d(gap_n_, cfg_.filters, gap_h_, gap_w_);
        const T scale = T(1) / static_cast<T>(d.plane_size());
        for (int in = 0; in < gap_n_; ++in) {
            for (int ic = 0; ic < cfg_.filters; ++ic) {
                const T g = d_emb[static_cast<std::size_t>(in) * cfg_.filters + ic] * scale;
                T* p = d.plane(in, ic);
                for (std::size_t i = 0; i < d.plane_size(); ++i) p[i] = g;
            }
        }
        for (std::size_t b = blocks_.size(); b-- > 0;) d = blocks_[b].backward(d);
    }

    /// Trainable tensors, fixed order: per block conv weight, conv bias,
    /// bn gamma, bn beta.
    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (auto& block : blocks_) {
            out.push_back(&block.conv().weight());
            out.push_back(&block.conv().bias());
            out.push_back(&block.bn().gamma());
            out.push_back(&block.bn().beta());
        }
        return out;
    }

    std::vector<std::string> param_names() const {
        std::vector<std::string> out;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const std::string prefix = "block" + std::to_string(b) + ".";
            out.push_back(prefix + "conv.weight");
            out.push_back(prefix + "conv.bias");
            out.push_back(prefix + "bn.gamma");
            out.push_back(prefix + "bn.beta");
        }
        return out;
    }

    /// Checkpoint order: per block conv weight, conv bias, bn gamma,
    /// bn beta, bn running mean, bn running var.
    std::vector<std::vector<T>*> state_tensors() {
        std::vector<std::vector<T>*> out;
        for (auto& block : blocks_) {
            out.push_back(&block.conv().weight().value);
            out.push_back(&block.conv().bias().value);
            out.push_back(&block.bn().gamma().value);
            out.push_back(&block.bn().beta().value);
            out.push_back(&block.bn().running_mean());
            out.push_back(&block.bn().running_var());
        }
        return out;
    }

    std::vector<ConvBlock<T>>& blocks() { return blocks_; }

private:
    NetConfig cfg_;
    std::vector<ConvBlock<T>> blocks_;
    int gap_h_ = 0, gap_w_ = 0, gap_n_ = 0;
};

/// Packs square correlation matrices into a single-channel batch tensor.
template <typename T>
Tensor4<T> features_to_tensor(const std::vector<const Matrix*>& features) {
    if (features.empty()) throw ShapeError("empty feature batch");
    const int s = static_cast<int>(features.front()->rows());
    Tensor4<T> x(static_cast<int>(features.size()), 1, s, s);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const Matrix& m = *features[i];
        if (static_cast<int>(m.rows()) != s || static_cast<int>(m.cols()) != s)
            throw ShapeError("feature batch mixes sizes");
        T* dst = x.plane(static_cast<int>(i), 0);
        for (std::size_t k = 0; k < m.data().size(); ++k) dst[k] = static_cast<T>(m.data()[k]);
    }
    return x;
}

}  // namespace wisense::nn
