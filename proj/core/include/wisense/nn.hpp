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

#include <cmath>
#include <cstddef>
#include <vector>

#include "wisense/errors.hpp"
#include "wisense/rng.hpp"

// Layer kernels for the embedding network. Everything is templated on the
// scalar type: float runs production training, double backs the
// finite-difference gradient checks. Inner loops may be parallelized, but
// each output element is always accumulated by a single thread in a fixed
// order, so results do not depend on the thread count.

namespace wisense::nn {

template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

    std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
    T* plane(int in, int ic) { return data.data() + (static_cast<std::size_t>(in) * c + ic) * plane_size(); }
    const T* plane(int in, int ic) const {
        return data.data() + (static_cast<std::size_t>(in) * c + ic) * plane_size();
    }
};

template <typename T>
struct Param {
    std::vector<T> value;
    std::vector<T> grad;

    void resize(std::size_t count) {
        value.assign(count, T(0));
        grad.assign(count, T(0));
    }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

enum class BnMode {
    train,         // batch statistics, running statistics updated
    frozen_batch,  // batch statistics, no state mutation (pure loss evals)
    eval,          // running statistics
};

/// 3x3 convolution, stride 1, zero padding 1 (spatial size preserved).
template <typename T>
class Conv3x3 {
public:
    Conv3x3() = default;
    Conv3x3(int in_ch, int out_ch) : in_ch_(in_ch), out_ch_(out_ch) {
        weight_.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
        bias_.resize(static_cast<std::size_t>(out_ch));
    }

    void init(Rng& rng) {
        const double bound = std::sqrt(3.0 / (in_ch_ * 9));
        for (auto& v : weight_.value) v = static_cast<T>(rng.uniform(-bound, bound));
        std::fill(bias_.value.begin(), bias_.value.end(), T(0));
    }

    Tensor4<T> forward(const Tensor4<T>& x) {
        xpad_ = pad1(x);
        Tensor4<T> y(x.n, out_ch_, x.h, x.w);
        const int height = x.h, width = x.w, pw = x.w + 2;
#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
        for (int in = 0; in < y.n; ++in) {
            for (int oc = 0; oc < out_ch_; ++oc) {
                T* yplane = y.plane(in, oc);
                const T b = bias_.value[oc];
                for (std::size_t i = 0; i < y.plane_size(); ++i) yplane[i] = b;
                for (int ic = 0; ic < in_ch_; ++ic) {
                    const T* xplane = xpad_.plane(in, ic);
                    const T* wk = &weight_.value[(static_cast<std::size_t>(oc) * in_ch_ + ic) * 9];
                    for (int kh = 0; kh < 3; ++kh) {
                        for (int kw = 0; kw < 3; ++kw) {
                            const T wv = wk[kh * 3 + kw];
                            for (int oh = 0; oh < height; ++oh) {
                                const T* xrow = xplane + (oh + kh) * pw + kw;
                                T* yrow = yplane + static_cast<std::size_t>(oh) * width;
                                for (int ow = 0; ow < width; ++ow) yrow[ow] += wv * xrow[ow];
                            }
                        }
                    }
                }
            }
        }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) {
        const int height = dy.h, width = dy.w, pw = dy.w + 2;
        const int batch = dy.n;

#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int oc = 0; oc < out_ch_; ++oc) {
            T db = T(0);
            for (int in = 0; in < batch; ++in) {
                const T* dyplane = dy.plane(in, oc);
                for (std::size_t i = 0; i < dy.plane_size(); ++i) db += dyplane[i];
            }
            bias_.grad[oc] += db;
            for (int ic = 0; ic < in_ch_; ++ic) {
                T* dwk = &weight_.grad[(static_cast<std::size_t>(oc) * in_ch_ + ic) * 9];
                for (int kh = 0; kh < 3; ++kh) {
                    for (int kw = 0; kw < 3; ++kw) {
                        T acc = T(0);
                        for (int in = 0; in < batch; ++in) {
                            const T* dyplane = dy.plane(in, oc);
                            const T* xplane = xpad_.plane(in, ic);
                            for (int oh = 0; oh < height; ++oh) {
                                const T* xrow = xplane + (oh + kh) * pw + kw;
                                const T* dyrow = dyplane + static_cast<std::size_t>(oh) * width;
                                for (int ow = 0; ow < width; ++ow) acc += dyrow[ow] * xrow[ow];
                            }
                        }
                        dwk[kh * 3 + kw] += acc;
                    }
                }
            }
        }

        Tensor4<T> dxpad(batch, in_ch_, height + 2, width + 2);
#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
        for (int in = 0; in < batch; ++in) {
            for (int ic = 0; ic < in_ch_; ++ic) {
                T* dxplane = dxpad.plane(in, ic);
                for (int oc = 0; oc < out_ch_; ++oc) {
                    const T* dyplane = dy.plane(in, oc);
                    const T* wk = &weight_.value[(static_cast<std::size_t>(oc) * in_ch_ + ic) * 9];
                    for (int kh = 0; kh < 3; ++kh) {
                        for (int kw = 0; kw < 3; ++kw) {
                            const T wv = wk[kh * 3 + kw];
                            for (int oh = 0; oh < height; ++oh) {
                                T* dxrow = dxplane + (oh + kh) * pw + kw;
                                const T* dyrow = dyplane + static_cast<std::size_t>(oh) * width;
                                for (int ow = 0; ow < width; ++ow) dxrow[ow] += wv * dyrow[ow];
                            }
                        }
                    }
                }
            }
        }

        Tensor4<T> dx(batch, in_ch_, height, width);
        for (int in = 0; in < batch; ++in) {
            for (int ic = 0; ic < in_ch_; ++ic) {
                const T* src = dxpad.plane(in, ic);
                T* dst = dx.plane(in, ic);
                for (int ih = 0; ih < height; ++ih)
                    for (int iw = 0; iw < width; ++iw)
                        dst[static_cast<std::size_t>(ih) * width + iw] = src[(ih + 1) * pw + iw + 1];
            }
        }
        return dx;
    }

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }
    const Param<T>& weight() const { return weight_; }
    const Param<T>& bias() const { return bias_; }

private:
    static Tensor4<T> pad1(const Tensor4<T>& x) {
        Tensor4<T> out(x.n, x.c, x.h + 2, x.w + 2);
        const int pw = x.w + 2;
        for (int in = 0; in < x.n; ++in) {
            for (int ic = 0; ic < x.c; ++ic) {
                const T* src = x.plane(in, ic);
                T* dst = out.plane(in, ic);
                for (int ih = 0; ih < x.h; ++ih)
                    for (int iw = 0; iw < x.w; ++iw)
                        dst[(ih + 1) * pw + iw + 1] = src[static_cast<std::size_t>(ih) * x.w + iw];
            }
        }
        return out;
    }

    int in_ch_ = 0;
    int out_ch_ = 0;
    Param<T> weight_;  // [oc][ic][kh][kw]
    Param<T> bias_;
    Tensor4<T> xpad_;
};

template <typename T>
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels) : channels_(channels) {
        gamma_.resize(channels);
        beta_.resize(channels);
        std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
        running_mean_.assign(channels, T(0));
        running_var_.assign(channels, T(1));
    }

    Tensor4<T> forward(const Tensor4<T>& x, BnMode mode) {
        Tensor4<T> y(x.n, x.c, x.h, x.w);
        if (mode == BnMode::eval) {
            for (int ic = 0; ic < channels_; ++ic) {
                const T inv = T(1) / std::sqrt(running_var_[ic] + eps_);
                const T g = gamma_.value[ic], b = beta_.value[ic], mu = running_mean_[ic];
                for (int in = 0; in < x.n; ++in) {
                    const T* xp = x.plane(in, ic);
                    T* yp = y.plane(in, ic);
                    for (std::size_t i = 0; i < x.plane_size(); ++i) yp[i] = g * (xp[i] - mu) * inv + b;
                }
            }
            return y;
        }

        const std::size_t m = static_cast<std::size_t>(x.n) * x.plane_size();
        xhat_ = Tensor4<T>(x.n, x.c, x.h, x.w);
        invstd_.assign(channels_, T(0));
        count_ = m;
#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int ic = 0; ic < channels_; ++ic) {
            T sum = T(0);
            for (int in = 0; in < x.n; ++in) {
                const T* xp = x.plane(in, ic);
                for (std::size_t i = 0; i < x.plane_size(); ++i) sum += xp[i];
            }
            const T mu = sum / static_cast<T>(m);
            T ss = T(0);
            for (int in = 0; in < x.n; ++in) {
                const T* xp = x.plane(in, ic);
                for (std::size_t i = 0; i < x.plane_size(); ++i) {
                    const T d = xp[i] - mu;
                    ss += d * d;
                }
            }
            const T var = ss / static_cast<T>(m);  // biased, matching the running estimate
            const T inv = T(1) / std::sqrt(var + eps_);
            invstd_[ic] = inv;
            const T g = gamma_.value[ic], b = beta_.value[ic];
            for (int in = 0; in < x.n; ++in) {
                const T* xp = x.plane(in, ic);
                T* hp = xhat_.plane(in, ic);
                T* yp = y.plane(in, ic);
                for (std::size_t i = 0; i < x.plane_size(); ++i) {
                    const T h = (xp[i] - mu) * inv;
                    hp[i] = h;
                    yp[i] = g * h + b;
                }
            }
            if (mode == BnMode::train) {
                running_mean_[ic] = (T(1) - momentum_) * running_mean_[ic] + momentum_ * mu;
                running_var_[ic] = (T(1) - momentum_) * running_var_[ic] + momentum_ * var;
            }
        }
        return y;
    }

    /// Valid after a batch-statistics forward.
    Tensor4<T> backward(const Tensor4<T>& dy) {
        Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
        const T m = static_cast<T>(count_);
#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int ic = 0; ic < channels_; ++ic) {
            T sum_dy = T(0), sum_dy_xhat = T(0);
            for (int in = 0; in < dy.n; ++in) {
                const T* dyp = dy.plane(in, ic);
                const T* hp = xhat_.plane(in, ic);
                for (std::size_t i = 0; i < dy.plane_size(); ++i) {
                    sum_dy += dyp[i];
                    sum_dy_xhat += dyp[i] * hp[i];
                }
            }
            gamma_.grad[ic] += sum_dy_xhat;
            beta_.grad[ic] += sum_dy;
            const T g = gamma_.value[ic];
            const T inv = invstd_[ic];
            const T scale = g * inv / m;
            for (int in = 0; in < dy.n; ++in) {
                const T* dyp = dy.plane(in, ic);
                const T* hp = xhat_.plane(in, ic);
                T* dxp = dx.plane(in, ic);
                for (std::size_t i = 0; i < dy.plane_size(); ++i)
                    dxp[i] = scale * (m * dyp[i] - sum_dy - hp[i] * sum_dy_xhat);
            }
        }
        return dx;
    }

    int channels() const { return channels_; }
    Param<T>& gamma() { return gamma_; }
    Param<T>& beta() { return beta_; }
    const Param<T>& gamma() const { return gamma_; }
    const Param<T>& beta() const { return beta_; }
    std::vector<T>& running_mean() { return running_mean_; }
    std::vector<T>& running_var() { return running_var_; }
    const std::vector<T>& running_mean() const { return running_mean_; }
    const std::vector<T>& running_var() const { return running_var_; }

private:
    int channels_ = 0;
    T momentum_ = T(0.1);
    T eps_ = T(1e-5);
    Param<T> gamma_, beta_;
    std::vector<T> running_mean_, running_var_;
    Tensor4<T> xhat_;
    std::vector<T> invstd_;
    std::size_t count_ = 0;
};

/// 2x2 max pooling, stride 2; odd trailing rows/columns are dropped.
/// Ties keep the first element in scan order.
template <typename T>
class MaxPool2x2 {
public:
    Tensor4<T> forward(const Tensor4<T>& x) {
        const int oh = x.h / 2, ow = x.w / 2;
        if (oh == 0 || ow == 0)
            throw ShapeError("max-pool input " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                             " too small");
        Tensor4<T> y(x.n, x.c, oh, ow);
        argmax_.assign(y.data.size(), 0);
        in_h_ = x.h;
        in_w_ = x.w;
        std::size_t out_idx = 0;
        for (int in = 0; in < x.n; ++in) {
            for (int ic = 0; ic < x.c; ++ic) {
                const T* xp = x.plane(in, ic);
                T* yp = y.plane(in, ic);
                for (int r = 0; r < oh; ++r) {
                    for (int c = 0; c < ow; ++c) {
                        int best_idx = (2 * r) * x.w + 2 * c;
                        T best = xp[best_idx];
                        for (int dr = 0; dr < 2; ++dr) {
                            for (int dc = 0; dc < 2; ++dc) {
                                const int idx = (2 * r + dr) * x.w + 2 * c + dc;
                                if (xp[idx] > best) {
                                    best = xp[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        yp[static_cast<std::size_t>(r) * ow + c] = best;
                        argmax_[out_idx++] = best_idx;
                    }
                }
            }
        }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) {
        Tensor4<T> dx(dy.n, dy.c, in_h_, in_w_);
        std::size_t out_idx = 0;
        for (int in = 0; in < dy.n; ++in) {
            for (int ic = 0; ic < dy.c; ++ic) {
                const T* dyp = dy.plane(in, ic);
                T* dxp = dx.plane(in, ic);
                for (std::size_t i = 0; i < dy.plane_size(); ++i)
                    dxp[argmax_[out_idx++]] += dyp[i];
            }
        }
        return dx;
    }

private:
    std::vector<int> argmax_;
    int in_h_ = 0, in_w_ = 0;
};

template <typename T>
class Linear {
public:
    Linear() = default;
    Linear(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
        weight_.resize(static_cast<std::size_t>(out_dim) * in_dim);
        bias_.resize(static_cast<std::size_t>(out_dim));
    }

    void init(Rng& rng) {
        const double bound = std::sqrt(3.0 / in_);
        for (auto& v : weight_.value) v = static_cast<T>(rng.uniform(-bound, bound));
        std::fill(bias_.value.begin(), bias_.value.end(), T(0));
    }

    /// x is batch x in_dim, row-major.
    std::vector<T> forward(const std::vector<T>& x, int batch) {
        x_cache_ = x;
        batch_ = batch;
        std::vector<T> y(static_cast<std::size_t>(batch) * out_);
        for (int i = 0; i < batch; ++i) {
            const T* xi = x.data() + static_cast<std::size_t>(i) * in_;
            T* yi = y.data() + static_cast<std::size_t>(i) * out_;
            for (int o = 0; o < out_; ++o) {
                const T* wo = weight_.value.data() + static_cast<std::size_t>(o) * in_;
                T acc = bias_.value[o];
                for (int k = 0; k < in_; ++k) acc += wo[k] * xi[k];
                yi[o] = acc;
            }
        }
        return y;
    }

    std::vector<T> backward(const std::vector<T>& dy) {
        std::vector<T> dx(static_cast<std::size_t>(batch_) * in_, T(0));
        for (int i = 0; i < batch_; ++i) {
            const T* xi = x_cache_.data() + static_cast<std::size_t>(i) * in_;
            const T* dyi = dy.data() + static_cast<std::size_t>(i) * out_;
            T* dxi = dx.data() + static_cast<std::size_t>(i) * in_;
            for (int o = 0; o < out_; ++o) {
                const T g = dyi[o];
                bias_.grad[o] += g;
                T* dwo = weight_.grad.data() + static_cast<std::size_t>(o) * in_;
                const T* wo = weight_.value.data() + static_cast<std::size_t>(o) * in_;
                for (int k = 0; k < in_; ++k) {
                    dwo[k] += g * xi[k];
                    dxi[k] += g * wo[k];
                }
            }
        }
        return dx;
    }

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }
    const Param<T>& weight() const { return weight_; }
    const Param<T>& bias() const { return bias_; }

private:
    int in_ = 0, out_ = 0;
    Param<T> weight_, bias_;
    std::vector<T> x_cache_;
    int batch_ = 0;
};

/// Adam with the usual bias correction; beta1 = 0.9, beta2 = 0.999.
template <typename T>
class Adam {
public:
    explicit Adam(std::vector<Param<T>*> params) : params_(std::move(params)) {
        for (const Param<T>* p : params_) {
            m_.emplace_back(p->value.size(), T(0));
            v_.emplace_back(p->value.size(), T(0));
        }
    }

    /// One update from the accumulated gradients; gradients are cleared.
    void step(double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            auto& value = params_[p]->value;
            auto& grad = params_[p]->grad;
            auto& m = m_[p];
            auto& v = v_[p];
            for (std::size_t i = 0; i < value.size(); ++i) {
                const double g = static_cast<double>(grad[i]);
                const double mi = 0.9 * static_cast<double>(m[i]) + 0.1 * g;
                const double vi = 0.999 * static_cast<double>(v[i]) + 0.001 * g * g;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                value[i] -= static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + 1e-8));
            }
            params_[p]->zero_grad();
        }
    }

    void zero_grad() {
        for (Param<T>* p : params_) p->zero_grad();
    }

private:
    std::vector<Param<T>*> params_;
    std::vector<std::vector<T>> m_, v_;
    long t_ = 0;
};

}  // namespace wisense::nn
