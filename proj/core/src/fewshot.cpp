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

#include "wisense/fewshot.hpp"

#include <algorithm>
#include <cmath>

#include "wisense/errors.hpp"

namespace wisense::fewshot {

double scheduled_lr(double base, int halving_interval, long episode) {
    if (halving_interval <= 0) return base;
    const long halvings = episode / halving_interval;
    return base * std::pow(0.5, static_cast<double>(halvings));
}

std::map<int, std::vector<std::size_t>> group_by_class(
    const std::vector<prepare::CorrelationFeature>& features) {
    std::map<int, std::vector<std::size_t>> pool;
    for (std::size_t i = 0; i < features.size(); ++i) pool[features[i].label].push_back(i);
    return pool;
}

Episode sample_episode(const std::vector<prepare::CorrelationFeature>& features,
                       const std::map<int, std::vector<std::size_t>>& pool, int k_way, int n_shot,
                       int l_query, Rng& rng) {
    if (k_way < 1 || n_shot < 1 || l_query < 0)
        throw ParameterError("episode needs k >= 1, n >= 1, l >= 0");
    if (pool.size() < static_cast<std::size_t>(k_way))
        throw EpisodeError("only " + std::to_string(pool.size()) + " classes available for " +
                           std::to_string(k_way) + "-way episode");

    std::vector<int> class_ids;
    for (const auto& [cid, _] : pool) class_ids.push_back(cid);
    if (class_ids.size() > static_cast<std::size_t>(k_way)) {
        rng.shuffle(class_ids);
        class_ids.resize(k_way);
        std::sort(class_ids.begin(), class_ids.end());
    }

    Episode ep;
    ep.k_way = k_way;
    ep.n_shot = n_shot;
    ep.l_query = l_query;
    ep.class_ids = class_ids;
    for (const int cid : class_ids) {
        std::vector<std::size_t> candidates = pool.at(cid);
        if (candidates.size() < static_cast<std::size_t>(n_shot + l_query))
            throw EpisodeError("class " + std::to_string(cid) + " has " +
                               std::to_string(candidates.size()) + " samples, needs " +
                               std::to_string(n_shot + l_query));
        rng.shuffle(candidates);
        for (int i = 0; i < n_shot; ++i) {
            ep.support.push_back(&features[candidates[i]]);
            ep.support_labels.push_back(cid);
        }
        for (int i = 0; i < l_query; ++i) {
            ep.query.push_back(&features[candidates[n_shot + i]]);
            ep.query_labels.push_back(cid);
        }
    }
    return ep;
}

std::vector<double> pairwise_mean(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) throw ShapeError("mean of empty vector set");
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != dim) throw ShapeError("mean over mixed-length vectors");

    struct Summer {
        const std::vector<std::vector<double>>& vecs;
        std::size_t dim;
        std::vector<double> sum(std::size_t lo, std::size_t hi) const {
            if (hi - lo == 1) return vecs[lo];
            const std::size_t mid = lo + (hi - lo) / 2;
            std::vector<double> left = sum(lo, mid);
            const std::vector<double> right = sum(mid, hi);
            for (std::size_t i = 0; i < dim; ++i) left[i] += right[i];
            return left;
        }
    };
    std::vector<double> total = Summer{vectors, dim}.sum(0, vectors.size());
    const double inv_count = static_cast<double>(vectors.size());
    for (double& v : total) v /= inv_count;
    return total;
}

ClassifyResult classify_embedding(const std::vector<double>& embedding,
                                  const std::vector<Prototype>& prototypes) {
    if (prototypes.empty()) throw ParameterError("classify needs at least one prototype");
    const std::size_t k = prototypes.size();
    std::vector<double> neg_d2(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (prototypes[j].vec.size() != embedding.size())
            throw ShapeError("prototype/embedding dimension mismatch");
        double d2 = 0.0;
        for (std::size_t i = 0; i < embedding.size(); ++i) {
            const double d = embedding[i] - prototypes[j].vec[i];
            d2 += d * d;
        }
        neg_d2[j] = -d2;
    }
    // Stabilized softmax; argmax of the logits equals argmin distance.
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (neg_d2[j] > neg_d2[best]) best = j;

    ClassifyResult out;
    out.class_id = prototypes[best].class_id;
    out.probabilities.resize(k);
    const double mx = neg_d2[best];
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        out.probabilities[j] = std::exp(neg_d2[j] - mx);
        z += out.probabilities[j];
    }
    for (double& p : out.probabilities) p /= z;
    return out;
}

namespace detail {

void check_episode(const Episode& ep) {
    if (ep.k_way < 1) throw EpisodeError("episode has no classes");
    if (ep.class_ids.size() != static_cast<std::size_t>(ep.k_way))
        throw EpisodeError("episode class list does not match k_way");
    if (ep.support.size() != static_cast<std::size_t>(ep.k_way) * ep.n_shot)
        throw EpisodeError("support size != K*N");
    if (ep.query.size() != static_cast<std::size_t>(ep.k_way) * ep.l_query)
        throw EpisodeError("query size != K*L");
}

EpisodeForward episode_math(const Episode& ep, const std::vector<double>& embeddings,
                            std::size_t dim) {
    EpisodeForward fwd;
    fwd.dim = dim;
    fwd.embeddings = embeddings;
    const std::size_t n_support = ep.support.size();
    const std::size_t n_query = ep.query.size();
    const std::size_t k = ep.class_ids.size();

    fwd.class_support.assign(k, {});
    for (std::size_t i = 0; i < n_support; ++i) {
        const auto it = std::find(ep.class_ids.begin(), ep.class_ids.end(), ep.support_labels[i]);
        if (it == ep.class_ids.end()) throw EpisodeError("support label outside episode classes");
        fwd.class_support[static_cast<std::size_t>(it - ep.class_ids.begin())].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c)
        if (fwd.class_support[c].empty())
            throw EpisodeError("class " + std::to_string(ep.class_ids[c]) + " has no support");

    fwd.prototypes.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::vector<double>> members;
        members.reserve(fwd.class_support[c].size());
        for (const std::size_t i : fwd.class_support[c])
            members.emplace_back(embeddings.begin() + i * dim, embeddings.begin() + (i + 1) * dim);
        fwd.prototypes[c] = pairwise_mean(members);
    }

    fwd.query_class.resize(n_query);
    fwd.probs.assign(n_query * k, 0.0);
    double loss = 0.0;
    for (std::size_t q = 0; q < n_query; ++q) {
        const auto it = std::find(ep.class_ids.begin(), ep.class_ids.end(), ep.query_labels[q]);
        if (it == ep.class_ids.end()) throw EpisodeError("query label outside episode classes");
        const std::size_t y = static_cast<std::size_t>(it - ep.class_ids.begin());
        fwd.query_class[q] = static_cast<int>(y);

        const double* e = embeddings.data() + (n_support + q) * dim;
        std::vector<double> logits(k);
        for (std::size_t c = 0; c < k; ++c) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                const double d = e[i] - fwd.prototypes[c][i];
                d2 += d * d;
            }
            logits[c] = -d2;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            fwd.probs[q * k + c] = std::exp(logits[c] - mx);
            z += fwd.probs[q * k + c];
        }
        for (std::size_t c = 0; c < k; ++c) fwd.probs[q * k + c] /= z;
        loss -= logits[y] - (mx + std::log(z));
    }
    fwd.loss = n_query == 0 ? 0.0 : loss / static_cast<double>(n_query);
    return fwd;
}

std::vector<double> embedding_gradient(const Episode& ep, const EpisodeForward& fwd) {
    const std::size_t dim = fwd.dim;
    const std::size_t n_support = ep.support.size();
    const std::size_t n_query = ep.query.size();
    const std::size_t k = ep.class_ids.size();

    std::vector<double> d_emb(fwd.embeddings.size(), 0.0);
    if (n_query == 0) return d_emb;
    std::vector<std::vector<double>> d_proto(k, std::vector<double>(dim, 0.0));
    const double inv_q = 1.0 / static_cast<double>(n_query);

    for (std::size_t q = 0; q < n_query; ++q) {
        const double* e = fwd.embeddings.data() + (n_support + q) * dim;
        double* de = d_emb.data() + (n_support + q) * dim;
        for (std::size_t c = 0; c < k; ++c) {
            // d(loss)/d(logit_c) for logit = -||e - p_c||^2
            const double dlogit =
                (fwd.probs[q * k + c] - (static_cast<int>(c) == fwd.query_class[q] ? 1.0 : 0.0)) *
                inv_q;
            const double* p = fwd.prototypes[c].data();
            for (std::size_t i = 0; i < dim; ++i) {
                const double diff = e[i] - p[i];
                de[i] += dlogit * (-2.0) * diff;
                d_proto[c][i] += dlogit * 2.0 * diff;
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        const double inv_members = 1.0 / static_cast<double>(fwd.class_support[c].size());
        for (const std::size_t i : fwd.class_support[c]) {
            double* de = d_emb.data() + i * dim;
            for (std::size_t d = 0; d < dim; ++d) de[d] += d_proto[c][d] * inv_members;
        }
    }
    return d_emb;
}

}  // namespace detail

PretrainResult pretrain_embedding(nn::EmbeddingNet<float>& net,
                                  const std::vector<prepare::CorrelationFeature>& features,
                                  const TrainConfig& cfg) {
    const auto pool = group_by_class(features);
    if (pool.size() < 2)
        throw DegenerateTrainingError("pretraining needs at least two classes, got " +
                                      std::to_string(pool.size()));
    std::vector<int> class_ids;
    for (const auto& [cid, _] : pool) class_ids.push_back(cid);
    std::map<int, int> class_index;
    for (std::size_t i = 0; i < class_ids.size(); ++i) class_index[class_ids[i]] = static_cast<int>(i);
    const int n_classes = static_cast<int>(class_ids.size());

    Rng rng(Rng::derive(cfg.rng_seed, "pretrain"));
    nn::Linear<float> head(net.embedding_dim(), n_classes);
    head.init(rng);

    std::vector<nn::Param<float>*> params = net.params();
    params.push_back(&head.weight());
    params.push_back(&head.bias());
    nn::Adam<float> adam(params);

    std::vector<std::size_t> order(features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    PretrainResult result;
    long step = 0;
    const int batch_size = std::max(1, cfg.pretrain_batch);
    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<const prepare::CorrelationFeature*> batch;
            std::vector<int> targets;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&features[order[i]]);
                targets.push_back(class_index.at(features[order[i]].label));
            }
            const int n = static_cast<int>(batch.size());

            std::vector<const Matrix*> mats;
            for (const auto* f : batch) mats.push_back(&f->matrix);
            adam.zero_grad();
            const std::vector<float> emb =
                net.forward(nn::features_to_tensor<float>(mats), nn::BnMode::train);
            const std::vector<float> logits = head.forward(emb, n);

            // Softmax cross-entropy over the class head.
            const int c = n_classes;
            std::vector<float> dlogits(logits.size());
            double loss = 0.0;
            for (int i = 0; i < n; ++i) {
                const float* li = logits.data() + static_cast<std::size_t>(i) * c;
                float* di = dlogits.data() + static_cast<std::size_t>(i) * c;
                double mx = li[0];
                for (int j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(li[j]));
                double z = 0.0;
                for (int j = 0; j < c; ++j) z += std::exp(static_cast<double>(li[j]) - mx);
                loss -= (static_cast<double>(li[targets[i]]) - mx - std::log(z));
                for (int j = 0; j < c; ++j) {
                    const double p = std::exp(static_cast<double>(li[j]) - mx) / z;
                    di[j] = static_cast<float>((p - (j == targets[i] ? 1.0 : 0.0)) / n);
                }
            }
            loss /= n;
            net.backward(head.backward(dlogits));
            adam.step(scheduled_lr(cfg.learning_rate, cfg.lr_halving_interval, step));
            ++step;
            epoch_loss += loss;
            ++batches;
        }
        result.epoch_loss.push_back(batches == 0 ? 0.0 : epoch_loss / static_cast<double>(batches));
    }

    // Final fit on the merged set, inference mode.
    std::size_t correct = 0;
    for (const auto& f : features) {
        std::vector<const Matrix*> one{&f.matrix};
        const std::vector<float> emb = net.forward(nn::features_to_tensor<float>(one), nn::BnMode::eval);
        const std::vector<float> logits = head.forward(emb, 1);
        int arg = 0;
        for (int j = 1; j < n_classes; ++j)
            if (logits[j] > logits[arg]) arg = j;
        if (class_ids[static_cast<std::size_t>(arg)] == f.label) ++correct;
    }
    result.train_accuracy =
        features.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(features.size());
    return result;
}

TrainResult train(const std::vector<prepare::CorrelationFeature>& features,
                  const TrainConfig& cfg) {
    const auto pool = group_by_class(features);
    if (pool.size() < static_cast<std::size_t>(cfg.k_way))
        throw EpisodeError("dataset has " + std::to_string(pool.size()) + " classes, needs " +
                           std::to_string(cfg.k_way));
    for (const auto& [cid, members] : pool)
        if (members.size() < static_cast<std::size_t>(cfg.n_shot + cfg.l_query))
            throw EpisodeError("class " + std::to_string(cid) + " has " +
                               std::to_string(members.size()) + " samples, needs " +
                               std::to_string(cfg.n_shot + cfg.l_query));

    TrainResult result{nn::EmbeddingNet<float>(cfg.net), {}, {}};
    result.net.init(Rng::derive(cfg.rng_seed, "net-init"));

    if (cfg.pretrain_epochs > 0)
        result.pretrain_epoch_loss = pretrain_embedding(result.net, features, cfg).epoch_loss;

    nn::Adam<float> adam(result.net.params());
    Rng episode_rng(Rng::derive(cfg.rng_seed, "episodes"));
    result.log.reserve(cfg.episodes);
    for (int e = 0; e < cfg.episodes; ++e) {
        const Episode ep =
            sample_episode(features, pool, cfg.k_way, cfg.n_shot, cfg.l_query, episode_rng);
        const double lr = scheduled_lr(cfg.learning_rate, cfg.lr_halving_interval, e);
        const double loss = episode_step(result.net, ep, adam, lr);
        result.log.push_back({e, loss, lr});
    }
    return result;
}

}  // namespace wisense::fewshot
