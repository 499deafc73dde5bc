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

#include <cstdint>
#include <map>
#include <vector>

#include "wisense/net.hpp"
#include "wisense/prepare.hpp"
#include "wisense/rng.hpp"

namespace wisense::fewshot {

/// A K-way N-shot task. Features are borrowed from the owning dataset;
/// support and query reference disjoint samples.
struct Episode {
    int k_way = 0;
    int n_shot = 0;
    int l_query = 0;
    std::vector<int> class_ids;  // the K classes, ascending
    std::vector<const prepare::CorrelationFeature*> support;
    std::vector<int> support_labels;
    std::vector<const prepare::CorrelationFeature*> query;
    std::vector<int> query_labels;
};

struct Prototype {
    int class_id = 0;
    std::vector<double> vec;
};

struct TrainConfig {
    int k_way = 4;
    int n_shot = 5;
    int l_query = 5;
    int episodes = 200;
    double learning_rate = 1e-3;
    int lr_halving_interval = 2000;  // episodes per halving
    int pretrain_epochs = 30;
    int pretrain_batch = 32;
    std::uint64_t rng_seed = 1;
    nn::NetConfig net{};
};

struct TrainLogEntry {
    int episode = 0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    nn::EmbeddingNet<float> net;
    std::vector<TrainLogEntry> log;
    std::vector<double> pretrain_epoch_loss;
};

/// base * 0.5^floor(episode / interval).
double scheduled_lr(double base, int halving_interval, long episode);

/// Per-class sample indices, class ids ascending.
std::map<int, std::vector<std::size_t>> group_by_class(
    const std::vector<prepare::CorrelationFeature>& features);

/// Draws a K-way N-shot episode with L queries per class. Classes are a
/// random K-subset (all classes when exactly K exist); support and query
/// are disjoint draws without replacement.
Episode sample_episode(const std::vector<prepare::CorrelationFeature>& features,
                       const std::map<int, std::vector<std::size_t>>& pool, int k_way, int n_shot,
                       int l_query, Rng& rng);

/// Divide-and-conquer mean over equal-length vectors. Splitting at the
/// midpoint makes mean(S ++ S) reproduce mean(S) exactly: the doubled sum
/// and doubled count cancel without extra rounding.
std::vector<double> pairwise_mean(const std::vector<std::vector<double>>& vectors);

struct ClassifyResult {
    int class_id = 0;
    std::vector<double> probabilities;  // prototype order (class_id ascending)
};

/// Nearest prototype by squared Euclidean distance; probabilities are the
/// stabilized softmax over negated squared distances. Distance ties go to
/// the lowest class id.
ClassifyResult classify_embedding(const std::vector<double>& embedding,
                                  const std::vector<Prototype>& prototypes);

// ---------------------------------------------------------------------------
// Template pieces shared between the float production path and the double
// gradient-check instantiation.

template <typename T>
std::vector<double> embed_batch(nn::EmbeddingNet<T>& net,
                                const std::vector<const prepare::CorrelationFeature*>& features,
                                nn::BnMode mode) {
    std::vector<const Matrix*> mats;
    mats.reserve(features.size());
    for (const auto* f : features) mats.push_back(&f->matrix);
    const std::vector<T> emb = net.forward(nn::features_to_tensor<T>(mats), mode);
    return std::vector<double>(emb.begin(), emb.end());
}

/// Inference-mode embedding of one feature.
template <typename T>
std::vector<double> embed(nn::EmbeddingNet<T>& net, const prepare::CorrelationFeature& feature) {
    std::vector<const prepare::CorrelationFeature*> one{&feature};
    return embed_batch(net, one, nn::BnMode::eval);
}

/// One prototype per class: the mean of the class's embedded support.
/// When expected_class_ids is non-empty a class without support is an
/// EpisodeError.
template <typename T>
std::vector<Prototype> compute_prototypes(nn::EmbeddingNet<T>& net,
                                          const std::vector<const prepare::CorrelationFeature*>& support,
                                          const std::vector<int>& labels,
                                          const std::vector<int>& expected_class_ids = {}) {
    if (support.empty()) throw EpisodeError("prototypes need at least one support sample");
    if (support.size() != labels.size()) throw ShapeError("support/label count mismatch");
    const std::vector<double> emb = embed_batch(net, support, nn::BnMode::eval);
    const std::size_t dim = emb.size() / support.size();

    std::map<int, std::vector<std::vector<double>>> grouped;
    for (std::size_t i = 0; i < support.size(); ++i)
        grouped[labels[i]].push_back(
            std::vector<double>(emb.begin() + i * dim, emb.begin() + (i + 1) * dim));
    for (const int cid : expected_class_ids)
        if (!grouped.count(cid))
            throw EpisodeError("class " + std::to_string(cid) + " has no support sample");

    std::vector<Prototype> prototypes;
    for (const auto& [cid, members] : grouped)
        prototypes.push_back({cid, pairwise_mean(members)});
    return prototypes;
}

namespace detail {

struct EpisodeForward {
    double loss = 0.0;
    std::size_t dim = 0;
    std::vector<double> embeddings;                        // (support+query) x dim
    std::vector<std::vector<double>> prototypes;           // K x dim, class_ids order
    std::vector<std::vector<std::size_t>> class_support;   // support row indices per class
    std::vector<double> probs;                             // Q x K
    std::vector<int> query_class;                          // episode-local label per query
};

void check_episode(const Episode& ep);

/// Prototype loss of Eq.-style softmax over negated squared distances,
/// computed from the batched embeddings.
EpisodeForward episode_math(const Episode& ep, const std::vector<double>& embeddings,
                            std::size_t dim);

/// Gradient of the loss w.r.t. every embedding row (support rows via the
/// prototype means, query rows directly).
std::vector<double> embedding_gradient(const Episode& ep, const EpisodeForward& fwd);

}  // namespace detail

template <typename T>
detail::EpisodeForward episode_forward(nn::EmbeddingNet<T>& net, const Episode& ep,
                                       nn::BnMode mode) {
    detail::check_episode(ep);
    std::vector<const prepare::CorrelationFeature*> batch = ep.support;
    batch.insert(batch.end(), ep.query.begin(), ep.query.end());
    const std::vector<double> embeddings = embed_batch(net, batch, mode);
    return detail::episode_math(ep, embeddings, static_cast<std::size_t>(net.embedding_dim()));
}

/// Pure loss evaluation; no optimizer state or running statistics change.
template <typename T>
double episode_loss(nn::EmbeddingNet<T>& net, const Episode& ep) {
    return episode_forward(net, ep, nn::BnMode::frozen_batch).loss;
}

/// Loss plus parameter gradients (accumulated into the net's params).
template <typename T>
double episode_backward(nn::EmbeddingNet<T>& net, const Episode& ep, nn::BnMode mode) {
    const detail::EpisodeForward fwd = episode_forward(net, ep, mode);
    const std::vector<double> d_emb = detail::embedding_gradient(ep, fwd);
    net.backward(std::vector<T>(d_emb.begin(), d_emb.end()));
    return fwd.loss;
}

template <typename T>
double episode_step(nn::EmbeddingNet<T>& net, const Episode& ep, nn::Adam<T>& adam, double lr) {
    adam.zero_grad();
    const double loss = episode_backward(net, ep, nn::BnMode::train);
    adam.step(lr);
    return loss;
}

template <typename T>
ClassifyResult classify(nn::EmbeddingNet<T>& net, const std::vector<Prototype>& prototypes,
                        const prepare::CorrelationFeature& feature) {
    return classify_embedding(embed(net, feature), prototypes);
}

// ---------------------------------------------------------------------------

struct PretrainResult {
    std::vector<double> epoch_loss;   // mean cross-entropy per epoch
    double train_accuracy = 0.0;      // on the merged set, final parameters
};

/// Cross-entropy pretraining of the embedding through a temporary linear
/// head over the training classes; the head is discarded.
PretrainResult pretrain_embedding(nn::EmbeddingNet<float>& net,
                                  const std::vector<prepare::CorrelationFeature>& features,
                                  const TrainConfig& cfg);

/// Pretraining followed by episodic updates of the prototype loss.
/// Deterministic for a fixed config and dataset.
TrainResult train(const std::vector<prepare::CorrelationFeature>& features,
                  const TrainConfig& cfg);

}  // namespace wisense::fewshot
