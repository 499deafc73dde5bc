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

#include "wisense/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wisense/errors.hpp"

namespace wisense::metrics {

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const std::size_t c : counts) t += c;
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (int i = 0; i < classes; ++i) t += at(i, i);
    return t;
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths,
                    int classes) {
    if (predictions.size() != truths.size())
        throw ShapeError("evaluate: prediction/truth length mismatch");
    if (predictions.empty()) throw ParameterError("evaluate: no samples");
    if (classes < 1) throw ParameterError("evaluate: class count must be >= 1");

    EvalReport report;
    report.confusion = ConfusionMatrix(classes);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (truths[i] < 0 || truths[i] >= classes || predictions[i] < 0 || predictions[i] >= classes)
            throw DataError("evaluate: class id outside [0, " + std::to_string(classes) + ")");
        ++report.confusion.at(truths[i], predictions[i]);
    }

    double acc_sum = 0.0, f1_sum = 0.0;
    for (int k = 0; k < classes; ++k) {
        ClassMetrics cm;
        cm.class_id = k;
        std::size_t tp = report.confusion.at(k, k);
        std::size_t fn = 0, fp = 0;
        for (int j = 0; j < classes; ++j) {
            if (j == k) continue;
            fn += report.confusion.at(k, j);
            fp += report.confusion.at(j, k);
        }
        cm.support = tp + fn;
        if (tp + fp == 0 && cm.support == 0) {
            cm.degenerate = true;  // never predicted, never present
        } else {
            cm.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
            cm.recall = cm.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(cm.support);
            cm.f1 = cm.precision + cm.recall == 0.0
                        ? 0.0
                        : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
        }
        cm.accuracy = cm.recall;  // class-conditional accuracy
        acc_sum += cm.accuracy;
        f1_sum += cm.f1;
        report.per_class.push_back(cm);
    }
    report.mean_accuracy = acc_sum / classes;
    report.mean_f1 = f1_sum / classes;
    report.overall_accuracy =
        static_cast<double>(report.confusion.trace()) / static_cast<double>(report.confusion.total());
    return report;
}

// ---------------------------------------------------------------------------

BaselineCnn::BaselineCnn(nn::NetConfig net_cfg, int head_hidden, int classes)
    : trunk_(net_cfg), classes_(classes) {
    head_.emplace_back(net_cfg.filters, head_hidden);
    head_.emplace_back(head_hidden, head_hidden);
    head_.emplace_back(head_hidden, classes);
}

std::vector<float> BaselineCnn::head_forward(const std::vector<float>& emb, int batch) {
    relu_cache_.assign(head_.size() - 1, {});
    std::vector<float> x = emb;
    for (std::size_t l = 0; l < head_.size(); ++l) {
        x = head_[l].forward(x, batch);
        if (l + 1 < head_.size()) {
            for (auto& v : x) v = v > 0.0f ? v : 0.0f;
            relu_cache_[l] = x;
        }
    }
    return x;
}

void BaselineCnn::head_backward(const std::vector<float>& dlogits) {
    std::vector<float> d = dlogits;
    for (std::size_t l = head_.size(); l-- > 0;) {
        d = head_[l].backward(d);
        if (l > 0) {
            const auto& mask = relu_cache_[l - 1];
            for (std::size_t i = 0; i < d.size(); ++i)
                if (!(mask[i] > 0.0f)) d[i] = 0.0f;
        }
    }
    trunk_.backward(d);
}

std::vector<double> BaselineCnn::train(const std::vector<prepare::CorrelationFeature>& features,
                                       const BaselineConfig& cfg) {
    const auto pool = fewshot::group_by_class(features);
    if (pool.size() < 2)
        throw DegenerateTrainingError("baseline training needs at least two classes");
    if (static_cast<int>(pool.size()) != classes_)
        throw ShapeError("baseline head sized for " + std::to_string(classes_) + " classes, got " +
                         std::to_string(pool.size()));
    class_ids_.clear();
    for (const auto& [cid, _] : pool) class_ids_.push_back(cid);
    std::map<int, int> class_index;
    for (std::size_t i = 0; i < class_ids_.size(); ++i) class_index[class_ids_[i]] = static_cast<int>(i);

    Rng rng(Rng::derive(cfg.rng_seed, "baseline"));
    trunk_.init(Rng::derive(cfg.rng_seed, "baseline-trunk"));
    for (auto& layer : head_) layer.init(rng);

    std::vector<nn::Param<float>*> params = trunk_.params();
    for (auto& layer : head_) {
        params.push_back(&layer.weight());
        params.push_back(&layer.bias());
    }
    nn::Adam<float> adam(params);

    std::vector<std::size_t> order(features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> epoch_losses;
    long step = 0;
    const int batch_size = std::max(1, cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<const Matrix*> mats;
            std::vector<int> targets;
            for (std::size_t i = start; i < end; ++i) {
                mats.push_back(&features[order[i]].matrix);
                targets.push_back(class_index.at(features[order[i]].label));
            }
            const int n = static_cast<int>(mats.size());

            adam.zero_grad();
            const std::vector<float> emb =
                trunk_.forward(nn::features_to_tensor<float>(mats), nn::BnMode::train);
            const std::vector<float> logits = head_forward(emb, n);

            std::vector<float> dlogits(logits.size());
            double loss = 0.0;
            for (int i = 0; i < n; ++i) {
                const float* li = logits.data() + static_cast<std::size_t>(i) * classes_;
                float* di = dlogits.data() + static_cast<std::size_t>(i) * classes_;
                double mx = li[0];
                for (int j = 1; j < classes_; ++j) mx = std::max(mx, static_cast<double>(li[j]));
                double z = 0.0;
                for (int j = 0; j < classes_; ++j) z += std::exp(static_cast<double>(li[j]) - mx);
                loss -= static_cast<double>(li[targets[i]]) - mx - std::log(z);
                for (int j = 0; j < classes_; ++j) {
                    const double p = std::exp(static_cast<double>(li[j]) - mx) / z;
                    di[j] = static_cast<float>((p - (j == targets[i] ? 1.0 : 0.0)) / n);
                }
            }
            loss /= n;
            head_backward(dlogits);
            adam.step(fewshot::scheduled_lr(cfg.learning_rate, cfg.lr_halving_interval, step));
            ++step;
            epoch_loss += loss;
            ++batches;
        }
        epoch_losses.push_back(batches == 0 ? 0.0 : epoch_loss / static_cast<double>(batches));
    }
    return epoch_losses;
}

fewshot::ClassifyResult BaselineCnn::classify(const prepare::CorrelationFeature& feature) {
    std::vector<const Matrix*> one{&feature.matrix};
    const std::vector<float> emb =
        trunk_.forward(nn::features_to_tensor<float>(one), nn::BnMode::eval);
    const std::vector<float> logits = head_forward(emb, 1);

    fewshot::ClassifyResult out;
    out.probabilities.resize(classes_);
    double mx = logits[0];
    for (int j = 1; j < classes_; ++j) mx = std::max(mx, static_cast<double>(logits[j]));
    double z = 0.0;
    int arg = 0;
    for (int j = 0; j < classes_; ++j) {
        out.probabilities[j] = std::exp(static_cast<double>(logits[j]) - mx);
        z += out.probabilities[j];
        if (logits[j] > logits[arg]) arg = j;
    }
    for (auto& p : out.probabilities) p /= z;
    out.class_id = class_ids_.empty() ? arg : class_ids_[static_cast<std::size_t>(arg)];
    return out;
}

BaselineCnn baseline_cnn_train(const std::vector<prepare::CorrelationFeature>& features,
                               const BaselineConfig& cfg, std::vector<double>* epoch_loss) {
    const auto pool = fewshot::group_by_class(features);
    BaselineCnn model(cfg.net, cfg.head_hidden, static_cast<int>(pool.size()));
    const std::vector<double> losses = model.train(features, cfg);
    if (epoch_loss) *epoch_loss = losses;
    return model;
}

}  // namespace wisense::metrics
