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
#include <string>
#include <vector>

#include "wisense/fewshot.hpp"
#include "wisense/net.hpp"
#include "wisense/prepare.hpp"

namespace wisense::metrics {

/// K x K counts; row = true class, column = predicted class.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(int k = 0) : classes(k), counts(static_cast<std::size_t>(k) * k, 0) {}

    std::size_t& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * classes + pred]; }
    std::size_t at(int truth, int pred) const {
        return counts[static_cast<std::size_t>(truth) * classes + pred];
    }
    std::size_t total() const;
    std::size_t trace() const;
};

struct ClassMetrics {
    int class_id = 0;
    double accuracy = 0.0;   // class-conditional: correct within the class
    double precision = 0.0;  // TP / (TP + FP)
    double recall = 0.0;     // TP / (TP + FN)
    double f1 = 0.0;         // 2 * P * R / (P + R)
    std::size_t support = 0;
    bool degenerate = false;  // no positives predicted nor present
};

struct EvalReport {
    ConfusionMatrix confusion{0};
    std::vector<ClassMetrics> per_class;
    double mean_accuracy = 0.0;   // unweighted over classes
    double mean_f1 = 0.0;
    double overall_accuracy = 0.0;  // trace / total
};

/// One-vs-rest precision/recall/F1 per class plus unweighted means.
/// predictions and truths must be equal-length class ids in [0, classes).
EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths,
                    int classes);

// ---------------------------------------------------------------------------
// Conventional CNN classifier: the same conv trunk as the embedding net,
// topped with a three-layer fully connected head. No episodic adaptation;
// the comparison baseline for cross-environment transfer.

struct BaselineConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 1e-3;
    int lr_halving_interval = 2000;  // optimizer steps
    int head_hidden = 64;
    std::uint64_t rng_seed = 1;
    nn::NetConfig net{};
};

class BaselineCnn {
public:
    BaselineCnn(nn::NetConfig net_cfg, int head_hidden, int classes);

    /// Supervised cross-entropy training; per-epoch mean loss returned.
    std::vector<double> train(const std::vector<prepare::CorrelationFeature>& features,
                              const BaselineConfig& cfg);

    /// Softmax distribution over the class ids seen at training time.
    fewshot::ClassifyResult classify(const prepare::CorrelationFeature& feature);

    int classes() const { return classes_; }
    nn::EmbeddingNet<float>& trunk() { return trunk_; }
    std::vector<nn::Linear<float>>& head() { return head_; }
    std::vector<int>& class_ids() { return class_ids_; }

private:
    std::vector<float> head_forward(const std::vector<float>& emb, int batch);
    void head_backward(const std::vector<float>& dlogits);

    nn::EmbeddingNet<float> trunk_;
    std::vector<nn::Linear<float>> head_;  // three layers, ReLU between
    std::vector<std::vector<float>> relu_cache_;
    int classes_ = 0;
    std::vector<int> class_ids_;  // head output order
};

BaselineCnn baseline_cnn_train(const std::vector<prepare::CorrelationFeature>& features,
                               const BaselineConfig& cfg, std::vector<double>* epoch_loss = nullptr);

}  // namespace wisense::metrics
