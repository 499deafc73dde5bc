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
#include "wisense/metrics.hpp"
#include "wisense/prepare.hpp"

namespace wisense::io {

// --- "CSIF" prepared-feature container -------------------------------------
// magic "CSIF", version u16, S u16, count u64; per feature: label i32
// (-1 = unlabeled), receiver_id u8, window_index u32, S*S f32 row-major.
// Little-endian throughout.

struct FeatureFile {
    std::uint16_t s = 0;
    std::vector<prepare::CorrelationFeature> features;
};

void write_features(const std::string& path, std::uint16_t s,
                    const std::vector<prepare::CorrelationFeature>& features);
FeatureFile read_features(const std::string& path);

// --- "CSIM" model checkpoint ------------------------------------------------
// magic "CSIM", version u16, then the architecture descriptor: block count
// u16, filter count u16, input size S u16, head layer count u16, head
// hidden width u16, class count u16. Baseline checkpoints carry class ids
// (i32 x class count) next. Parameters follow as f32 in a fixed order:
// per block conv weight, conv bias, bn gamma, bn beta, bn running mean,
// bn running variance; then per head layer weight, bias.

struct Checkpoint {
    nn::NetConfig net_cfg;
    std::uint16_t input_size = 0;
    nn::EmbeddingNet<float> net;
    int head_layers = 0;
    int head_hidden = 0;
    std::vector<int> class_ids;
    std::vector<nn::Linear<float>> head;

    bool is_baseline() const { return head_layers > 0; }
};

void save_protonet(const std::string& path, nn::EmbeddingNet<float>& net,
                   std::uint16_t input_size);
void save_baseline(const std::string& path, metrics::BaselineCnn& model,
                   std::uint16_t input_size);
Checkpoint load_checkpoint(const std::string& path);

/// Rebuilds a runnable baseline classifier from a baseline checkpoint.
metrics::BaselineCnn to_baseline(Checkpoint& ckpt);

// --- report files -----------------------------------------------------------

void write_train_log(const std::string& path, const std::vector<fewshot::TrainLogEntry>& log);

/// CSV with one row per class plus "mean" and "overall" rows. extra_columns
/// are prepended verbatim to every row (experiment coordinates).
void write_metrics_csv(const std::string& path, const metrics::EvalReport& report,
                       const std::vector<std::pair<std::string, std::string>>& extra_columns,
                       const std::vector<std::string>& class_names);

void write_confusion_text(const std::string& path, const metrics::ConfusionMatrix& cm,
                          const std::vector<std::string>& class_names);

}  // namespace wisense::io
