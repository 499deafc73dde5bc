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
#include <vector>

namespace wisense::fusion {

/// One receiver's softmax distribution over the K classes for one sample.
struct ClassProbabilities {
    std::uint8_t receiver_id = 0;
    std::vector<double> probs;
};

/// Validates the distribution contract: entries >= 0, sum within 1e-9 of 1.
void validate(const ClassProbabilities& p);

/// Superposition decision: argmax over the elementwise sum of the
/// receivers' probability vectors; ties go to the lowest class index.
int fuse(const std::vector<ClassProbabilities>& vectors);

}  // namespace wisense::fusion
