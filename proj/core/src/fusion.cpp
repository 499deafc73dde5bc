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

#include "wisense/fusion.hpp"

#include <cmath>
#include <string>

#include "wisense/errors.hpp"

namespace wisense::fusion {

void validate(const ClassProbabilities& p) {
    double sum = 0.0;
    for (const double v : p.probs) {
        if (v < 0.0) throw DataError("negative class probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("class probabilities sum to " + std::to_string(sum));
}

int fuse(const std::vector<ClassProbabilities>& vectors) {
    if (vectors.empty()) throw ParameterError("fuse: no probability vectors");
    const std::size_t k = vectors.front().probs.size();
    if (k == 0) throw ParameterError("fuse: empty probability vector");
    for (const auto& v : vectors)
        if (v.probs.size() != k)
            throw ShapeError("fuse: vectors disagree on class count (" + std::to_string(k) +
                             " vs " + std::to_string(v.probs.size()) + ")");

    std::vector<double> sum(k, 0.0);
    for (const auto& v : vectors)
        for (std::size_t i = 0; i < k; ++i) sum[i] += v.probs[i];

    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i)
        if (sum[i] > sum[best]) best = i;  // strict: ties keep the lowest index
    return static_cast<int>(best);
}

}  // namespace wisense::fusion
