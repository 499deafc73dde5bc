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

#include "wisense/types.hpp"

namespace wisense::align {

/// Sequence number lifted out of the 12-bit wrap: a drop of more than
/// 2048 between consecutive records starts a new epoch.
struct SeqKey {
    std::uint32_t epoch = 0;
    std::uint16_t seq = 0;

    friend auto operator<=>(const SeqKey&, const SeqKey&) = default;
};

/// One receiver's antenna streams restricted to the packets every antenna saw.
struct AlignedReceiverBlock {
    std::uint8_t receiver_id = 0;
    std::vector<SeqKey> keys;             // retained, capture order
    std::vector<CsiStream> per_antenna;   // antenna_id ascending, index-aligned

    std::vector<std::uint16_t> seq_nums() const {
        std::vector<std::uint16_t> out;
        out.reserve(keys.size());
        for (const auto& k : keys) out.push_back(k.seq);
        return out;
    }
};

/// All receivers restricted to the packets every receiver retained.
struct AlignedCampaign {
    std::vector<AlignedReceiverBlock> blocks;
    std::vector<SeqKey> common_seq;
};

/// Epoch annotation for one stream, in record order. Duplicate (epoch, seq)
/// pairs keep the first occurrence (later entries are marked dropped).
/// Throws WraparoundError when a repeated sequence number cannot be told
/// apart by epoch inference (timestamps not strictly increasing across the
/// inferred wrap).
std::vector<SeqKey> annotate_epochs(const CsiStream& stream);

/// Step 1: drops packets not captured by all antennas of one receiver.
AlignedReceiverBlock micro_align(const std::vector<CsiStream>& streams);

/// Step 2: matches records across receivers by (epoch, sequence number).
AlignedCampaign macro_align(const std::vector<AlignedReceiverBlock>& blocks);

}  // namespace wisense::align
