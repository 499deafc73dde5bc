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

#include "wisense/align.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "wisense/errors.hpp"

namespace wisense::align {

namespace {

constexpr int kWrapDropThreshold = 2048;

struct Annotated {
    std::vector<SeqKey> keys;       // per record; duplicates keep first
    std::vector<bool> keep;         // false for dropped duplicates
};

Annotated annotate(const CsiStream& stream) {
    Annotated out;
    out.keys.reserve(stream.records.size());
    out.keep.assign(stream.records.size(), true);

    std::uint32_t epoch = 0;
    int prev_seq = -1;
    std::set<SeqKey> seen;
    std::map<std::uint16_t, std::uint64_t> last_ts_for_seq;  // across epochs

    for (std::size_t i = 0; i < stream.records.size(); ++i) {
        const auto& rec = stream.records[i];
        if (prev_seq >= 0 && static_cast<int>(rec.seq_num) - prev_seq < -kWrapDropThreshold)
            ++epoch;
        prev_seq = rec.seq_num;

        const SeqKey key{epoch, rec.seq_num};
        auto ts_it = last_ts_for_seq.find(rec.seq_num);
        if (ts_it != last_ts_for_seq.end() && !seen.count(key)) {
            // Same sequence number in a new epoch: timestamps must move
            // forward or the wrap cannot be resolved.
            if (rec.timestamp_us <= ts_it->second)
                throw WraparoundError(
                    "sequence " + std::to_string(rec.seq_num) +
                    " repeats across wrap epochs without increasing timestamps");
        }

        if (seen.count(key)) {
            out.keep[i] = false;  // duplicate (retransmission): first wins
        } else {
            seen.insert(key);
            last_ts_for_seq[rec.seq_num] = rec.timestamp_us;
        }
        out.keys.push_back(key);
    }
    return out;
}

CsiStream filter_stream(const CsiStream& stream, const Annotated& ann,
                        const std::set<SeqKey>& retained) {
    CsiStream out;
    out.receiver_id = stream.receiver_id;
    out.antenna_id = stream.antenna_id;
    out.bandwidth_mhz = stream.bandwidth_mhz;
    out.pruned_subcarriers = stream.pruned_subcarriers;
    for (std::size_t i = 0; i < stream.records.size(); ++i)
        if (ann.keep[i] && retained.count(ann.keys[i])) out.records.push_back(stream.records[i]);
    return out;
}

std::vector<SeqKey> kept_keys(const Annotated& ann, const std::set<SeqKey>& retained) {
    std::vector<SeqKey> out;
    for (std::size_t i = 0; i < ann.keys.size(); ++i)
        if (ann.keep[i] && retained.count(ann.keys[i])) out.push_back(ann.keys[i]);
    return out;
}

}  // namespace

std::vector<SeqKey> annotate_epochs(const CsiStream& stream) {
    return annotate(stream).keys;
}

AlignedReceiverBlock micro_align(const std::vector<CsiStream>& streams) {
    if (streams.empty()) throw AlignmentError("micro_align needs at least one antenna stream");
    for (const auto& s : streams) {
        if (s.receiver_id != streams.front().receiver_id)
            throw AlignmentError("micro_align streams span multiple receivers");
        if (s.bandwidth_mhz != streams.front().bandwidth_mhz)
            throw AlignmentError("micro_align streams mix bandwidths");
    }

    std::vector<Annotated> ann;
    ann.reserve(streams.size());
    for (const auto& s : streams) ann.push_back(annotate(s));

    // Intersection of every antenna's key set.
    std::set<SeqKey> retained;
    for (std::size_t i = 0; i < ann[0].keys.size(); ++i)
        if (ann[0].keep[i]) retained.insert(ann[0].keys[i]);
    for (std::size_t a = 1; a < ann.size(); ++a) {
        std::set<SeqKey> keys_a;
        for (std::size_t i = 0; i < ann[a].keys.size(); ++i)
            if (ann[a].keep[i]) keys_a.insert(ann[a].keys[i]);
        std::set<SeqKey> both;
        std::set_intersection(retained.begin(), retained.end(), keys_a.begin(), keys_a.end(),
                              std::inserter(both, both.begin()));
        retained.swap(both);
    }
    if (retained.empty()) {
        std::string counts;
        for (const auto& s : streams)
            counts += " antenna " + std::to_string(s.antenna_id) + ": " +
                      std::to_string(s.records.size()) + " records;";
        throw AlignmentError("no packet captured by all antennas --" + counts);
    }

    AlignedReceiverBlock block;
    block.receiver_id = streams.front().receiver_id;
    block.keys = kept_keys(ann[0], retained);
    block.per_antenna.reserve(streams.size());
    for (std::size_t a = 0; a < streams.size(); ++a) {
        block.per_antenna.push_back(filter_stream(streams[a], ann[a], retained));
        if (kept_keys(ann[a], retained) != block.keys)
            throw AlignmentError("antenna streams disagree on capture order");
    }
    std::sort(block.per_antenna.begin(), block.per_antenna.end(),
              [](const CsiStream& a, const CsiStream& b) { return a.antenna_id < b.antenna_id; });
    return block;
}

AlignedCampaign macro_align(const std::vector<AlignedReceiverBlock>& blocks) {
    if (blocks.empty()) throw AlignmentError("macro_align needs at least one receiver block");

    std::set<SeqKey> common(blocks.front().keys.begin(), blocks.front().keys.end());
    for (std::size_t b = 1; b < blocks.size(); ++b) {
        std::set<SeqKey> keys_b(blocks[b].keys.begin(), blocks[b].keys.end());
        std::set<SeqKey> both;
        std::set_intersection(common.begin(), common.end(), keys_b.begin(), keys_b.end(),
                              std::inserter(both, both.begin()));
        common.swap(both);
    }
    if (common.empty()) throw AlignmentError("no packet captured by all receivers");

    AlignedCampaign campaign;
    for (const auto& block : blocks) {
        AlignedReceiverBlock filtered;
        filtered.receiver_id = block.receiver_id;
        for (const auto& key : block.keys)
            if (common.count(key)) filtered.keys.push_back(key);
        for (const auto& stream : block.per_antenna) {
            CsiStream fs;
            fs.receiver_id = stream.receiver_id;
            fs.antenna_id = stream.antenna_id;
            fs.bandwidth_mhz = stream.bandwidth_mhz;
            fs.pruned_subcarriers = stream.pruned_subcarriers;
            for (std::size_t i = 0; i < block.keys.size(); ++i)
                if (common.count(block.keys[i])) fs.records.push_back(stream.records[i]);
            filtered.per_antenna.push_back(std::move(fs));
        }
        campaign.blocks.push_back(std::move(filtered));
    }
    campaign.common_seq = campaign.blocks.front().keys;
    for (const auto& block : campaign.blocks)
        if (block.keys != campaign.common_seq)
            throw AlignmentError("receiver blocks disagree on capture order");
    return campaign;
}

}  // namespace wisense::align
