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

namespace wisense {

/// One complex channel gain. Parsing guarantees both components finite.
struct ComplexSample {
    float re = 0.0f;
    float im = 0.0f;

    friend bool operator==(const ComplexSample&, const ComplexSample&) = default;
};

inline constexpr std::uint16_t kSeqModulus = 4096;  // 802.11 12-bit sequence space

/// One packet's CSI vector for one (receiver, antenna) pair.
struct CsiRecord {
    std::uint8_t receiver_id = 0;
    std::uint8_t antenna_id = 0;
    std::uint8_t stream_id = 0;  // single spatial stream: fixed 0
    std::uint16_t seq_num = 0;   // in [0, 4096)
    std::uint64_t timestamp_us = 0;
    std::vector<ComplexSample> csi;

    /// Position of the record in its source capture. Not part of the wire
    /// format; lets write_capture() reproduce the original interleaving.
    std::uint64_t capture_order = 0;

    friend bool operator==(const CsiRecord&, const CsiRecord&) = default;
};

/// All records of one (receiver, antenna) pair, in capture order.
struct CsiStream {
    std::uint8_t receiver_id = 0;
    std::uint8_t antenna_id = 0;
    std::uint16_t bandwidth_mhz = 20;  // 20 or 80
    std::vector<CsiRecord> records;
    /// 0 while the stream still carries raw FFT bins; set by pruning.
    std::uint16_t pruned_subcarriers = 0;

    bool pruned() const { return pruned_subcarriers != 0; }
};

/// Raw FFT size for a bandwidth: 64 bins at 20 MHz, 256 at 80 MHz.
std::uint16_t raw_subcarrier_count(std::uint16_t bandwidth_mhz);

/// Kept tone count after the guard/null mask: 52 at 20 MHz, 242 at 80 MHz.
std::uint16_t pruned_subcarrier_count(std::uint16_t bandwidth_mhz);

/// Selects which raw FFT bins survive guard/null pruning.
struct PruneMask {
    std::uint16_t bandwidth_mhz = 20;
    std::vector<std::uint16_t> keep_indices;  // strictly increasing, < raw FFT size

    /// Shipped tone plans. 20 MHz keeps the 52 VHT20 data tones
    /// (+/-1..28 minus DC, guards and the four pilots at +/-7, +/-21);
    /// 80 MHz keeps all 242 occupied tones (+/-2..122). Overridable
    /// through configuration: the counts are fixed, the index sets are a
    /// reconstruction.
    static PruneMask standard(std::uint16_t bandwidth_mhz);

    /// Keeps every raw bin (debug aid).
    static PruneMask identity(std::uint16_t bandwidth_mhz);
};

}  // namespace wisense
