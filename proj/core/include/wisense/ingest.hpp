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

#include "wisense/types.hpp"

namespace wisense::ingest {

enum class CaptureFormat {
    binary,  // canonical "CSIC" container
    csv,     // interoperability/debug
};

/// Parses a capture into one stream per (receiver, antenna) pair, first
/// appearance order, records in capture order. No pruning is applied.
///
/// Throws FormatError / PartialRecordError / SchemaError; arbitrary input
/// bytes never crash the parser.
std::vector<CsiStream> parse_capture(const std::string& path, CaptureFormat format);

/// In-memory variant used by the fuzz tests and the synthesizer.
std::vector<CsiStream> parse_capture_bytes(const std::vector<std::uint8_t>& bytes);

/// Serializes streams in the binary capture format. Records are merged by
/// their capture_order, so parse -> write reproduces the source bytes.
void write_capture(const std::string& path, const std::vector<CsiStream>& streams);
std::vector<std::uint8_t> capture_to_bytes(const std::vector<CsiStream>& streams);

void write_capture_csv(const std::string& path, const std::vector<CsiStream>& streams);

/// Projects each record's CSI vector onto mask.keep_indices (order
/// preserved, values untouched) and marks the stream pruned.
CsiStream prune_subcarriers(const CsiStream& stream, const PruneMask& mask);

}  // namespace wisense::ingest
