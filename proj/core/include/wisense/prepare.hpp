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

#include "wisense/align.hpp"
#include "wisense/matrix.hpp"

namespace wisense::prepare {

/// Which real matrix is carved out of the complex CSI.
enum class Mode {
    amplitude,  // |h| normalized by the per-packet mean over subcarriers
    phase,      // angle(h) unwrapped along subcarriers
};

/// One antenna's W consecutive packets: a W x S matrix.
struct DataSegment {
    Matrix matrix;
    std::uint8_t receiver_id = 0;
    std::uint8_t antenna_id = 0;
    std::uint32_t window_index = 0;
};

/// The (N*W) x S stack of one receiver's antenna segments for one window.
/// Row block [n*W, (n+1)*W) holds antenna n (antenna index ascending).
struct DataFrame {
    Matrix matrix;
    std::uint8_t receiver_id = 0;
    std::uint32_t window_index = 0;
    std::size_t antennas = 0;  // N
    std::size_t window = 0;    // W
    std::size_t subcarriers = 0;  // S
};

/// S x S projection of the data-frame onto its right-singular basis.
struct CompactFrame {
    Matrix matrix;
    std::uint8_t receiver_id = 0;
    std::uint32_t window_index = 0;
};

/// S x S Pearson correlation between compact-frame rows (subcarriers).
struct CorrelationFeature {
    Matrix matrix;
    int label = -1;  // -1 = unlabeled
    std::uint8_t receiver_id = 0;
    std::uint32_t window_index = 0;
};

/// Divides each amplitude by the row mean; the result has mean one.
/// Throws DegenerateRecordError on an all-zero vector.
std::vector<double> normalize(const std::vector<double>& amplitudes);

/// Non-overlapping windows of W rows; the trailing P mod W rows are
/// discarded. W = 0 is a ParameterError; W > P yields zero segments.
std::vector<DataSegment> segment(const Matrix& per_antenna, std::size_t window,
                                 std::uint8_t receiver_id, std::uint8_t antenna_id);

/// Stacks N same-window segments into one (N*W) x S data-frame.
DataFrame stack(const std::vector<DataSegment>& segments);

/// H' = H^T * V_thin: the S x S compact frame (U * diag(sigma) up to
/// rounding). When N*W < S the thin rank is N*W and the missing columns
/// are zero-filled; the condition is reported through warn().
CompactFrame compact(const DataFrame& frame);

/// Pearson correlation between rows of the compact frame. Zero-variance
/// rows correlate to 0 off-diagonal (diagonal stays 1) and are reported in
/// degenerate_rows when given.
CorrelationFeature correlation(const CompactFrame& compact,
                               std::vector<std::size_t>* degenerate_rows = nullptr);

/// Full Step 3-4 pipeline for one aligned receiver block: per-record
/// normalization, segmentation, stacking, compaction, correlation.
/// Degenerate (all-zero amplitude) records have been filtered upstream by
/// drop_degenerate_records().
std::vector<CorrelationFeature> prepare_receiver(const align::AlignedReceiverBlock& block,
                                                 std::size_t window, Mode mode);

/// Builds the P x S real matrix for one pruned stream (normalized
/// amplitudes or unwrapped phases).
Matrix stream_matrix(const CsiStream& stream, Mode mode);

/// Removes packets whose amplitude vector is all zero on any antenna of
/// any receiver, keeping the campaign index-aligned. Returns the number of
/// packets dropped (warned, not an error).
std::size_t drop_degenerate_records(align::AlignedCampaign& campaign);

}  // namespace wisense::prepare
