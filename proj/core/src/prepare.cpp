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

#include "wisense/prepare.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "wisense/errors.hpp"
#include "wisense/svd.hpp"

namespace wisense::prepare {

std::vector<double> normalize(const std::vector<double>& amplitudes) {
    if (amplitudes.empty()) throw ParameterError("normalize: empty amplitude vector");
    double sum = 0.0;
    for (const double a : amplitudes) sum += a;
    const double mean = sum / static_cast<double>(amplitudes.size());
    if (mean == 0.0)
        throw DegenerateRecordError("normalize: all-zero amplitude vector");
    std::vector<double> out(amplitudes.size());
    for (std::size_t i = 0; i < amplitudes.size(); ++i) out[i] = amplitudes[i] / mean;
    return out;
}

std::vector<DataSegment> segment(const Matrix& per_antenna, std::size_t window,
                                 std::uint8_t receiver_id, std::uint8_t antenna_id) {
    if (window == 0) throw ParameterError("segment: window length must be >= 1");
    const std::size_t packets = per_antenna.rows();
    const std::size_t count = packets / window;
    std::vector<DataSegment> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        DataSegment seg;
        seg.receiver_id = receiver_id;
        seg.antenna_id = antenna_id;
        seg.window_index = static_cast<std::uint32_t>(k);
        seg.matrix = Matrix(window, per_antenna.cols());
        for (std::size_t r = 0; r < window; ++r)
            for (std::size_t c = 0; c < per_antenna.cols(); ++c)
                seg.matrix.at(r, c) = per_antenna.at(k * window + r, c);
        out.push_back(std::move(seg));
    }
    return out;
}

DataFrame stack(const std::vector<DataSegment>& segments) {
    if (segments.empty()) throw ShapeError("stack: no segments");
    const std::size_t w = segments.front().matrix.rows();
    const std::size_t s = segments.front().matrix.cols();
    for (const auto& seg : segments) {
        if (seg.matrix.rows() != w || seg.matrix.cols() != s)
            throw ShapeError("stack: segment dimensions disagree");
        if (seg.window_index != segments.front().window_index ||
            seg.receiver_id != segments.front().receiver_id)
            throw ShapeError("stack: segments span windows or receivers");
    }
    std::vector<const DataSegment*> ordered;
    for (const auto& seg : segments) ordered.push_back(&seg);
    std::sort(ordered.begin(), ordered.end(), [](const DataSegment* a, const DataSegment* b) {
        return a->antenna_id < b->antenna_id;
    });

    DataFrame frame;
    frame.receiver_id = segments.front().receiver_id;
    frame.window_index = segments.front().window_index;
    frame.antennas = segments.size();
    frame.window = w;
    frame.subcarriers = s;
    frame.matrix = Matrix(segments.size() * w, s);
    for (std::size_t n = 0; n < ordered.size(); ++n)
        for (std::size_t r = 0; r < w; ++r)
            for (std::size_t c = 0; c < s; ++c)
                frame.matrix.at(n * w + r, c) = ordered[n]->matrix.at(r, c);
    return frame;
}

CompactFrame compact(const DataFrame& frame) {
    if (!frame.matrix.all_finite()) throw NumericError("compact: non-finite data-frame");
    const std::size_t s = frame.matrix.cols();
    const std::size_t nw = frame.matrix.rows();
    const Matrix a = frame.matrix.transposed();  // H^T, s x (n*w)

    CompactFrame out;
    out.receiver_id = frame.receiver_id;
    out.window_index = frame.window_index;
    out.matrix = Matrix(s, s);

    if (nw >= s) {
        const svd::SvdResult r = svd::svd_thin(a);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j)
                out.matrix.at(i, j) = r.u.at(i, j) * r.sigma[j];
    } else {
        // Rank-deficient regime: only n*w singular directions exist; the
        // remaining columns stay zero to keep the S x S contract.
        warn("compact: N*W = " + std::to_string(nw) + " < S = " + std::to_string(s) +
             ", zero-filling columns beyond the thin rank");
        svd::ColumnFactor f = svd::orthogonalize_columns(a);
        svd::apply_sign_convention(f.q, f.w);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < nw; ++j)
                out.matrix.at(i, j) = f.q.at(i, j) * f.sigma[j];
    }
    return out;
}

CorrelationFeature correlation(const CompactFrame& compact,
                               std::vector<std::size_t>* degenerate_rows) {
    if (!compact.matrix.all_finite()) throw NumericError("correlation: non-finite compact frame");
    const std::size_t s = compact.matrix.rows();
    const std::size_t n = compact.matrix.cols();

    CorrelationFeature feat;
    feat.receiver_id = compact.receiver_id;
    feat.window_index = compact.window_index;
    feat.matrix = Matrix(s, s);

    std::vector<double> mean(s, 0.0), sd(s, 0.0);
    std::vector<std::vector<double>> centered(s, std::vector<double>(n));
    for (std::size_t i = 0; i < s; ++i) {
        const double* row = compact.matrix.row(i);
        double m = 0.0;
        for (std::size_t k = 0; k < n; ++k) m += row[k];
        m /= static_cast<double>(n);
        mean[i] = m;
        double ss = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            centered[i][k] = row[k] - m;
            ss += centered[i][k] * centered[i][k];
        }
        sd[i] = std::sqrt(ss);
        if (sd[i] == 0.0 && degenerate_rows) degenerate_rows->push_back(i);
    }

    for (std::size_t i = 0; i < s; ++i) {
        feat.matrix.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < s; ++j) {
            double rho = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0) {
                double cov = 0.0;
                for (std::size_t k = 0; k < n; ++k) cov += centered[i][k] * centered[j][k];
                rho = cov / (sd[i] * sd[j]);
                rho = std::clamp(rho, -1.0, 1.0);
            }
            feat.matrix.at(i, j) = rho;
            feat.matrix.at(j, i) = rho;
        }
    }
    return feat;
}

Matrix stream_matrix(const CsiStream& stream, Mode mode) {
    const std::size_t packets = stream.records.size();
    const std::size_t s = packets == 0 ? 0 : stream.records.front().csi.size();
    Matrix out(packets, s);
    for (std::size_t p = 0; p < packets; ++p) {
        const auto& csi = stream.records[p].csi;
        if (csi.size() != s) throw ShapeError("stream_matrix: ragged CSI rows");
        if (mode == Mode::amplitude) {
            std::vector<double> amps(s);
            for (std::size_t k = 0; k < s; ++k)
                amps[k] = std::hypot(static_cast<double>(csi[k].re), static_cast<double>(csi[k].im));
            const std::vector<double> normed = normalize(amps);
            for (std::size_t k = 0; k < s; ++k) out.at(p, k) = normed[k];
        } else {
            // Unwrap along subcarriers; raw extractor phase keeps hardware
            // offsets, so no amplitude-style normalization applies.
            double prev = 0.0, offset = 0.0;
            for (std::size_t k = 0; k < s; ++k) {
                const double ph = std::atan2(static_cast<double>(csi[k].im),
                                             static_cast<double>(csi[k].re));
                if (k > 0) {
                    double d = ph - prev;
                    while (d > M_PI) { d -= 2.0 * M_PI; offset -= 2.0 * M_PI; }
                    while (d < -M_PI) { d += 2.0 * M_PI; offset += 2.0 * M_PI; }
                }
                prev = ph;
                out.at(p, k) = ph + offset;
            }
        }
    }
    return out;
}

std::size_t drop_degenerate_records(align::AlignedCampaign& campaign) {
    std::set<align::SeqKey> degenerate;
    for (const auto& block : campaign.blocks) {
        for (const auto& stream : block.per_antenna) {
            for (std::size_t i = 0; i < stream.records.size(); ++i) {
                bool all_zero = true;
                for (const auto& sample : stream.records[i].csi)
                    if (sample.re != 0.0f || sample.im != 0.0f) { all_zero = false; break; }
                if (all_zero) degenerate.insert(block.keys[i]);
            }
        }
    }
    if (degenerate.empty()) return 0;

    warn("dropping " + std::to_string(degenerate.size()) +
         " packet(s) with all-zero CSI amplitude");
    for (auto& block : campaign.blocks) {
        std::vector<align::SeqKey> keys;
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < block.keys.size(); ++i) {
            if (!degenerate.count(block.keys[i])) {
                kept.push_back(i);
                keys.push_back(block.keys[i]);
            }
        }
        for (auto& stream : block.per_antenna) {
            std::vector<CsiRecord> records;
            records.reserve(kept.size());
            for (const std::size_t i : kept) records.push_back(std::move(stream.records[i]));
            stream.records = std::move(records);
        }
        block.keys = std::move(keys);
    }
    campaign.common_seq = campaign.blocks.front().keys;
    return degenerate.size();
}

std::vector<CorrelationFeature> prepare_receiver(const align::AlignedReceiverBlock& block,
                                                 std::size_t window, Mode mode) {
    if (window == 0) throw ParameterError("prepare: window length must be >= 1");
    if (block.per_antenna.empty()) throw ShapeError("prepare: block has no antenna streams");

    std::vector<std::vector<DataSegment>> per_antenna_segments;
    per_antenna_segments.reserve(block.per_antenna.size());
    for (const auto& stream : block.per_antenna) {
        const Matrix m = stream_matrix(stream, mode);
        per_antenna_segments.push_back(segment(m, window, block.receiver_id, stream.antenna_id));
    }
    const std::size_t windows = per_antenna_segments.front().size();
    for (const auto& segs : per_antenna_segments)
        if (segs.size() != windows) throw ShapeError("prepare: antennas disagree on window count");

    std::vector<CorrelationFeature> features(windows);
#ifdef WISENSE_USE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(windows); ++k) {
        std::vector<DataSegment> window_segments;
        window_segments.reserve(per_antenna_segments.size());
        for (const auto& segs : per_antenna_segments)
            window_segments.push_back(segs[static_cast<std::size_t>(k)]);
        const DataFrame frame = stack(window_segments);
        features[static_cast<std::size_t>(k)] = correlation(compact(frame));
    }
    return features;
}

}  // namespace wisense::prepare
