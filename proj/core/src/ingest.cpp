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

#include "wisense/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "wisense/errors.hpp"

namespace wisense {

std::uint16_t raw_subcarrier_count(std::uint16_t bandwidth_mhz) {
    switch (bandwidth_mhz) {
        case 20: return 64;
        case 80: return 256;
        default:
            throw ParameterError("unsupported bandwidth " + std::to_string(bandwidth_mhz) +
                                 " MHz (expected 20 or 80)");
    }
}

std::uint16_t pruned_subcarrier_count(std::uint16_t bandwidth_mhz) {
    switch (bandwidth_mhz) {
        case 20: return 52;
        case 80: return 242;
        default:
            throw ParameterError("unsupported bandwidth " + std::to_string(bandwidth_mhz) +
                                 " MHz (expected 20 or 80)");
    }
}

PruneMask PruneMask::standard(std::uint16_t bandwidth_mhz) {
    PruneMask mask;
    mask.bandwidth_mhz = bandwidth_mhz;
    const int fft = raw_subcarrier_count(bandwidth_mhz);
    const int half = fft / 2;
    if (bandwidth_mhz == 20) {
        for (int tone = -28; tone <= 28; ++tone) {
            const int mag = std::abs(tone);
            if (tone == 0 || mag == 7 || mag == 21) continue;
            mask.keep_indices.push_back(static_cast<std::uint16_t>(tone + half));
        }
    } else {
        for (int tone = -122; tone <= 122; ++tone) {
            if (std::abs(tone) < 2) continue;
            mask.keep_indices.push_back(static_cast<std::uint16_t>(tone + half));
        }
    }
    return mask;
}

PruneMask PruneMask::identity(std::uint16_t bandwidth_mhz) {
    PruneMask mask;
    mask.bandwidth_mhz = bandwidth_mhz;
    const std::uint16_t fft = raw_subcarrier_count(bandwidth_mhz);
    mask.keep_indices.resize(fft);
    for (std::uint16_t i = 0; i < fft; ++i) mask.keep_indices[i] = i;
    return mask;
}

}  // namespace wisense

namespace wisense::ingest {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'I', 'C'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordHeaderSize = 20;

// Little-endian wire helpers.
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return offset_; }
    std::size_t remaining() const { return bytes_.size() - offset_; }

    bool take(std::size_t n) {
        if (remaining() < n) return false;
        offset_ += n;
        return true;
    }

    std::uint8_t u8() { return bytes_[offset_++]; }

    std::uint16_t u16() {
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[offset_]) |
                                static_cast<std::uint16_t>(bytes_[offset_ + 1]) << 8;
        offset_ += 2;
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 8;
        return v;
    }

    float f32() {
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 4;
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t offset_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open capture file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

/// Groups capture-order records into per-(receiver, antenna) streams.
std::vector<CsiStream> group_records(std::vector<CsiRecord> records, std::uint16_t bandwidth_mhz) {
    std::vector<CsiStream> streams;
    std::map<std::pair<std::uint8_t, std::uint8_t>, std::size_t> index;
    for (auto& rec : records) {
        const auto key = std::make_pair(rec.receiver_id, rec.antenna_id);
        auto it = index.find(key);
        if (it == index.end()) {
            CsiStream s;
            s.receiver_id = rec.receiver_id;
            s.antenna_id = rec.antenna_id;
            s.bandwidth_mhz = bandwidth_mhz;
            it = index.emplace(key, streams.size()).first;
            streams.push_back(std::move(s));
        }
        streams[it->second].records.push_back(std::move(rec));
    }
    // First-appearance order, not map order.
    std::stable_sort(streams.begin(), streams.end(), [](const CsiStream& a, const CsiStream& b) {
        const std::uint64_t oa = a.records.empty() ? 0 : a.records.front().capture_order;
        const std::uint64_t ob = b.records.empty() ? 0 : b.records.front().capture_order;
        return oa < ob;
    });
    return streams;
}

std::vector<CsiStream> parse_binary(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    if (r.remaining() < kHeaderSize) throw FormatError("capture shorter than header", r.remaining());
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic (expected CSIC)", 0);
    r.take(4);
    const std::uint16_t version = r.u16();
    if (version != kVersion)
        throw FormatError("unsupported capture version " + std::to_string(version), 4);
    const std::uint16_t bandwidth = r.u16();
    if (bandwidth != 20 && bandwidth != 80)
        throw FormatError("bad bandwidth " + std::to_string(bandwidth) + " MHz", 6);
    const std::uint64_t count = r.u64();
    const std::uint16_t raw = raw_subcarrier_count(bandwidth);

    std::vector<CsiRecord> records;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (r.remaining() < kRecordHeaderSize)
            throw PartialRecordError("record header cut short", static_cast<std::size_t>(i));
        CsiRecord rec;
        rec.receiver_id = r.u8();
        rec.antenna_id = r.u8();
        rec.stream_id = r.u8();
        r.take(1);
        rec.seq_num = r.u16();
        r.take(2);
        rec.timestamp_us = r.u64();
        const std::uint16_t sc_count = r.u16();
        r.take(2);
        if (rec.seq_num >= kSeqModulus)
            throw SchemaError("sequence number " + std::to_string(rec.seq_num) + " out of range",
                              static_cast<std::size_t>(i));
        if (sc_count != raw)
            throw SchemaError("subcarrier count " + std::to_string(sc_count) + " does not match " +
                                  std::to_string(raw) + " for " + std::to_string(bandwidth) + " MHz",
                              static_cast<std::size_t>(i));
        if (r.remaining() < static_cast<std::size_t>(sc_count) * 8)
            throw PartialRecordError("CSI samples cut short", static_cast<std::size_t>(i));
        rec.csi.resize(sc_count);
        for (std::uint16_t s = 0; s < sc_count; ++s) {
            rec.csi[s].re = r.f32();
            rec.csi[s].im = r.f32();
            if (!std::isfinite(rec.csi[s].re) || !std::isfinite(rec.csi[s].im))
                throw SchemaError("non-finite CSI sample at subcarrier " + std::to_string(s),
                                  static_cast<std::size_t>(i));
        }
        rec.capture_order = i;
        records.push_back(std::move(rec));
    }
    if (r.remaining() != 0)
        throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last record",
                          r.offset());
    return group_records(std::move(records), bandwidth);
}

constexpr const char* kCsvHeader =
    "receiver_id,antenna_id,stream_id,seq_num,timestamp_us,sc_index,re,im";

std::vector<CsiStream> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open capture file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV capture", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw FormatError("bad CSV header row", 0);

    std::vector<CsiRecord> records;
    CsiRecord current;
    bool in_record = false;
    std::size_t line_no = 1;
    auto finish = [&]() {
        if (!in_record) return;
        current.capture_order = records.size();
        records.push_back(std::move(current));
        current = CsiRecord{};
        in_record = false;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        unsigned rx, ant, st;
        unsigned long seq;
        unsigned long long ts;
        unsigned long sc;
        float re, im;
        if (std::sscanf(line.c_str(), "%u,%u,%u,%lu,%llu,%lu,%f,%f", &rx, &ant, &st, &seq, &ts, &sc,
                        &re, &im) != 8)
            throw FormatError("unparseable CSV row at line " + std::to_string(line_no), 0);
        if (sc == 0) {
            finish();
            in_record = true;
            current.receiver_id = static_cast<std::uint8_t>(rx);
            current.antenna_id = static_cast<std::uint8_t>(ant);
            current.stream_id = static_cast<std::uint8_t>(st);
            current.seq_num = static_cast<std::uint16_t>(seq);
            current.timestamp_us = ts;
        } else if (!in_record || sc != current.csi.size()) {
            throw SchemaError("non-contiguous sc_index at line " + std::to_string(line_no),
                              records.size());
        } else if (rx != current.receiver_id || ant != current.antenna_id ||
                   st != current.stream_id || seq != current.seq_num || ts != current.timestamp_us) {
            throw SchemaError("row fields change mid-record at line " + std::to_string(line_no),
                              records.size());
        }
        if (seq >= kSeqModulus)
            throw SchemaError("sequence number out of range", records.size());
        if (!std::isfinite(re) || !std::isfinite(im))
            throw SchemaError("non-finite CSI sample", records.size());
        current.csi.push_back({re, im});
    }
    finish();

    if (records.empty()) return {};
    const std::size_t len = records.front().csi.size();
    std::uint16_t bandwidth;
    if (len == 64) bandwidth = 20;
    else if (len == 256) bandwidth = 80;
    else throw SchemaError("CSV record has " + std::to_string(len) + " subcarriers (expected 64 or 256)", 0);
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].csi.size() != len)
            throw SchemaError("inconsistent subcarrier count", i);
    return group_records(std::move(records), bandwidth);
}

/// Records from all streams back in original capture order.
std::vector<const CsiRecord*> merged_records(const std::vector<CsiStream>& streams) {
    std::vector<const CsiRecord*> merged;
    for (const auto& s : streams)
        for (const auto& r : s.records) merged.push_back(&r);
    std::stable_sort(merged.begin(), merged.end(),
                     [](const CsiRecord* a, const CsiRecord* b) { return a->capture_order < b->capture_order; });
    return merged;
}

}  // namespace

std::vector<CsiStream> parse_capture_bytes(const std::vector<std::uint8_t>& bytes) {
    return parse_binary(bytes);
}

std::vector<CsiStream> parse_capture(const std::string& path, CaptureFormat format) {
    if (format == CaptureFormat::csv) return parse_csv(path);
    return parse_binary(read_file(path));
}

std::vector<std::uint8_t> capture_to_bytes(const std::vector<CsiStream>& streams) {
    const auto merged = merged_records(streams);
    const std::uint16_t bandwidth = streams.empty() ? 20 : streams.front().bandwidth_mhz;

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    put_u16(out, bandwidth);
    put_u64(out, merged.size());
    for (const CsiRecord* rec : merged) {
        out.push_back(rec->receiver_id);
        out.push_back(rec->antenna_id);
        out.push_back(rec->stream_id);
        out.push_back(0);
        put_u16(out, rec->seq_num);
        put_u16(out, 0);
        put_u64(out, rec->timestamp_us);
        put_u16(out, static_cast<std::uint16_t>(rec->csi.size()));
        put_u16(out, 0);
        for (const auto& sample : rec->csi) {
            put_f32(out, sample.re);
            put_f32(out, sample.im);
        }
    }
    return out;
}

void write_capture(const std::string& path, const std::vector<CsiStream>& streams) {
    const auto bytes = capture_to_bytes(streams);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write capture file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_capture_csv(const std::string& path, const std::vector<CsiStream>& streams) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write capture file: " + path);
    out << kCsvHeader << "\n";
    char buf[160];
    for (const CsiRecord* rec : merged_records(streams)) {
        for (std::size_t s = 0; s < rec->csi.size(); ++s) {
            // %.9g round-trips binary32 exactly.
            std::snprintf(buf, sizeof(buf), "%u,%u,%u,%u,%llu,%zu,%.9g,%.9g\n", rec->receiver_id,
                          rec->antenna_id, rec->stream_id, rec->seq_num,
                          static_cast<unsigned long long>(rec->timestamp_us), s,
                          static_cast<double>(rec->csi[s].re), static_cast<double>(rec->csi[s].im));
            out << buf;
        }
    }
}

CsiStream prune_subcarriers(const CsiStream& stream, const PruneMask& mask) {
    if (stream.pruned()) throw StateError("stream already pruned");
    if (mask.bandwidth_mhz != stream.bandwidth_mhz)
        throw MaskError("mask bandwidth " + std::to_string(mask.bandwidth_mhz) +
                        " MHz does not match stream bandwidth " + std::to_string(stream.bandwidth_mhz));
    const std::uint16_t raw = raw_subcarrier_count(stream.bandwidth_mhz);
    std::uint16_t prev = 0;
    for (std::size_t i = 0; i < mask.keep_indices.size(); ++i) {
        const std::uint16_t idx = mask.keep_indices[i];
        if (idx >= raw) throw MaskError("mask index " + std::to_string(idx) + " out of range");
        if (i > 0 && idx <= prev) throw MaskError("mask indices not strictly increasing");
        prev = idx;
    }

    CsiStream out;
    out.receiver_id = stream.receiver_id;
    out.antenna_id = stream.antenna_id;
    out.bandwidth_mhz = stream.bandwidth_mhz;
    out.pruned_subcarriers = static_cast<std::uint16_t>(mask.keep_indices.size());
    out.records.reserve(stream.records.size());
    for (const auto& rec : stream.records) {
        CsiRecord pruned = rec;
        pruned.csi.clear();
        pruned.csi.reserve(mask.keep_indices.size());
        for (const std::uint16_t idx : mask.keep_indices) pruned.csi.push_back(rec.csi[idx]);
        out.records.push_back(std::move(pruned));
    }
    return out;
}

}  // namespace wisense::ingest
