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

#include "wisense/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "wisense/errors.hpp"

namespace wisense::io {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    explicit Reader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    std::size_t remaining() const { return bytes_.size() - offset_; }
    std::size_t offset() const { return offset_; }

    void need(std::size_t n, const char* what) {
        if (remaining() < n)
            throw FormatError(std::string("truncated ") + what, offset_);
    }

    std::uint8_t u8() { return bytes_[offset_++]; }

    std::uint16_t u16() {
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[offset_]) |
                                static_cast<std::uint16_t>(bytes_[offset_ + 1]) << 8;
        offset_ += 2;
        return v;
    }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 4;
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 8;
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    const std::uint8_t* data() const { return bytes_.data(); }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t offset_ = 0;
};

Reader read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return Reader(std::move(bytes));
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void write_features(const std::string& path, std::uint16_t s,
                    const std::vector<prepare::CorrelationFeature>& features) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'C', 'S', 'I', 'F'});
    put_u16(out, 1);
    put_u16(out, s);
    put_u64(out, features.size());
    for (const auto& f : features) {
        if (f.matrix.rows() != s || f.matrix.cols() != s)
            throw ShapeError("feature is not " + std::to_string(s) + "x" + std::to_string(s));
        put_u32(out, static_cast<std::uint32_t>(f.label));
        out.push_back(f.receiver_id);
        put_u32(out, f.window_index);
        for (const double v : f.matrix.data()) put_f32(out, static_cast<float>(v));
    }
    write_file(path, out);
}

FeatureFile read_features(const std::string& path) {
    Reader r = read_file(path);
    r.need(16, "feature header");
    if (std::memcmp(r.data(), "CSIF", 4) != 0) throw FormatError("bad magic (expected CSIF)", 0);
    r.u32();
    const std::uint16_t version = r.u16();
    if (version != 1) throw FormatError("unsupported feature-file version", 4);
    FeatureFile file;
    file.s = r.u16();
    const std::uint64_t count = r.u64();
    const std::size_t per_feature = 9 + static_cast<std::size_t>(file.s) * file.s * 4;
    for (std::uint64_t i = 0; i < count; ++i) {
        r.need(per_feature, "feature record");
        prepare::CorrelationFeature f;
        f.label = static_cast<std::int32_t>(r.u32());
        f.receiver_id = r.u8();
        f.window_index = r.u32();
        f.matrix = Matrix(file.s, file.s);
        for (double& v : f.matrix.data()) v = static_cast<double>(r.f32());
        file.features.push_back(std::move(f));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in feature file", r.offset());
    return file;
}

namespace {

void append_net_state(std::vector<std::uint8_t>& out, nn::EmbeddingNet<float>& net) {
    for (const std::vector<float>* tensor : net.state_tensors())
        for (const float v : *tensor) put_f32(out, v);
}

void read_net_state(Reader& r, nn::EmbeddingNet<float>& net) {
    for (std::vector<float>* tensor : net.state_tensors()) {
        r.need(tensor->size() * 4, "checkpoint tensor");
        for (float& v : *tensor) v = r.f32();
    }
}

}  // namespace

void save_protonet(const std::string& path, nn::EmbeddingNet<float>& net,
                   std::uint16_t input_size) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'C', 'S', 'I', 'M'});
    put_u16(out, 1);
    put_u16(out, static_cast<std::uint16_t>(net.config().blocks));
    put_u16(out, static_cast<std::uint16_t>(net.config().filters));
    put_u16(out, input_size);
    put_u16(out, 0);  // head layers
    put_u16(out, 0);  // head hidden
    put_u16(out, 0);  // classes
    append_net_state(out, net);
    write_file(path, out);
}

void save_baseline(const std::string& path, metrics::BaselineCnn& model,
                   std::uint16_t input_size) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'C', 'S', 'I', 'M'});
    put_u16(out, 1);
    put_u16(out, static_cast<std::uint16_t>(model.trunk().config().blocks));
    put_u16(out, static_cast<std::uint16_t>(model.trunk().config().filters));
    put_u16(out, input_size);
    put_u16(out, static_cast<std::uint16_t>(model.head().size()));
    put_u16(out, static_cast<std::uint16_t>(model.head().front().out_dim()));
    put_u16(out, static_cast<std::uint16_t>(model.classes()));
    for (const int cid : model.class_ids()) put_u32(out, static_cast<std::uint32_t>(cid));
    append_net_state(out, model.trunk());
    for (auto& layer : model.head()) {
        for (const float v : layer.weight().value) put_f32(out, v);
        for (const float v : layer.bias().value) put_f32(out, v);
    }
    write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r = read_file(path);
    r.need(18, "checkpoint header");
    if (std::memcmp(r.data(), "CSIM", 4) != 0) throw FormatError("bad magic (expected CSIM)", 0);
    r.u32();
    const std::uint16_t version = r.u16();
    if (version != 1) throw FormatError("unsupported checkpoint version", 4);

    Checkpoint ckpt;
    ckpt.net_cfg.blocks = r.u16();
    ckpt.net_cfg.filters = r.u16();
    ckpt.input_size = r.u16();
    ckpt.head_layers = r.u16();
    ckpt.head_hidden = r.u16();
    const int classes = r.u16();
    if (ckpt.net_cfg.blocks < 1 || ckpt.net_cfg.blocks > 16 || ckpt.net_cfg.filters < 1)
        throw FormatError("implausible architecture descriptor", 6);
    r.need(static_cast<std::size_t>(classes) * 4, "class ids");
    for (int i = 0; i < classes; ++i) ckpt.class_ids.push_back(static_cast<std::int32_t>(r.u32()));

    ckpt.net = nn::EmbeddingNet<float>(ckpt.net_cfg);
    read_net_state(r, ckpt.net);

    if (ckpt.head_layers > 0) {
        if (ckpt.head_layers != 3)
            throw FormatError("baseline checkpoints carry a 3-layer head", r.offset());
        const int dims[4] = {ckpt.net_cfg.filters, ckpt.head_hidden, ckpt.head_hidden, classes};
        for (int l = 0; l < 3; ++l) {
            nn::Linear<float> layer(dims[l], dims[l + 1]);
            r.need((layer.weight().value.size() + layer.bias().value.size()) * 4, "head tensor");
            for (float& v : layer.weight().value) v = r.f32();
            for (float& v : layer.bias().value) v = r.f32();
            ckpt.head.push_back(std::move(layer));
        }
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint", r.offset());
    return ckpt;
}

metrics::BaselineCnn to_baseline(Checkpoint& ckpt) {
    if (!ckpt.is_baseline()) throw DataError("checkpoint does not hold a baseline model");
    metrics::BaselineCnn model(ckpt.net_cfg, ckpt.head_hidden,
                               static_cast<int>(ckpt.class_ids.size()));
    // Copy trunk state tensor by tensor.
    auto src = ckpt.net.state_tensors();
    auto dst = model.trunk().state_tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = *src[i];
    for (std::size_t l = 0; l < ckpt.head.size(); ++l) {
        model.head()[l].weight().value = ckpt.head[l].weight().value;
        model.head()[l].bias().value = ckpt.head[l].bias().value;
    }
    model.class_ids() = ckpt.class_ids;
    return model;
}

void write_train_log(const std::string& path, const std::vector<fewshot::TrainLogEntry>& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write train log: " + path);
    out << "episode,loss,lr\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", e.episode, e.loss, e.lr);
        out << buf;
    }
}

void write_metrics_csv(const std::string& path, const metrics::EvalReport& report,
                       const std::vector<std::pair<std::string, std::string>>& extra_columns,
                       const std::vector<std::string>& class_names) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write metrics: " + path);
    for (const auto& [key, _] : extra_columns) out << key << ",";
    out << "class,accuracy_pct,precision,recall,f1\n";
    char buf[128];
    auto row = [&](const std::string& name, double acc, double prec, double rec, double f1) {
        for (const auto& [_, value] : extra_columns) out << value << ",";
        std::snprintf(buf, sizeof(buf), "%s,%.2f,%.4f,%.4f,%.4f\n", name.c_str(), 100.0 * acc, prec,
                      rec, f1);
        out << buf;
    };
    for (const auto& cm : report.per_class) {
        const std::string name = static_cast<std::size_t>(cm.class_id) < class_names.size()
                                     ? class_names[cm.class_id]
                                     : std::to_string(cm.class_id);
        row(name, cm.accuracy, cm.precision, cm.recall, cm.f1);
    }
    row("mean", report.mean_accuracy, 0.0, 0.0, report.mean_f1);
    row("overall", report.overall_accuracy, 0.0, 0.0, 0.0);
}

void write_confusion_text(const std::string& path, const metrics::ConfusionMatrix& cm,
                          const std::vector<std::string>& class_names) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write confusion matrix: " + path);
    auto name = [&](int k) {
        return static_cast<std::size_t>(k) < class_names.size() ? class_names[k]
                                                                : std::to_string(k);
    };
    out << "true\\pred";
    for (int j = 0; j < cm.classes; ++j) out << "\t" << name(j);
    out << "\n";
    for (int i = 0; i < cm.classes; ++i) {
        out << name(i);
        for (int j = 0; j < cm.classes; ++j) out << "\t" << cm.at(i, j);
        out << "\n";
    }
    const double acc = cm.total() == 0 ? 0.0
                                       : static_cast<double>(cm.trace()) /
                                             static_cast<double>(cm.total());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy\t%.2f%%\n", 100.0 * acc);
    out << buf;
}

}  // namespace wisense::io
