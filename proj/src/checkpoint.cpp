// Copyright 2026 The SWCF-Net Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "swcf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "swcf/config.hpp"
#include "swcf/error.hpp"
#include "swcf/io.hpp"

namespace swcf {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'W', 'C', 'F', 'C', 'K', 'P', 'T'};

class Writer {
  public:
    template <class T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void bytes(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }

  private:
    std::string out_;
};

class Reader {
  public:
    explicit Reader(std::string_view in) : in_(in) {}

    template <class T>
    T get() {
        T v;
        std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
        return v;
    }
    std::string_view take(std::size_t n) {
        if (n > in_.size() - pos_) throw FormatError("checkpoint truncated");
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

  private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string encode_checkpoint(const Checkpoint& ckpt, DType dtype) {
    Writer w;
    w.bytes(std::string_view(kMagic, sizeof kMagic));
    w.put<std::uint32_t>(ckpt.version);
    w.put<std::uint64_t>(fnv1a64(ckpt.config));
    w.put<std::uint64_t>(ckpt.config.size());
    w.bytes(ckpt.config);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
        w.bytes(t.name);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.value.rank()));
        for (std::size_t d : t.value.shape()) w.put<std::uint64_t>(d);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
        for (double v : t.value.data()) {
            if (dtype == DType::kF64)
                w.put<double>(v);
            else
                w.put<float>(static_cast<float>(v));
        }
    }
    return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) throw FormatError("not a SWCF checkpoint");
    Checkpoint ckpt;
    ckpt.version = r.get<std::uint32_t>();
    if (ckpt.version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(ckpt.version));
    const auto digest = r.get<std::uint64_t>();
    const auto config_size = r.get<std::uint64_t>();
    ckpt.config = std::string(r.take(config_size));
    if (fnv1a64(ckpt.config) != digest) throw FormatError("checkpoint config digest mismatch");
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = std::string(r.take(r.get<std::uint32_t>()));
        const auto rank = r.get<std::uint32_t>();
        if (rank > 8) throw FormatError("tensor '" + t.name + "' has rank " + std::to_string(rank));
        Shape shape(rank);
        for (auto& d : shape) d = r.get<std::uint64_t>();
        const auto dtype = r.get<std::uint8_t>();
        if (dtype > 1) throw FormatError("tensor '" + t.name + "' has unknown dtype");
        t.value = Tensor(shape);
        for (double& v : t.value.data())
            v = dtype == static_cast<std::uint8_t>(DType::kF64) ? r.get<double>() : r.get<float>();
        ckpt.tensors.push_back(std::move(t));
    }
    if (!r.done()) throw FormatError("trailing bytes after checkpoint");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, DType dtype) {
    write_file(path, encode_checkpoint(ckpt, dtype));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint snapshot(const ModelState& model, const NetworkConfig& cfg) {
    Checkpoint ckpt;
    ckpt.config = network_to_json(cfg).dump();
    model.visit_params([&](const Parameter& p) { ckpt.tensors.push_back({p.name, p.value}); });
    return ckpt;
}

void restore(ModelState& model, const Checkpoint& ckpt) {
    std::map<std::string_view, const Tensor*> by_name;
    for (const auto& t : ckpt.tensors)
        if (!by_name.emplace(t.name, &t.value).second) throw FormatError("duplicate tensor '" + t.name + "'");
    std::size_t used = 0;
    model.visit_params([&](Parameter& p) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) throw FormatError("checkpoint lacks tensor '" + p.name + "'");
        if (it->second->shape() != p.value.shape())
            throw FormatError("tensor '" + p.name + "' has shape " + shape_str(it->second->shape()) + ", expected " +
                              shape_str(p.value.shape()));
        p.value = *it->second;
        ++used;
    });
    if (used != by_name.size()) throw FormatError("checkpoint holds tensors the model does not use");
}

LoadedModel load_model(const std::filesystem::path& path) {
    const Checkpoint ckpt = load_checkpoint(path);
    const nlohmann::json j = nlohmann::json::parse(ckpt.config, nullptr, false);
    if (j.is_discarded()) throw FormatError("checkpoint config is not valid JSON");
    LoadedModel out{network_from_json(j), {}};
    out.model = ModelState::init(out.config);
    restore(out.model, ckpt);
    return out;
}

}  // namespace swcf
