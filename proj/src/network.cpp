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


#include "swcf/network.hpp"

#include <algorithm>
#include <cstdio>

#include "swcf/error.hpp"

namespace swcf {

void NetworkConfig::validate() const {
    if (num_layers == 0) throw ConfigError("num_layers must be at least 1");
    if (channel_widths.size() != num_layers) {
        throw ConfigError("channel_widths has " + std::to_string(channel_widths.size()) + " entries for " +
                          std::to_string(num_layers) + " layers");
    }
    for (std::size_t l = 0; l < num_layers; ++l) {
        if (channel_widths[l] == 0) throw ConfigError("channel width must be positive");
        if (global_enabled(l) && (heads == 0 || channel_widths[l] % heads != 0)) {
            throw ConfigError("layer " + std::to_string(l + 1) + " width " + std::to_string(channel_widths[l]) +
                              " is not divisible by " + std::to_string(heads) + " heads");
        }
    }
    for (std::size_t g : global_layers) {
        if (g < 1 || g > num_layers) throw ConfigError("global layer " + std::to_string(g) + " outside 1.." +
                                                       std::to_string(num_layers));
    }
    if (k == 0) throw ConfigError("K must be at least 1");
    if (p == 0) throw ConfigError("P must be at least 1");
    if (!(downsample_ratio > 0.0 && downsample_ratio <= 1.0)) throw ConfigError("downsample_ratio must lie in (0, 1]");
    if (num_classes < 1) throw ConfigError("num_classes must be at least 1");
    if (input_channels < 3) throw ConfigError("input_channels must include the 3 position channels");
    if (ffn_multiplier == 0) throw ConfigError("ffn_multiplier must be positive");
    if (!(fusion_eps > 0.0)) throw ConfigError("fusion_eps must be positive");
}

bool NetworkConfig::global_enabled(std::size_t layer) const {
    return std::find(global_layers.begin(), global_layers.end(), layer + 1) != global_layers.end();
}

NetworkConfig NetworkConfig::production() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::desk() {
    NetworkConfig c;
    c.channel_widths = {8, 16, 32, 32};
    c.p = 32;
    c.num_classes = 4;
    return c;
}

ModelState ModelState::init(const NetworkConfig& cfg) {
    cfg.validate();
    RngState rng(cfg.seed);
    ModelState m;
    const auto& w = cfg.channel_widths;
    m.lift = Mlp::make("lift", cfg.input_channels, w[0], w[0], rng);
    const SWConvOptions conv_opts{cfg.kernel, cfg.psi_on_query};
    std::size_t in = w[0];
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string name = "enc" + std::to_string(l);
        EncoderLayer e;
        e.local = SWConvParams::make(name + ".local", in, w[l], w[l], rng, conv_opts);
        if (cfg.global_enabled(l)) {
            e.global = AvgTransformerParams::make(name + ".global", w[l], cfg.heads, cfg.p, cfg.k,
                                                  cfg.ffn_multiplier * w[l], rng);
            e.global->layer_norm = cfg.layer_norm;
        }
        e.fusion = FusionParams::make(name + ".fusion", w[l], rng, cfg.fusion, cfg.orth_denominator, cfg.fusion_eps);
        m.encoder.push_back(std::move(e));
        in = w[l];
    }
    // Decoder stage l upsamples the level-(l+1) features onto level l and
    // concatenates the encoder output saved at level l.
    m.decoder.resize(cfg.num_layers);
    std::size_t current = w[cfg.num_layers - 1];
    for (std::size_t l = cfg.num_layers; l-- > 0;) {
        m.decoder[l] = Mlp::make("dec" + std::to_string(l), current + w[l], w[l], w[l], rng);
        current = w[l];
    }
    m.head = Mlp::make("head", w[0], w[0], cfg.num_classes, rng);
    m.empty_ = false;
    return m;
}

std::vector<Parameter*> ModelState::parameters() {
    std::vector<Parameter*> out;
    visit_params([&out](Parameter& p) { out.push_back(&p); });
    return out;
}

std::vector<const Parameter*> ModelState::parameters() const {
    std::vector<const Parameter*> out;
    visit_params([&out](const Parameter& p) { out.push_back(&p); });
    return out;
}

std::size_t param_count(const ModelState& model) { return count_params(model); }

std::string format_millions(std::size_t count) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fM", static_cast<double>(count) / 1e6);
    return buf;
}

Tensor input_features(const Tensor& positions, const Tensor* extra) {
    const std::size_t n = positions.dim(0);
    const std::size_t ec = extra ? extra->cols() : 0;
    if (extra && extra->rows() != n) throw DimensionError("extra input channels do not match the point count");
    Tensor f(Shape{n, 3 + ec});
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) f.at(i, a) = positions.at(i, a);
        for (std::size_t c = 0; c < ec; ++c) f.at(i, 3 + c) = extra->at(i, c);
    }
    return f;
}

ForwardResult forward(Tape& tape, const PointCloud& cloud, const ModelState& model, const NetworkConfig& cfg,
                      const RngState& rng) {
    if (model.empty()) throw StateError("forward on an uninitialised model");
    cloud.validate();
    if (!cloud.features) throw StateError("forward: point cloud has no input features");
    if (cloud.features->cols() != cfg.input_channels) {
        throw DimensionError("forward: " + std::to_string(cloud.features->cols()) + " input channels, config expects " +
                             std::to_string(cfg.input_channels));
    }
    if (model.encoder.size() != cfg.num_layers) throw ConfigError("model and config layer counts differ");

    ForwardResult result;
    Tensor positions = cloud.positions;
    Var features = model.lift(tape.constant(*cloud.features));

    std::vector<Tensor> level_positions;
    std::vector<Var> skips;
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const EncoderLayer& layer = model.encoder[l];
        const std::size_t n = positions.dim(0);
        const NeighborIndex nbrs = knn(positions, positions, std::min(cfg.k, n));
        Var local = local_block(positions, features, nbrs, layer.local);
        Var global = local;
        if (layer.global) {
            RngState fps_rng = rng.fork(2 * l + 1);
            global = avg_transformer_block(positions, local, *layer.global, fps_rng, cfg.fps_start);
        }
        Var fused = fuse(local, global, layer.fusion);
        level_positions.push_back(positions);
        skips.push_back(fused);

        RngState ds_rng = rng.fork(2 * l);
        std::vector<Index> kept = random_subset(n, cfg.downsample_ratio, ds_rng);
        Tensor next(Shape{kept.size(), 3});
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (int a = 0; a < 3; ++a) next.at(i, a) = positions.at(kept[i], a);
        features = gather_rows(fused, kept);
        positions = std::move(next);
        result.encoder.push_back({kept.size(), features.value().cols()});
    }

    for (std::size_t l = cfg.num_layers; l-- > 0;) {
        const std::vector<Index> up = nn_upsample_map(positions, level_positions[l]);
        Var upsampled = gather_rows(features, up);
        features = model.decoder[l](concat(upsampled, skips[l]));
        positions = level_positions[l];
        result.decoder.push_back({positions.dim(0), features.value().cols()});
    }
    result.logits = model.head(features);
    return result;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const std::size_t rows = logits.rows(), cols = logits.cols();
    std::vector<int> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < cols; ++c)
            if (logits.at(r, c) > logits.at(r, best)) best = c;
        out[r] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> infer(const PointCloud& cloud, const ModelState& model, const NetworkConfig& cfg,
                       const RngState& rng) {
    Tape tape;
    return argmax_rows(forward(tape, cloud, model, cfg, rng).logits.value());
}

}  // namespace swcf
