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


#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swcf/fusion.hpp"
#include "swcf/geometry.hpp"
#include "swcf/global_encoder.hpp"
#include "swcf/local_encoder.hpp"

namespace swcf {

struct NetworkConfig {
    std::size_t num_layers = 4;
    std::vector<std::size_t> channel_widths{16, 64, 128, 256};
    std::size_t k = 16;
    double downsample_ratio = 0.25;
    std::size_t p = 176;
    std::size_t heads = 4;
    /// 1-based indices of encoder layers that run the Average Transformer.
    std::vector<std::size_t> global_layers{1, 2, 3, 4};
    std::size_t num_classes = 19;
    std::size_t input_channels = 3;
    std::size_t ffn_multiplier = 2;
    std::uint64_t seed = 0;

    FusionMode fusion = FusionMode::kOrthogonal;
    OrthDenominator orth_denominator = OrthDenominator::kSquaredNorm;
    double fusion_eps = 1e-12;
    KernelMode kernel = KernelMode::kPerChannel;
    bool psi_on_query = false;
    bool layer_norm = false;
    /// Fixed FPS start for every Average Transformer; drawn from the stream when unset.
    std::optional<Index> fps_start;

    /// Throws ConfigError on any inconsistency.
    void validate() const;
    bool global_enabled(std::size_t layer) const;  // 0-based

    static NetworkConfig production();
    static NetworkConfig desk();
};

struct EncoderLayer {
    SWConvParams local;
    std::optional<AvgTransformerParams> global;
    FusionParams fusion;

    template <class F>
    void visit_params(F&& f) {
        local.visit_params(f);
        if (global) global->visit_params(f);
        fusion.visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        local.visit_params(f);
        if (global) global->visit_params(f);
        fusion.visit_params(f);
    }
};

struct ModelState {
    Mlp lift;                          // input channels → width[0]
    std::vector<EncoderLayer> encoder;
    std::vector<Mlp> decoder;          // decoder[l]: [up, skip_l] → width[l]
    Mlp head;                          // width[0] → classes

    /// Fresh parameters drawn from `cfg.seed`.
    static ModelState init(const NetworkConfig& cfg);

    template <class F>
    void visit_params(F&& f) {
        if (empty_) return;
        lift.visit_params(f);
        for (auto& e : encoder) e.visit_params(f);
        for (auto& d : decoder) d.visit_params(f);
        head.visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        if (empty_) return;
        lift.visit_params(f);
        for (const auto& e : encoder) e.visit_params(f);
        for (const auto& d : decoder) d.visit_params(f);
        head.visit_params(f);
    }

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    bool empty() const { return empty_; }

  private:
    bool empty_ = true;
};

/// Exact number of learnable scalars.
std::size_t param_count(const ModelState& model);
/// e.g. "3.36M"
std::string format_millions(std::size_t count);

/// Per-layer point counts and widths, used by tests and logs.
struct LayerShape {
    std::size_t points = 0;
    std::size_t width = 0;
};

struct ForwardResult {
    Var logits;                          // [N×C]
    std::vector<LayerShape> encoder;     // after each encoder layer's downsample
    std::vector<LayerShape> decoder;     // after each decoder stage
};

/// Full encoder-decoder forward pass. `cloud.features` are the raw input
/// channels (positions first). Randomness (downsampling, FPS starts) comes
/// only from `rng`, so equal streams give bit-identical logits.
ForwardResult forward(Tape& tape, const PointCloud& cloud, const ModelState& model, const NetworkConfig& cfg,
                      const RngState& rng);

/// Raw input channels: x, y, z followed by optional extra columns.
Tensor input_features(const Tensor& positions, const Tensor* extra = nullptr);

/// Argmax per row, lowest class index on ties.
std::vector<int> argmax_rows(const Tensor& logits);

std::vector<int> infer(const PointCloud& cloud, const ModelState& model, const NetworkConfig& cfg,
                       const RngState& rng);

}  // namespace swcf
