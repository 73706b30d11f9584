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

#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swcf/error.hpp"
#include "swcf/grad_suite.hpp"
#include "swcf/network.hpp"
#include "swcf/synth.hpp"
#include "swcf/training.hpp"

namespace swcf {
namespace {

using oracle::random_tensor;

PointCloud random_cloud(std::uint64_t seed, std::size_t n) {
    RngState rng(seed);
    PointCloud c;
    c.positions = random_tensor({n, 3}, rng, -3, 3);
    c.features = input_features(c.positions);
    return c;
}

std::size_t mlp_count(std::size_t in, std::size_t hidden, std::size_t out) {
    return in * hidden + hidden + hidden * out + out;
}

// Parameter count from the layer recipe, written independently of the model.
std::size_t recipe_count(const NetworkConfig& c) {
    const auto& w = c.channel_widths;
    std::size_t n = mlp_count(c.input_channels, w[0], w[0]);
    std::size_t in = w[0];
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::size_t d = w[l];
        n += mlp_count(3, d, d) + 3 * mlp_count(d, d, d) + 2 * mlp_count(in, d, d);
        if (c.global_enabled(l)) n += 4 * d * d + mlp_count(d, c.ffn_multiplier * d, d);
        n += 2 * d * d + d;
        in = d;
    }
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::size_t up = l + 1 < c.num_layers ? w[l + 1] : w[l];
        n += mlp_count(up + w[l], w[l], w[l]);
    }
    return n + mlp_count(w[0], w[0], c.num_classes);
}

void jitter(ModelState& m, std::uint64_t seed) {
    RngState rng(seed);
    m.visit_params([&](Parameter& p) {
        for (double& v : p.value.data()) v += 0.05 * rng.normal();
    });
}

TEST(Config, Defaults) {
    const NetworkConfig p = NetworkConfig::production();
    EXPECT_EQ(p.num_layers, 4u);
    EXPECT_EQ(p.k, 16u);
    EXPECT_EQ(p.p, 176u);
    EXPECT_EQ(p.heads, 4u);
    EXPECT_DOUBLE_EQ(p.downsample_ratio, 0.25);
    EXPECT_EQ(p.global_layers, (std::vector<std::size_t>{1, 2, 3, 4}));
    EXPECT_EQ(p.fusion, FusionMode::kOrthogonal);
    EXPECT_FALSE(p.layer_norm);
    const NetworkConfig d = NetworkConfig::desk();
    EXPECT_EQ(d.channel_widths, (std::vector<std::size_t>{8, 16, 32, 32}));
}

TEST(Config, Validation) {
    NetworkConfig c = NetworkConfig::desk();
    c.channel_widths = {8, 16};
    EXPECT_THROW(c.validate(), ConfigError);
    c = NetworkConfig::desk();
    c.global_layers = {5};
    EXPECT_THROW(c.validate(), ConfigError);
    c = NetworkConfig::desk();
    c.channel_widths = {8, 16, 32, 30};
    EXPECT_THROW(c.validate(), ConfigError);
    c.global_layers = {1, 2, 3};
    EXPECT_NO_THROW(c.validate());
    c.downsample_ratio = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(ModelState::init(c), ConfigError);
}

TEST(ParamCount, EmptyAndLinear) {
    EXPECT_EQ(param_count(ModelState{}), 0u);
    RngState rng(1);
    EXPECT_EQ(count_params(Linear::make("l", 7, 5, rng)), 7u * 5u + 5u);
    EXPECT_EQ(count_params(Linear::make("l", 7, 5, rng, false)), 35u);
}

TEST(ParamCount, MatchesRecipeAndTensorWalk) {
    for (NetworkConfig c : {NetworkConfig::desk(), NetworkConfig::production()}) {
        const ModelState m = ModelState::init(c);
        std::size_t walk = 0;
        for (const Parameter* p : m.parameters()) walk += shape_numel(p->value.shape());
        EXPECT_EQ(param_count(m), walk);
        EXPECT_EQ(param_count(m), recipe_count(c));
    }
    NetworkConfig partial = NetworkConfig::desk();
    partial.global_layers = {2};
    EXPECT_EQ(param_count(ModelState::init(partial)), recipe_count(partial));
    EXPECT_EQ(format_millions(3360000), "3.36M");
}

TEST(ParamCount, NamesAreUnique) {
    const ModelState m = ModelState::init(NetworkConfig::desk());
    std::map<std::string, int> seen;
    for (const Parameter* p : m.parameters()) EXPECT_EQ(seen[p->name]++, 0) << p->name;
}

TEST(Forward, DegenerateStackIsLocalBlockPlusHead) {
    NetworkConfig c = NetworkConfig::desk();
    c.num_layers = 1;
    c.channel_widths = {8};
    c.downsample_ratio = 1.0;
    c.global_layers = {};
    c.k = 6;
    const ModelState m = ModelState::init(c);
    const PointCloud cloud = random_cloud(2, 40);
    Tape t;
    const Tensor logits = forward(t, cloud, m, c, RngState(3)).logits.value();
    ASSERT_EQ(logits.shape(), (Shape{40, 4}));
    EXPECT_TRUE(logits.all_finite());

    Tape u;
    Var f = m.lift(u.constant(*cloud.features));
    Var local = local_block(cloud.positions, f, knn(cloud.positions, cloud.positions, 6), m.encoder[0].local);
    Var fused = fuse(local, local, m.encoder[0].fusion);
    Var dec = m.decoder[0](concat(fused, fused));
    EXPECT_TRUE(bit_equal(m.head(dec).value(), logits));
}

TEST(Forward, SameSeedIsBitIdentical) {
    const NetworkConfig c = NetworkConfig::desk();
    const ModelState m = ModelState::init(c);
    const PointCloud cloud = random_cloud(4, 300);
    Tape a, b;
    EXPECT_TRUE(bit_equal(forward(a, cloud, m, c, RngState(5)).logits.value(),
                          forward(b, cloud, m, c, RngState(5)).logits.value()));
    Tape d;
    EXPECT_FALSE(bit_equal(forward(a, cloud, m, c, RngState(5)).logits.value(),
                           forward(d, cloud, m, c, RngState(6)).logits.value()));
}

TEST(Forward, ShapeChain) {
    const NetworkConfig c = NetworkConfig::desk();
    const ModelState m = ModelState::init(c);
    const PointCloud cloud = random_cloud(6, 512);
    Tape t;
    const ForwardResult r = forward(t, cloud, m, c, RngState(7));
    ASSERT_EQ(r.encoder.size(), 4u);
    std::size_t n = 512;
    double keep = 1.0;
    for (std::size_t l = 0; l < 4; ++l) {
        keep *= c.downsample_ratio;
        n = downsample_count(n, c.downsample_ratio);
        EXPECT_EQ(r.encoder[l].points, downsample_count(512, keep));
        EXPECT_EQ(r.encoder[l].points, n);
        EXPECT_EQ(r.encoder[l].width, c.channel_widths[l]);
    }
    const std::size_t level_points[] = {8, 32, 128, 512};
    for (std::size_t s = 0; s < 4; ++s) {
        EXPECT_EQ(r.decoder[s].points, level_points[s]);
        EXPECT_EQ(r.decoder[s].width, c.channel_widths[3 - s]);
    }
    EXPECT_EQ(r.logits.value().shape(), (Shape{512, 4}));
}

TEST(Forward, Errors) {
    const NetworkConfig c = NetworkConfig::desk();
    Tape t;
    PointCloud cloud = random_cloud(1, 64);
    EXPECT_THROW(forward(t, cloud, ModelState{}, c, RngState(1)), StateError);
    const ModelState m = ModelState::init(c);
    cloud.features = Tensor(Shape{64, 4});
    EXPECT_THROW(forward(t, cloud, m, c, RngState(1)), DimensionError);
}

TEST(Forward, MeanLogitGradient) {
    NetworkConfig c = NetworkConfig::desk();
    ModelState m = ModelState::init(c);
    jitter(m, 8);
    RngState srng(9);
    SceneSpec spec = SceneSpec::default_spec();
    spec.points = 512;
    const PointCloud cloud = synth_scene(srng, spec);
    GradCheckOptions o;
    o.max_coords_per_input = 2;
    o.step = 1e-6;  // keeps the probe clear of rectifier kinks at this size
    o.tol = 1e-3;
    const auto r = grad_check_params([&](Tape& t) { return mean(forward(t, cloud, m, c, RngState(10)).logits); },
                                     m.parameters(), o);
    EXPECT_LE(r.max_rel_error, 1e-3);
}

TEST(Forward, EveryParameterReceivesGradient) {
    const NetworkConfig c = NetworkConfig::desk();
    ModelState m = ModelState::init(c);
    const PointCloud cloud = random_cloud(11, 512);
    RngState lr(12);
    std::vector<int> labels(512);
    for (int& y : labels) y = static_cast<int>(lr.below(4));
    Tape t;
    Var loss = weighted_ce(forward(t, cloud, m, c, RngState(13)).logits, labels, std::vector<double>(4, 1.0));
    t.backward(loss);
    for (const Parameter* p : m.parameters()) {
        ASSERT_TRUE(t.has_param(*p)) << p->name;
        const Tensor g = t.param_grad(*p);
        bool nonzero = false;
        for (double v : g.data()) nonzero |= v != 0.0;
        EXPECT_TRUE(nonzero) << p->name;
    }
}

TEST(Infer, ArgmaxTiesPickLowestClass) {
    EXPECT_EQ(argmax_rows(Tensor::matrix({{0.1, 0.9, 0.3}, {2, -1, 0}, {5, 5, 1}, {1, 3, 3}})),
              (std::vector<int>{1, 0, 0, 1}));
}

TEST(Infer, TrainedTwoClusterSceneFollowsMajority) {
    NetworkConfig c = NetworkConfig::desk();
    c.num_classes = 2;
    c.seed = 3;
    const std::size_t n = 512;
    RngState rng(14);
    PointCloud cloud;
    cloud.positions = Tensor(Shape{n, 3});
    cloud.labels = std::vector<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = i < n / 2 ? 0 : 1;
        (*cloud.labels)[i] = k;
        const double cx = k == 0 ? -2.0 : 2.0;
        cloud.positions.at(i, 0) = cx + 0.8 * rng.normal();
        cloud.positions.at(i, 1) = 0.8 * rng.normal();
        cloud.positions.at(i, 2) = 0.8 * rng.normal();
    }
    cloud.features = input_features(cloud.positions);

    ModelState m = ModelState::init(c);
    TrainConfig tc = TrainConfig::desk();
    tc.epochs = 4;
    tc.steps_per_epoch = 10;
    tc.batch_size = 1;
    tc.points_per_sample = n;
    train(m, {cloud}, c, tc, RngState(15));
    const std::vector<int> pred = infer(cloud, m, c, RngState(16));
    for (int k = 0; k < 2; ++k) {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < n; ++i) agree += (*cloud.labels)[i] == k && pred[i] == k;
        EXPECT_GE(static_cast<double>(agree), 0.95 * static_cast<double>(n / 2)) << "cluster " << k;
    }
}

}  // namespace
}  // namespace swcf
