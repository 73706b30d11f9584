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

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "swcf/config.hpp"
#include "swcf/error.hpp"
#include "swcf/io.hpp"

namespace swcf {
namespace {

using nlohmann::json;
using Cli = std::vector<std::pair<std::string, std::string>>;

TEST(Resolve, ProductionDefaults) {
    const RunConfig c = resolve_config(std::nullopt, {});
    EXPECT_EQ(c.preset, "production");
    EXPECT_EQ(c.net.p, 176u);
    EXPECT_EQ(c.net.k, 16u);
    EXPECT_EQ(c.net.num_layers, 4u);
    EXPECT_EQ(c.train.lr0, 1e-2);
    EXPECT_EQ(c.train.decay, 0.95);
    EXPECT_EQ(c.train.epochs, 100u);
    EXPECT_EQ(c.train.points_per_sample, 45056u);
    EXPECT_EQ(c.train.batch_size, 5u);
}

TEST(Resolve, DeskPreset) {
    const RunConfig c = resolve_config(std::nullopt, {{"preset", "desk"}});
    EXPECT_EQ(c.net.channel_widths, (std::vector<std::size_t>{8, 16, 32, 32}));
    EXPECT_EQ(c.train.epochs, TrainConfig::desk().epochs);
    EXPECT_THROW(resolve_config(std::nullopt, {{"preset", "laptop"}}), ConfigError);
}

TEST(Resolve, ThreeLayerPrecedence) {
    const json file = {{"k", 12}, {"epochs", 7}, {"fusion", "concat"}};
    const RunConfig from_file = resolve_config(file, {});
    EXPECT_EQ(from_file.net.k, 12u);
    EXPECT_EQ(from_file.train.epochs, 7u);
    EXPECT_EQ(from_file.net.fusion, FusionMode::kConcat);
    EXPECT_EQ(from_file.net.p, 176u);

    const RunConfig from_cli = resolve_config(file, {{"k", "9"}, {"lr0", "0.002"}});
    EXPECT_EQ(from_cli.net.k, 9u);
    EXPECT_EQ(from_cli.train.lr0, 0.002);
    EXPECT_EQ(from_cli.train.epochs, 7u);
}

TEST(Resolve, PresetFromFileCanBeOverridden) {
    const json file = {{"preset", "desk"}};
    EXPECT_EQ(resolve_config(file, {}).net.p, NetworkConfig::desk().p);
    EXPECT_EQ(resolve_config(file, {{"preset", "production"}}).net.p, 176u);
}

TEST(Resolve, Errors) {
    EXPECT_THROW(resolve_config(json{{"kk", 3}}, {}), ConfigError);
    EXPECT_THROW(resolve_config(std::nullopt, {{"kk", "3"}}), ConfigError);
    EXPECT_THROW(resolve_config(json{{"k", "three"}}, {}), ConfigError);
    EXPECT_THROW(resolve_config(json{{"k", -3}}, {}), ConfigError);
    EXPECT_THROW(resolve_config(json{{"layer_norm", 1}}, {}), ConfigError);
    EXPECT_THROW(resolve_config(std::nullopt, {{"fusion", "sum"}}), ConfigError);
    EXPECT_THROW(resolve_config(std::nullopt, {{"heads", "5"}}), ConfigError);
    EXPECT_THROW(resolve_config(std::nullopt, {{"decay", "0"}}), ConfigError);
}

TEST(CliValue, Parsing) {
    EXPECT_EQ(parse_cli_value("3"), json(3));
    EXPECT_EQ(parse_cli_value("0.25"), json(0.25));
    EXPECT_EQ(parse_cli_value("true"), json(true));
    EXPECT_EQ(parse_cli_value("[1,2]"), json::array({1, 2}));
    EXPECT_EQ(parse_cli_value("8,16,32"), json::array({8, 16, 32}));
    EXPECT_EQ(parse_cli_value("orthogonal"), json("orthogonal"));
    const RunConfig c = resolve_config(std::nullopt, {{"global_layers", "2,3"}, {"class_weights", "[1,2,3,4]"},
                                                      {"preset", "desk"}});
    EXPECT_EQ(c.net.global_layers, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(c.train.class_weights, (std::vector<double>{1, 2, 3, 4}));
}

TEST(CliValue, StringKeysStayStrings) {
    const RunConfig c = resolve_config(std::nullopt, {{"checkpoint", "123"}, {"metrics", "true"}});
    EXPECT_EQ(c.checkpoint, "123");
    EXPECT_EQ(c.metrics, "true");
}

TEST(NetworkJson, RoundTrip) {
    NetworkConfig n = NetworkConfig::desk();
    n.fusion = FusionMode::kLocalOnly;
    n.kernel = KernelMode::kScalar;
    n.orth_denominator = OrthDenominator::kNorm;
    n.fps_start = 5;
    n.layer_norm = true;
    n.global_layers = {1, 4};
    const NetworkConfig m = network_from_json(network_to_json(n));
    EXPECT_EQ(network_to_json(m), network_to_json(n));
    EXPECT_EQ(m.fps_start, std::optional<std::size_t>(5));
    EXPECT_EQ(m.kernel, KernelMode::kScalar);
    EXPECT_THROW(network_from_json(json{{"lr0", 0.1}}), ConfigError);
    EXPECT_THROW(network_from_json(json::array()), ConfigError);
}

TEST(RunJson, EveryKeyIsSerialized) {
    const json j = to_json(RunConfig::from_preset("desk"));
    for (const auto& k : config_keys()) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j.size(), config_keys().size());
    RunConfig back = RunConfig::from_preset("production");
    for (const auto& [k, v] : j.items()) set_key(back, k, v);
    EXPECT_EQ(to_json(back), j);
}

TEST(ConfigFile, LoadAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "swcf_config_test";
    std::filesystem::create_directories(dir);
    write_file(dir / "ok.json", R"({"k": 5, "preset": "desk"})");
    write_file(dir / "bad.json", "{k: 5");
    write_file(dir / "list.json", "[1]");
    EXPECT_EQ(resolve_config(load_config_file(dir / "ok.json"), {}).net.k, 5u);
    EXPECT_THROW(load_config_file(dir / "bad.json"), ConfigError);
    EXPECT_THROW(load_config_file(dir / "list.json"), ConfigError);
    EXPECT_THROW(load_config_file(dir / "none.json"), IoError);
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace swcf
