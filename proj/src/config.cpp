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


#include "swcf/config.hpp"

#include <functional>
#include <map>

#include "swcf/error.hpp"
#include "swcf/io.hpp"

namespace swcf {

using nlohmann::json;

namespace {

std::size_t as_size(const std::string& key, const json& v) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError(key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

double as_double(const std::string& key, const json& v) {
    if (!v.is_number()) throw ConfigError(key + ": expected a number");
    return v.get<double>();
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) throw ConfigError(key + ": expected true or false");
    return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) throw ConfigError(key + ": expected a string");
    return v.get<std::string>();
}

std::vector<std::size_t> as_sizes(const std::string& key, const json& v) {
    if (!v.is_array()) throw ConfigError(key + ": expected a list of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(as_size(key, e));
    return out;
}

std::vector<double> as_doubles(const std::string& key, const json& v) {
    if (!v.is_array()) throw ConfigError(key + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_double(key, e));
    return out;
}

template <class E>
E as_enum(const std::string& key, const json& v, std::initializer_list<std::pair<const char*, E>> names) {
    const std::string s = as_string(key, v);
    std::string options;
    for (const auto& [n, e] : names) {
        if (s == n) return e;
        options += options.empty() ? n : std::string(", ") + n;
    }
    throw ConfigError(key + ": '" + s + "' is not one of " + options);
}

template <class E>
std::string enum_name(E e, std::initializer_list<std::pair<const char*, E>> names) {
    for (const auto& [n, v] : names)
        if (v == e) return n;
    return "?";
}

constexpr std::initializer_list<std::pair<const char*, FusionMode>> kFusionNames = {
    {"orthogonal", FusionMode::kOrthogonal}, {"concat", FusionMode::kConcat}, {"local_only", FusionMode::kLocalOnly}};
constexpr std::initializer_list<std::pair<const char*, OrthDenominator>> kDenomNames = {
    {"squared_norm", OrthDenominator::kSquaredNorm}, {"norm", OrthDenominator::kNorm}};
constexpr std::initializer_list<std::pair<const char*, KernelMode>> kKernelNames = {
    {"per_channel", KernelMode::kPerChannel}, {"scalar", KernelMode::kScalar}};

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"preset", [](RunConfig& c, const std::string& k, const json& v) { c.preset = as_string(k, v); }},
        {"num_layers", [](RunConfig& c, const std::string& k, const json& v) { c.net.num_layers = as_size(k, v); }},
        {"channel_widths",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.channel_widths = as_sizes(k, v); }},
        {"k", [](RunConfig& c, const std::string& k, const json& v) { c.net.k = as_size(k, v); }},
        {"downsample_ratio",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.downsample_ratio = as_double(k, v); }},
        {"p", [](RunConfig& c, const std::string& k, const json& v) { c.net.p = as_size(k, v); }},
        {"heads", [](RunConfig& c, const std::string& k, const json& v) { c.net.heads = as_size(k, v); }},
        {"global_layers",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.global_layers = as_sizes(k, v); }},
        {"num_classes", [](RunConfig& c, const std::string& k, const json& v) { c.net.num_classes = as_size(k, v); }},
        {"input_channels",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.input_channels = as_size(k, v); }},
        {"ffn_multiplier",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.ffn_multiplier = as_size(k, v); }},
        {"seed", [](RunConfig& c, const std::string& k, const json& v) { c.net.seed = as_size(k, v); }},
        {"fusion",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.fusion = as_enum(k, v, kFusionNames); }},
        {"orth_denominator",
         [](RunConfig& c, const std::string& k, const json& v) {
             c.net.orth_denominator = as_enum(k, v, kDenomNames);
         }},
        {"fusion_eps", [](RunConfig& c, const std::string& k, const json& v) { c.net.fusion_eps = as_double(k, v); }},
        {"kernel",
         [](RunConfig& c, const std::string& k, const json& v) { c.net.kernel = as_enum(k, v, kKernelNames); }},
        {"psi_on_query", [](RunConfig& c, const std::string& k, const json& v) { c.net.psi_on_query = as_bool(k, v); }},
        {"layer_norm", [](RunConfig& c, const std::string& k, const json& v) { c.net.layer_norm = as_bool(k, v); }},
        {"fps_start",
         [](RunConfig& c, const std::string& k, const json& v) {
             if (v.is_null())
                 c.net.fps_start.reset();
             else
                 c.net.fps_start = as_size(k, v);
         }},
        {"lr0", [](RunConfig& c, const std::string& k, const json& v) { c.train.lr0 = as_double(k, v); }},
        {"decay", [](RunConfig& c, const std::string& k, const json& v) { c.train.decay = as_double(k, v); }},
        {"epochs", [](RunConfig& c, const std::string& k, const json& v) { c.train.epochs = as_size(k, v); }},
        {"steps_per_epoch",
         [](RunConfig& c, const std::string& k, const json& v) { c.train.steps_per_epoch = as_size(k, v); }},
        {"batch_size", [](RunConfig& c, const std::string& k, const json& v) { c.train.batch_size = as_size(k, v); }},
        {"points_per_sample",
         [](RunConfig& c, const std::string& k, const json& v) { c.train.points_per_sample = as_size(k, v); }},
        {"class_weights",
         [](RunConfig& c, const std::string& k, const json& v) { c.train.class_weights = as_doubles(k, v); }},
        {"adam_beta1", [](RunConfig& c, const std::string& k, const json& v) { c.train.adam_beta1 = as_double(k, v); }},
        {"adam_beta2", [](RunConfig& c, const std::string& k, const json& v) { c.train.adam_beta2 = as_double(k, v); }},
        {"adam_eps", [](RunConfig& c, const std::string& k, const json& v) { c.train.adam_eps = as_double(k, v); }},
        {"threads", [](RunConfig& c, const std::string& k, const json& v) { c.train.threads = as_size(k, v); }},
        {"data_dir", [](RunConfig& c, const std::string& k, const json& v) { c.data_dir = as_string(k, v); }},
        {"label_map", [](RunConfig& c, const std::string& k, const json& v) { c.label_map = as_string(k, v); }},
        {"scene", [](RunConfig& c, const std::string& k, const json& v) { c.scene = as_string(k, v); }},
        {"scenes", [](RunConfig& c, const std::string& k, const json& v) { c.scenes = as_size(k, v); }},
        {"scene_points", [](RunConfig& c, const std::string& k, const json& v) { c.scene_points = as_size(k, v); }},
        {"data_seed", [](RunConfig& c, const std::string& k, const json& v) { c.data_seed = as_size(k, v); }},
        {"checkpoint", [](RunConfig& c, const std::string& k, const json& v) { c.checkpoint = as_string(k, v); }},
        {"metrics", [](RunConfig& c, const std::string& k, const json& v) { c.metrics = as_string(k, v); }},
        {"exclude_absent",
         [](RunConfig& c, const std::string& k, const json& v) { c.exclude_absent = as_bool(k, v); }},
    };
    return table;
}

bool is_network_key(const std::string& key) {
    static const char* const kKeys[] = {"num_layers",     "channel_widths", "k",          "downsample_ratio",
                                        "p",              "heads",          "global_layers", "num_classes",
                                        "input_channels", "ffn_multiplier", "seed",       "fusion",
                                        "orth_denominator", "fusion_eps",   "kernel",     "psi_on_query",
                                        "layer_norm",     "fps_start"};
    for (const char* k : kKeys)
        if (key == k) return true;
    return false;
}

bool is_string_key(const std::string& key) {
    static const char* const kKeys[] = {"preset", "fusion",  "orth_denominator", "kernel",    "data_dir",
                                        "label_map", "scene", "checkpoint",      "metrics"};
    for (const char* k : kKeys)
        if (key == k) return true;
    return false;
}

}  // namespace

RunConfig RunConfig::from_preset(const std::string& preset) {
    RunConfig c;
    c.preset = preset;
    if (preset == "production") {
        c.net = NetworkConfig::production();
    } else if (preset == "desk") {
        c.net = NetworkConfig::desk();
        c.train = TrainConfig::desk();
        c.scenes = 1;
    } else {
        throw ConfigError("preset: '" + preset + "' is not one of production, desk");
    }
    return c;
}

json network_to_json(const NetworkConfig& n) {
    json j;
    j["num_layers"] = n.num_layers;
    j["channel_widths"] = n.channel_widths;
    j["k"] = n.k;
    j["downsample_ratio"] = n.downsample_ratio;
    j["p"] = n.p;
    j["heads"] = n.heads;
    j["global_layers"] = n.global_layers;
    j["num_classes"] = n.num_classes;
    j["input_channels"] = n.input_channels;
    j["ffn_multiplier"] = n.ffn_multiplier;
    j["seed"] = n.seed;
    j["fusion"] = enum_name(n.fusion, kFusionNames);
    j["orth_denominator"] = enum_name(n.orth_denominator, kDenomNames);
    j["fusion_eps"] = n.fusion_eps;
    j["kernel"] = enum_name(n.kernel, kKernelNames);
    j["psi_on_query"] = n.psi_on_query;
    j["layer_norm"] = n.layer_norm;
    j["fps_start"] = n.fps_start ? json(*n.fps_start) : json(nullptr);
    return j;
}

NetworkConfig network_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("network config must be a JSON object");
    RunConfig c;
    c.net = NetworkConfig{};
    for (const auto& [key, value] : j.items()) {
        if (!is_network_key(key)) throw ConfigError("unknown network key '" + key + "'");
        set_key(c, key, value);
    }
    return c.net;
}

json to_json(const RunConfig& c) {
    json j = network_to_json(c.net);
    j["preset"] = c.preset;
    j["lr0"] = c.train.lr0;
    j["decay"] = c.train.decay;
    j["epochs"] = c.train.epochs;
    j["steps_per_epoch"] = c.train.steps_per_epoch;
    j["batch_size"] = c.train.batch_size;
    j["points_per_sample"] = c.train.points_per_sample;
    j["class_weights"] = c.train.class_weights;
    j["adam_beta1"] = c.train.adam_beta1;
    j["adam_beta2"] = c.train.adam_beta2;
    j["adam_eps"] = c.train.adam_eps;
    j["threads"] = c.train.threads;
    j["data_dir"] = c.data_dir;
    j["label_map"] = c.label_map;
    j["scene"] = c.scene;
    j["scenes"] = c.scenes;
    j["scene_points"] = c.scene_points;
    j["data_seed"] = c.data_seed;
    j["checkpoint"] = c.checkpoint;
    j["metrics"] = c.metrics;
    j["exclude_absent"] = c.exclude_absent;
    return j;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

void set_key(RunConfig& cfg, const std::string& key, const json& value) {
    for (const auto& [k, set] : setters()) {
        if (k == key) {
            set(cfg, key, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

json parse_cli_value(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (!j.is_discarded()) return j;
    if (text.find(',') != std::string::npos) {
        json list = json::parse("[" + text + "]", nullptr, false);
        if (!list.is_discarded()) return list;
    }
    return json(text);
}

json load_config_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
    if (!j.is_object()) throw ConfigError("config file " + path.string() + " must hold a JSON object");
    return j;
}

RunConfig resolve_config(const std::optional<json>& file, const std::vector<std::pair<std::string, std::string>>& cli) {
    std::string preset = "production";
    if (file && file->contains("preset")) preset = as_string("preset", file->at("preset"));
    for (const auto& [k, v] : cli)
        if (k == "preset") preset = v;
    RunConfig cfg = RunConfig::from_preset(preset);
    if (file)
        for (const auto& [k, v] : file->items()) set_key(cfg, k, v);
    for (const auto& [k, v] : cli) set_key(cfg, k, is_string_key(k) ? json(v) : parse_cli_value(v));
    cfg.preset = preset;
    cfg.net.validate();
    cfg.train.validate(cfg.net.num_classes);
    return cfg;
}

}  // namespace swcf
