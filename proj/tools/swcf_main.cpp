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


// swcf: train, evaluate and inspect SWCF-Net models from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "swcf/checkpoint.hpp"
#include "swcf/config.hpp"
#include "swcf/csv.hpp"
#include "swcf/dataset.hpp"
#include "swcf/error.hpp"
#include "swcf/global_encoder.hpp"
#include "swcf/grad_suite.hpp"
#include "swcf/io.hpp"
#include "swcf/network.hpp"
#include "swcf/training.hpp"

namespace {

using namespace swcf;

constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 4;
constexpr std::uint64_t kTrainStream = 0x747261696e;
constexpr std::uint64_t kEvalStream = 0x6576616c;

/// Config sources gathered while parsing one subcommand.
struct ConfigArgs {
    std::string file;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;

    RunConfig resolve() const {
        std::optional<nlohmann::json> j;
        if (!file.empty()) j = load_config_file(file);
        std::vector<std::pair<std::string, std::string>> cli;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
            cli.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        cli.insert(cli.end(), flags.begin(), flags.end());
        return resolve_config(j, cli);
    }
};

void add_config_options(CLI::App* app, ConfigArgs& args) {
    app->add_option("-c,--config", args.file, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--set", args.sets, "key=value override (repeatable)");
    for (const std::string& key : config_keys()) {
        app->add_option_function<std::string>(
               "--" + key, [&args, key](const std::string& v) { args.flags.emplace_back(key, v); },
               "override config key '" + key + "'")
            ->group("Config keys");
    }
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

int cmd_train(const ConfigArgs& args) {
    const RunConfig cfg = args.resolve();
    const Dataset data = load_dataset(cfg);
    ModelState model = ModelState::init(cfg.net);
    std::cerr << "training " << format_millions(param_count(model)) << " parameters on " << data.clouds.size()
              << " clouds\n";
    const TrainResult result = train(model, data.clouds, cfg.net, cfg.train, RngState(cfg.net.seed).fork(kTrainStream),
                                     [](const StepLog& s) {
                                         if (s.step % 10 == 0)
                                             std::cerr << "epoch " << s.epoch << " step " << s.step << " loss "
                                                       << format_double(s.loss) << " acc " << fixed3(s.acc) << "\n";
                                     });
    save_checkpoint(cfg.checkpoint, snapshot(model, cfg.net));
    write_file(cfg.metrics, metric_csv(result.log));
    if (!result.log.empty()) {
        const StepLog& last = result.log.back();
        std::cout << "steps " << result.log.size() << " loss " << format_double(last.loss) << " acc "
                  << fixed3(last.acc) << " miou " << fixed3(last.miou) << "\n";
    }
    std::cout << "checkpoint " << cfg.checkpoint << "\nmetrics " << cfg.metrics << "\n";
    return 0;
}

ConfusionMatrix predicted_confusion(const RunConfig& cfg, const Dataset& data, const std::string& pred_dir) {
    const LabelMap map = label_map_for(cfg);
    ConfusionMatrix cm(cfg.net.num_classes);
    for (std::size_t i = 0; i < data.clouds.size(); ++i) {
        const auto& truth = data.clouds[i].labels;
        if (!truth) throw DataError("scan " + data.names[i] + " has no labels");
        const auto pred = map.to_train(decode_labels(read_file(std::filesystem::path(pred_dir) / (data.names[i] + ".label"))));
        if (pred.size() != truth->size())
            throw FormatError("prediction count for " + data.names[i] + " differs from its point count");
        cm.add_all(*truth, pred);
    }
    return cm;
}

ConfusionMatrix model_confusion(const RunConfig& cfg, const Dataset& data) {
    const LoadedModel loaded = load_model(cfg.checkpoint);
    if (loaded.config.num_classes != cfg.net.num_classes)
        throw ConfigError("checkpoint has " + std::to_string(loaded.config.num_classes) + " classes, config has " +
                          std::to_string(cfg.net.num_classes));
    const RngState rng = RngState(loaded.config.seed).fork(kEvalStream);
    const std::size_t threads = std::max<std::size_t>(cfg.train.threads, 1);
    std::vector<ConfusionMatrix> parts(data.clouds.size(), ConfusionMatrix(cfg.net.num_classes));
    auto run = [&](std::size_t i) {
        const auto& cloud = data.clouds[i];
        if (!cloud.labels) throw DataError("scan " + data.names[i] + " has no labels");
        parts[i].add_all(*cloud.labels, infer(cloud, loaded.model, loaded.config, rng.fork(i)));
    };
    for (std::size_t start = 0; start < data.clouds.size(); start += threads) {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = start; i < std::min(start + threads, data.clouds.size()); ++i)
            jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, run, i));
        for (auto& j : jobs) j.get();
    }
    ConfusionMatrix cm(cfg.net.num_classes);
    for (const auto& p : parts) cm.merge(p);
    return cm;
}

int cmd_eval(const ConfigArgs& args, const std::string& pred_dir, const std::string& out) {
    const RunConfig cfg = args.resolve();
    const Dataset data = load_dataset(cfg);
    const ConfusionMatrix cm = pred_dir.empty() ? model_confusion(cfg, data) : predicted_confusion(cfg, data, pred_dir);
    const MiouResult r = miou(cm, cfg.exclude_absent);
    std::ostringstream csv;
    csv << "class,iou\n";
    std::cout << "class  iou\n";
    for (std::size_t c = 0; c < r.iou.size(); ++c) {
        const std::string v = r.iou[c] ? fixed3(*r.iou[c]) : "-";
        std::cout << c << "  " << v << "\n";
        csv << c << "," << (r.iou[c] ? format_double(*r.iou[c]) : "nan") << "\n";
    }
    csv << "mean," << format_double(r.mean) << "\naccuracy," << format_double(r.accuracy) << "\n";
    std::cout << "mIoU " << fixed3(r.mean) << "\naccuracy " << fixed3(r.accuracy) << "\n";
    if (!out.empty()) write_file(out, csv.str());
    return 0;
}

int cmd_infer(const ConfigArgs& args, const std::string& scan_path, const std::string& out) {
    const RunConfig cfg = args.resolve();
    const LoadedModel loaded = load_model(cfg.checkpoint);
    RunConfig map_cfg = cfg;
    map_cfg.net.num_classes = loaded.config.num_classes;
    const LabelMap map = label_map_for(map_cfg);
    const KittiScan scan = read_kitti_scan(scan_path);
    const PointCloud cloud = to_point_cloud(scan, map, loaded.config.input_channels);
    const auto pred = infer(cloud, loaded.model, loaded.config, RngState(loaded.config.seed).fork(kEvalStream).fork(0));
    write_labels(out, map.to_raw(pred));
    std::cout << "points " << pred.size() << "\nlabels " << out << "\n";
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, const BenchOptions& opts, const std::string& out) {
    const BenchResult r = bench_attention(sizes, opts);
    const std::string csv = bench_csv(r);
    if (!out.empty()) write_file(out, csv);
    std::cout << csv;
    for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) {
        for (std::size_t j = i + 1; j < r.rows.size(); ++j) {
            if (r.rows[j].method == r.rows[i].method && r.rows[j].n == 2 * r.rows[i].n) {
                std::cout << "ratio " << r.rows[i].method << " " << r.rows[i].n << "->" << r.rows[j].n << " "
                          << fixed3(r.rows[j].median_seconds / r.rows[i].median_seconds) << "\n";
            }
        }
    }
    std::cout << "slope avg " << fixed3(r.avg_slope) << " full " << fixed3(r.full_slope) << "\n";
    return 0;
}

int cmd_grad_check(std::uint64_t seed, double tol) {
    bool ok = true;
    const auto start = std::chrono::steady_clock::now();
    run_grad_suite(seed, tol, [&](const GradCase& c) {
        ok = ok && c.passed;
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " rel_err " << format_double(c.max_rel_error)
                  << " coords " << c.coords_checked << std::endl;
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (ok ? "all gradient checks passed" : "gradient check FAILED") << " in " << fixed3(secs) << " s\n";
    return ok ? 0 : kExitCheckFailed;
}

int cmd_synth(const ConfigArgs& args, const std::string& out) {
    const RunConfig cfg = args.resolve();
    for (const auto& f : write_synthetic(cfg, out)) std::cout << f << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"SWCF-Net point cloud segmentation"};
    app.require_subcommand(1);

    ConfigArgs train_args, eval_args, infer_args, synth_args;

    auto* train_cmd = app.add_subcommand("train", "train a model; writes a checkpoint and a metric CSV");
    add_config_options(train_cmd, train_args);

    std::string pred_dir, eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "confusion matrix, per-class IoU and mIoU over a dataset");
    add_config_options(eval_cmd, eval_args);
    eval_cmd->add_option("--pred-dir", pred_dir, "score <name>.label predictions instead of a checkpoint");
    eval_cmd->add_option("-o,--out", eval_out, "CSV output (class,iou)");

    std::string scan_path, infer_out;
    auto* infer_cmd = app.add_subcommand("infer", "per-point labels for one scan");
    add_config_options(infer_cmd, infer_args);
    infer_cmd->add_option("--scan", scan_path, "input .bin scan")->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("-o,--out", infer_out, "output .label file")->required();

    std::vector<std::size_t> sizes{16384, 32768, 65536};
    BenchOptions bench;
    std::string bench_out;
    bool bench_double = false;
    auto* bench_cmd = app.add_subcommand("bench-attention", "time averaged vs full attention as N doubles");
    bench_cmd->add_option("--sizes", sizes, "point counts")->delimiter(',');
    bench_cmd->add_option("--p", bench.p, "downsampled key count");
    bench_cmd->add_option("--width", bench.width, "feature width D");
    bench_cmd->add_option("--heads", bench.heads, "attention heads");
    bench_cmd->add_option("--repeats", bench.repeats, "timed repetitions of full attention");
    bench_cmd->add_option("--avg-repeats", bench.avg_repeats, "timed repetitions of averaged attention");
    bench_cmd->add_option("--seed", bench.seed, "input seed");
    bench_cmd->add_flag("--double", bench_double, "time in float64 instead of float32");
    bench_cmd->add_option("-o,--out", bench_out, "CSV output");

    std::uint64_t grad_seed = 1;
    double grad_tol = 1e-4;
    auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference check of every op and block");
    grad_cmd->add_option("--seed", grad_seed, "input seed");
    grad_cmd->add_option("--tol", grad_tol, "relative error tolerance");

    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "write labelled synthetic scenes");
    add_config_options(synth_cmd, synth_args);
    synth_cmd->add_option("-o,--out", synth_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error E_USAGE: " << e.what() << "\n";
        return kExitUsage;
    }

    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args, pred_dir, eval_out);
    if (*infer_cmd) return cmd_infer(infer_args, scan_path, infer_out);
    if (*bench_cmd) {
        bench.single_precision = !bench_double;
        return cmd_bench(sizes, bench, bench_out);
    }
    if (*grad_cmd) return cmd_grad_check(grad_seed, grad_tol);
    if (*synth_cmd) return cmd_synth(synth_args, synth_out);
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const swcf::Error& e) {
        std::cerr << "error " << swcf::error_tag(e.code()) << ": " << e.what() << "\n";
        return swcf::exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error E_CONFIG: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error E_IO: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error E_INTERNAL: " << e.what() << "\n";
        return 2;
    }
}
