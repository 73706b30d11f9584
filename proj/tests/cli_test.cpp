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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "swcf/checkpoint.hpp"
#include "swcf/csv.hpp"
#include "swcf/io.hpp"
#include "swcf/network.hpp"

namespace swcf {
namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("swcf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" SWCF_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = read_file(dir_ / "stdout.txt");
        r.err = read_file(dir_ / "stderr.txt");
        return r;
    }

    fs::path dir_;
};

TEST_F(Cli, UnknownFlagIsUsageError) {
    const Outcome r = run("train --bogus");
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("error E_USAGE:", 0), 0u) << r.err;
    EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, BadValueIsConfigError) {
    const Outcome r = run("train --k abc");
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("error E_CONFIG:", 0), 0u) << r.err;
    EXPECT_EQ(run("train --set nope=1").code, 1);
}

TEST_F(Cli, MissingDataIsIoError) {
    const Outcome r = run("eval --preset desk --data_dir missing_dir");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("error E_IO:", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
    EXPECT_EQ(run("eval --preset desk --checkpoint none.ckpt").code, 2);
}

TEST_F(Cli, ZeroLearningRateCheckpointEqualsInitialization) {
    const Outcome r = run("train --preset desk --epochs 1 --steps_per_epoch 2 --points_per_sample 256 --lr0 0");
    ASSERT_EQ(r.code, 0) << r.err;
    const LoadedModel loaded = load_model(dir_ / "swcf.ckpt");
    const ModelState init = ModelState::init(loaded.config);
    const auto a = loaded.model.parameters(), b = init.parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(bit_equal(a[i]->value, b[i]->value)) << a[i]->name;
    const CsvTable m = read_csv(read_file(dir_ / "metrics.csv"), "epoch,step,lr,loss,acc,miou");
    EXPECT_EQ(m.rows.size(), 2u);
}

TEST_F(Cli, SynthInferAndEval) {
    ASSERT_EQ(run("synth --preset desk --scene_points 600 -o scenes").code, 0);
    ASSERT_EQ(run("train --preset desk --epochs 1 --steps_per_epoch 1 --points_per_sample 128").code, 0);
    const Outcome inf = run("infer --preset desk --scan scenes/scene_0000.bin -o pred.label");
    ASSERT_EQ(inf.code, 0) << inf.err;
    EXPECT_EQ(fs::file_size(dir_ / "pred.label"), 4u * 600u);

    const Outcome perfect = run("eval --preset desk --data_dir scenes --pred-dir scenes -o iou.csv");
    ASSERT_EQ(perfect.code, 0) << perfect.err;
    EXPECT_NE(perfect.out.find("mIoU 1.000"), std::string::npos) << perfect.out;
    const CsvTable t = read_csv(read_file(dir_ / "iou.csv"), "class,iou");
    EXPECT_EQ(t.rows.back()[0], "accuracy");

    const Outcome model = run("eval --preset desk --data_dir scenes");
    EXPECT_EQ(model.code, 0) << model.err;
    EXPECT_NE(model.out.find("mIoU "), std::string::npos);
}

TEST_F(Cli, GradCheckPasses) {
    const Outcome r = run("grad-check");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("all gradient checks passed"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, BenchCsvIsStrict) {
    const Outcome r = run("bench-attention --sizes 128,256 --p 8 --width 8 --repeats 1 --avg-repeats 1 -o bench.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    const CsvTable t = read_csv(read_file(dir_ / "bench.csv"), "n,method,median_seconds,reps");
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_EQ(t.rows[0][0], "128");
    EXPECT_EQ(t.rows[1][1], "full");
    EXPECT_GT(parse_double(t.rows[2][2]), 0.0);
}

TEST_F(Cli, ConfigPrecedenceThroughFlags) {
    write_file(dir_ / "cfg.json",
               R"({"preset": "desk", "epochs": 1, "steps_per_epoch": 3, "points_per_sample": 128, "k": 6})");
    ASSERT_EQ(run("train -c cfg.json --steps_per_epoch 2").code, 0);
    const LoadedModel m = load_model(dir_ / "swcf.ckpt");
    EXPECT_EQ(m.config.k, 6u);
    EXPECT_EQ(m.config.channel_widths, NetworkConfig::desk().channel_widths);
    EXPECT_EQ(read_csv(read_file(dir_ / "metrics.csv"), "epoch,step,lr,loss,acc,miou").rows.size(), 2u);
    ASSERT_EQ(run("train -c cfg.json --set k=5 --set epochs=1").code, 0);
    EXPECT_EQ(load_model(dir_ / "swcf.ckpt").config.k, 5u);
}

}  // namespace
}  // namespace swcf
