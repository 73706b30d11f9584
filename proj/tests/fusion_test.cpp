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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swcf/error.hpp"
#include "swcf/fusion.hpp"
#include "swcf/grad_check.hpp"
#include "swcf/grad_suite.hpp"

namespace swcf {
namespace {

using oracle::random_tensor;

Tensor orth(const Tensor& l, const Tensor& g, OrthDenominator den = OrthDenominator::kSquaredNorm) {
    Tape t;
    return orthogonalize(t.constant(l), t.constant(g), 1e-12, den).value();
}

double dot_row(const Tensor& a, const Tensor& b, std::size_t r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a.at(r, c) * b.at(r, c);
    return s;
}

TEST(Orthogonalize, AxisProjection) {
    const Tensor o = orth(Tensor::matrix({{1, 0}}), Tensor::matrix({{3, 4}}));
    EXPECT_NEAR(o.at(0, 0), 0.0, 1e-11);
    EXPECT_NEAR(o.at(0, 1), 4.0, 1e-15);
}

TEST(Orthogonalize, ParallelCollapses) {
    RngState rng(1);
    const Tensor l = random_tensor({10, 8}, rng);
    Tensor g = l;
    for (double& v : g.data()) v *= 2.0;
    const Tensor o = orth(l, g);
    for (double v : o.data()) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Orthogonalize, ZeroLocalLeavesGlobal) {
    RngState rng(2);
    const Tensor g = random_tensor({3, 4}, rng);
    EXPECT_TRUE(bit_equal(orth(Tensor(Shape{3, 4}), g), g));
}

TEST(Orthogonalize, MatchesOracle) {
    RngState rng(3);
    const Tensor l = random_tensor({16, 8}, rng), g = random_tensor({16, 8}, rng);
    const Tensor o = orth(l, g);
    const auto lm = oracle::to_mat(l), gm = oracle::to_mat(g);
    oracle::Mat want;
    for (std::size_t r = 0; r < 16; ++r) want.push_back(oracle::orthogonalize(lm[r], gm[r]));
    EXPECT_LE(oracle::max_abs_diff(want, o), 1e-12);
    for (std::size_t r = 0; r < 16; ++r) {
        EXPECT_LE(std::abs(dot_row(o, l, r)), 1e-9 * std::sqrt(dot_row(o, o, r) * dot_row(l, l, r)));
    }
}

TEST(Orthogonalize, NormDenominatorVariant) {
    const Tensor o = orth(Tensor::matrix({{2, 0}}), Tensor::matrix({{3, 4}}), OrthDenominator::kNorm);
    // 3·2 / sqrt(4) = 3, times l = (6, 0).
    EXPECT_NEAR(o.at(0, 0), -3.0, 1e-12);
    EXPECT_NEAR(o.at(0, 1), 4.0, 1e-15);
}

TEST(Orthogonalize, ShapeMismatch) {
    EXPECT_THROW(orth(Tensor(Shape{2, 3}), Tensor(Shape{2, 4})), DimensionError);
}

TEST(Orthogonalize, InvariantsOnThousandPairs) {
    RngState rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 2 + rng.below(15);
        const Tensor l = random_tensor({1, d}, rng, -3, 3), g = random_tensor({1, d}, rng, -3, 3);
        const Tensor o = orth(l, g);
        const double ll = dot_row(l, l, 0), oo = dot_row(o, o, 0), gg = dot_row(g, g, 0);
        ASSERT_GT(std::sqrt(ll), 1e-6);
        EXPECT_LE(std::abs(dot_row(o, l, 0)), 1e-9 * std::sqrt(oo * ll) + 1e-15) << trial;
        EXPECT_LE(max_abs_diff(orth(l, o), o), 1e-10) << trial;
        const double c = rng.uniform(0.1, 10.0) * (rng.below(2) ? 1.0 : -1.0);
        Tensor cl = l;
        for (double& v : cl.data()) v *= c;
        EXPECT_LE(max_abs_diff(orth(cl, g), o), 1e-9) << trial;
        EXPECT_LE(std::sqrt(oo), std::sqrt(gg) + 1e-12) << trial;
    }
}

TEST(Orthogonalize, Gradients) {
    RngState rng(5);
    for (auto den : {OrthDenominator::kSquaredNorm, OrthDenominator::kNorm}) {
        const Tensor w = random_tensor({4, 8}, rng);
        const auto r = grad_check([&](Tape& t, std::span<const Var> in) {
            return sum(mul(orthogonalize(in[0], in[1], 1e-12, den), t.constant(w)));
        }, {random_tensor({4, 8}, rng), random_tensor({4, 8}, rng)});
        EXPECT_LE(r.max_rel_error, 1e-5);
    }
}

FusionParams make_fusion(std::uint64_t seed, std::size_t d, FusionMode mode = FusionMode::kOrthogonal) {
    RngState rng(seed);
    FusionParams f = FusionParams::make("f", d, rng, mode);
    for (double& v : f.delta.bias.value.data()) v = 0.05 * rng.normal();
    return f;
}

TEST(Fuse, SelectionWeightsPassLocalThrough) {
    const std::size_t d = 6;
    FusionParams f = make_fusion(1, d);
    f.delta.weight.value.fill(0.0);
    f.delta.bias.value.fill(0.0);
    for (std::size_t i = 0; i < d; ++i) f.delta.weight.value.at(i, i) = 1.0;
    RngState rng(2);
    const Tensor l = random_tensor({10, d}, rng, 0.0, 2.0), g = random_tensor({10, d}, rng);
    Tape t;
    EXPECT_LE(max_abs_diff(fuse(t.constant(l), t.constant(g), f).value(), l), 1e-15);
}

TEST(Fuse, ParallelGlobalAddsNothing) {
    FusionParams f = make_fusion(3, 8);
    RngState rng(4);
    const Tensor l = random_tensor({12, 8}, rng);
    Tensor g = l;
    for (double& v : g.data()) v *= -1.5;
    Tape t;
    const Tensor with_g = fuse(t.constant(l), t.constant(g), f).value();
    const Tensor without = fuse(t.constant(l), t.constant(Tensor(l.shape())), f).value();
    EXPECT_LE(max_abs_diff(with_g, without), 1e-10);
}

TEST(Fuse, Modes) {
    RngState rng(5);
    const Tensor l = random_tensor({5, 4}, rng), g = random_tensor({5, 4}, rng);
    Tape t;
    Var lv = t.constant(l), gv = t.constant(g);

    FusionParams local_only = make_fusion(6, 4, FusionMode::kLocalOnly);
    EXPECT_TRUE(bit_equal(fuse(lv, gv, local_only).value(), l));
    EXPECT_EQ(count_params(local_only), 0u);

    FusionParams cat = make_fusion(7, 4, FusionMode::kConcat);
    const Tensor got = fuse(lv, gv, cat).value();
    const auto lm = oracle::to_mat(l), gm = oracle::to_mat(g);
    for (std::size_t r = 0; r < 5; ++r) {
        oracle::Vec in = lm[r];
        in.insert(in.end(), gm[r].begin(), gm[r].end());
        oracle::Vec y = oracle::linear(cat.delta, in);
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(got.at(r, c), std::max(y[c], 0.0), 1e-14);
    }

    FusionParams orth_mode = make_fusion(7, 4, FusionMode::kOrthogonal);
    const Tensor fo = fuse(lv, gv, orth_mode).value();
    for (std::size_t r = 0; r < 5; ++r) {
        oracle::Vec in = lm[r];
        const oracle::Vec o = oracle::orthogonalize(lm[r], gm[r]);
        in.insert(in.end(), o.begin(), o.end());
        oracle::Vec y = oracle::linear(orth_mode.delta, in);
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(fo.at(r, c), std::max(y[c], 0.0), 1e-12);
    }
    EXPECT_EQ(count_params(orth_mode), 8u * 4u + 4u);
}

TEST(Fuse, Gradients) {
    FusionParams f = make_fusion(8, 8);
    RngState rng(9);
    const Tensor l = random_tensor({32, 8}, rng), g = random_tensor({32, 8}, rng);
    const auto r = grad_check([&](Tape&, std::span<const Var> in) {
        Var y = fuse(in[0], in[1], f);
        return mean(mul(y, y));
    }, {l, g});
    EXPECT_LE(r.max_rel_error, 1e-4);
    std::vector<Parameter*> params;
    f.visit_params([&](Parameter& p) { params.push_back(&p); });
    const auto rp = grad_check_params([&](Tape& t) {
        Var y = fuse(t.constant(l), t.constant(g), f);
        return mean(mul(y, y));
    }, params);
    EXPECT_LE(rp.max_rel_error, 1e-4);
}

TEST(Fuse, EpsMustBePositive) {
    RngState rng(1);
    EXPECT_THROW(FusionParams::make("f", 4, rng, FusionMode::kOrthogonal, OrthDenominator::kSquaredNorm, 0.0),
                 ConfigError);
}

}  // namespace
}  // namespace swcf
