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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swcf/error.hpp"
#include "swcf/grad_check.hpp"
#include "swcf/grad_suite.hpp"
#include "swcf/local_encoder.hpp"
#include "swcf/training.hpp"

namespace swcf {
namespace {

using oracle::random_tensor;

struct Scene {
    Tensor pos;
    Tensor feat;
    NeighborIndex nbrs;
};

Scene random_scene(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t k) {
    RngState rng(seed);
    Scene s{random_tensor({n, 3}, rng), random_tensor({n, d}, rng), {}};
    s.nbrs = knn(s.pos, s.pos, k);
    return s;
}

void jitter(SWConvParams& p, RngState& rng) {
    p.visit_params([&](Parameter& q) {
        for (double& v : q.value.data()) v += 0.1 * rng.normal();
    });
}

SWConvParams make_params(std::uint64_t seed, std::size_t in, std::size_t d, std::size_t out,
                         SWConvOptions opts = {}) {
    RngState rng(seed);
    SWConvParams p = SWConvParams::make("t", in, d, out, rng, opts);
    jitter(p, rng);
    return p;
}

Tensor run_conv(const Scene& s, const SWConvParams& p, bool weighted) {
    Tape t;
    Var f = t.constant(s.feat);
    return (weighted ? swconv(s.pos, f, s.nbrs, p) : baseline_conv(s.pos, f, s.nbrs, p)).value();
}

void set_identity(Linear& l) {
    l.weight.value.fill(0.0);
    for (std::size_t i = 0; i < std::min(l.in(), l.out()); ++i) l.weight.value.at(i, i) = 1.0;
    l.bias.value.fill(0.0);
}

TEST(BaselineConv, ConstantKernelSumsNeighbors) {
    const std::size_t d = 4, k = 5;
    Scene s = random_scene(1, 20, d, k);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t c = 0; c < d; ++c) s.feat.at(i, c) = 0.5 + static_cast<double>(c);
    SWConvParams p = make_params(2, d, d, d);
    zero_params(p.g);
    p.g.output.bias.value.fill(1.0);
    set_identity(p.psi.hidden);
    set_identity(p.psi.output);
    const Tensor out = run_conv(s, p, false);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t c = 0; c < d; ++c) EXPECT_DOUBLE_EQ(out.at(i, c), k * (0.5 + static_cast<double>(c)));
}

TEST(BaselineConv, ZeroFeaturesGiveZero) {
    Scene s = random_scene(3, 16, 4, 4);
    s.feat.fill(0.0);
    SWConvParams p = make_params(4, 4, 4, 4);
    p.psi.hidden.bias.value.fill(0.0);
    p.psi.output.bias.value.fill(0.0);
    const Tensor out = run_conv(s, p, false);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(BaselineConv, MatchesLoopOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Scene s = random_scene(10 + seed, 16, 4, 4);
        SWConvParams p = make_params(seed, 4, 4, 4);
        const auto want = oracle::conv(s.pos, oracle::to_mat(s.feat), s.nbrs, p, false);
        EXPECT_LE(oracle::max_abs_diff(want, run_conv(s, p, false)), 1e-10);
    }
}

TEST(BaselineConv, MissingFeatures) {
    Tape t;
    PointCloud c{Tensor(Shape{4, 3}), std::nullopt, std::nullopt};
    SWConvParams p = make_params(1, 2, 2, 2);
    EXPECT_THROW(baseline_conv(t, c, knn(c.positions, c.positions, 2), p), StateError);
}

TEST(SimilarityWeights, SumToOneAndMatchOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Scene s = random_scene(30 + seed, 8, 4, 3);
        SWConvParams p = make_params(seed, 4, 4, 4);
        Tape t;
        const Tensor w = similarity_weights(t.constant(s.feat), s.nbrs, p.phi).value();
        ASSERT_EQ(w.shape(), (Shape{8, 3, 4}));
        const auto want = oracle::similarity(oracle::to_mat(s.feat), s.nbrs, p.phi);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t c = 0; c < 4; ++c) {
                double total = 0.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    const double v = w[(i * 3 + j) * 4 + c];
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, 1.0);
                    EXPECT_NEAR(v, want[i][j][c], 1e-10);
                    total += v;
                }
                EXPECT_NEAR(total, 1.0, 1e-9);
            }
    }
}

TEST(SimilarityWeights, IdenticalNeighborsAreUniform) {
    Scene s = random_scene(5, 12, 4, 4);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t c = 0; c < 4; ++c) s.feat.at(i, c) = 0.3 * static_cast<double>(c);
    SWConvParams p = make_params(6, 4, 4, 4);
    Tape t;
    const Tensor w = similarity_weights(t.constant(s.feat), s.nbrs, p.phi).value();
    for (double v : w.data()) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(SimilarityWeights, SingleNeighborWeightIsOne) {
    Scene s = random_scene(7, 10, 4, 1);
    SWConvParams p = make_params(8, 4, 4, 4);
    Tape t;
    for (double v : similarity_weights(t.constant(s.feat), s.nbrs, p.phi).value().data()) EXPECT_EQ(v, 1.0);
}

TEST(SimilarityWeights, MonotoneInScores) {
    Scene s = random_scene(9, 24, 4, 6);
    SWConvParams p = make_params(10, 4, 4, 4);
    Tape t;
    const Tensor w = similarity_weights(t.constant(s.feat), s.nbrs, p.phi).value();
    const auto f = oracle::to_mat(s.feat);
    std::size_t dominated_pairs = 0;
    for (std::size_t i = 0; i < 24; ++i) {
        std::vector<oracle::Vec> score;
        for (std::size_t j = 0; j < 6; ++j) {
            oracle::Vec diff(4);
            for (std::size_t c = 0; c < 4; ++c) diff[c] = f[s.nbrs.at(i, j)][c] - f[i][c];
            score.push_back(oracle::mlp(p.phi, diff));
        }
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b) {
                bool dominates = a != b;
                for (std::size_t c = 0; c < 4 && dominates; ++c) dominates = score[a][c] > score[b][c];
                if (!dominates) continue;
                ++dominated_pairs;
                for (std::size_t c = 0; c < 4; ++c) EXPECT_GT(w[(i * 6 + a) * 4 + c], w[(i * 6 + b) * 4 + c]);
            }
    }
    EXPECT_GT(dominated_pairs, 0u);
}

TEST(SWConv, UniformWeightsScaleBaseline) {
    Scene s = random_scene(11, 20, 4, 5);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t c = 0; c < 4; ++c) s.feat.at(i, c) = 0.1 + 0.2 * static_cast<double>(c);
    SWConvParams p = make_params(12, 4, 4, 4);
    const Tensor sw = run_conv(s, p, true), base = run_conv(s, p, false);
    for (std::size_t i = 0; i < sw.size(); ++i) EXPECT_NEAR(sw[i], base[i] / 5.0, 1e-12);
}

TEST(SWConv, SingleNeighborEqualsBaseline) {
    Scene s = random_scene(13, 20, 4, 1);
    SWConvParams p = make_params(14, 4, 4, 4);
    EXPECT_LE(max_abs_diff(run_conv(s, p, true), run_conv(s, p, false)), 1e-15);
}

TEST(SWConv, MatchesLoopOracle) {
    const SWConvOptions variants[] = {{}, {KernelMode::kScalar, false}, {KernelMode::kPerChannel, true}};
    for (const auto& opts : variants) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Scene s = random_scene(50 + seed, 32, 4, 8);
            SWConvParams p = make_params(seed, 4, 4, 4, opts);
            const auto want = oracle::conv(s.pos, oracle::to_mat(s.feat), s.nbrs, p, true);
            EXPECT_LE(oracle::max_abs_diff(want, run_conv(s, p, true)), 1e-10) << "seed " << seed;
        }
    }
}

TEST(SWConv, GradientWithRespectToFeatures) {
    Scene s = random_scene(15, 32, 4, 8);
    SWConvParams p = make_params(16, 4, 4, 4);
    RngState wr(17);
    Tensor w = random_tensor({32, 4}, wr);
    const auto r = grad_check([&](Tape& t, std::span<const Var> in) {
        return sum(mul(swconv(s.pos, in[0], s.nbrs, p), t.constant(w)));
    }, {s.feat});
    EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(SWConv, GradientWithRespectToParameters) {
    Scene s = random_scene(18, 32, 4, 8);
    SWConvParams p = make_params(19, 4, 4, 4);
    std::vector<Parameter*> params;
    p.visit_params([&](Parameter& q) { params.push_back(&q); });
    const auto r = grad_check_params([&](Tape& t) { return mean(swconv(s.pos, t.constant(s.feat), s.nbrs, p)); },
                                     params);
    EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(SWConv, PermutationEquivariance) {
    Scene s = random_scene(20, 40, 4, 6);
    SWConvParams p = make_params(21, 4, 4, 4);
    RngState rng(22);
    std::vector<Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 40; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<Index> inv(40);
    for (std::size_t i = 0; i < 40; ++i) inv[perm[i]] = i;

    Scene q{Tensor(Shape{40, 3}), Tensor(Shape{40, 4}), {}};
    q.nbrs.rows = 40;
    q.nbrs.k = 6;
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t c = 0; c < 3; ++c) q.pos.at(i, c) = s.pos.at(perm[i], c);
        for (std::size_t c = 0; c < 4; ++c) q.feat.at(i, c) = s.feat.at(perm[i], c);
        for (std::size_t j = 0; j < 6; ++j) q.nbrs.indices.push_back(inv[s.nbrs.at(perm[i], j)]);
    }
    const Tensor a = run_conv(s, p, true), b = run_conv(q, p, true);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(b.at(i, c), a.at(perm[i], c), 1e-12);
}

TEST(LocalBlock, ResidualIsolation) {
    Scene s = random_scene(23, 32, 3, 8);
    SWConvParams p = make_params(24, 3, 4, 5);
    SWConvParams no_alpha = p;
    zero_params(no_alpha.alpha);
    SWConvParams no_gamma = p;
    zero_params(no_gamma.gamma);
    Tape t;
    Var f = t.constant(s.feat);
    const Tensor only_gamma = local_block(s.pos, f, s.nbrs, no_alpha).value();
    const Tensor gamma = p.gamma(f).value();
    EXPECT_TRUE(bit_equal(only_gamma, gamma));
    const Tensor only_main = local_block(s.pos, f, s.nbrs, no_gamma).value();
    const Tensor main = p.alpha(swconv(s.pos, p.beta(f), s.nbrs, p)).value();
    EXPECT_TRUE(bit_equal(only_main, main));
}

TEST(LocalBlock, MatchesLoopOracleAndGradients) {
    Scene s = random_scene(25, 32, 3, 8);
    SWConvParams p = make_params(26, 3, 4, 5);
    Tape t;
    const Tensor out = local_block(s.pos, t.constant(s.feat), s.nbrs, p).value();
    EXPECT_EQ(out.shape(), (Shape{32, 5}));
    EXPECT_LE(oracle::max_abs_diff(oracle::local_block(s.pos, oracle::to_mat(s.feat), s.nbrs, p), out), 1e-10);

    const auto r = grad_check([&](Tape&, std::span<const Var> in) {
        return mean(mul(local_block(s.pos, in[0], s.nbrs, p), local_block(s.pos, in[0], s.nbrs, p)));
    }, {s.feat});
    EXPECT_LE(r.max_rel_error, 1e-4);

    std::vector<Parameter*> params;
    p.visit_params([&](Parameter& q) { params.push_back(&q); });
    const auto rp = grad_check_params([&](Tape& tp) {
        Var y = local_block(s.pos, tp.constant(s.feat), s.nbrs, p);
        return mean(mul(y, y));
    }, params);
    EXPECT_LE(rp.max_rel_error, 1e-4);
}

TEST(Dissimilarity, Examples) {
    Tensor same(Shape{3, 2}, 1.25);
    NeighborIndex all{3, 3, {0, 1, 2, 0, 1, 2, 0, 1, 2}};
    for (double v : local_dissimilarity(same, all)) EXPECT_EQ(v, 0.0);

    Tensor two = Tensor::matrix({{0}, {3}});
    NeighborIndex pair{2, 2, {0, 1, 1, 0}};
    for (double v : local_dissimilarity(two, pair)) EXPECT_EQ(v, 3.0);
}

TEST(Dissimilarity, MatchesAllPairsOracle) {
    Scene s = random_scene(27, 16, 4, 5);
    const auto got = local_dissimilarity(s.feat, s.nbrs);
    for (std::size_t i = 0; i < 16; ++i) {
        double best = 0.0;
        for (Index a : s.nbrs.row(i))
            for (Index b : s.nbrs.row(i)) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < 4; ++c) d2 += (s.feat.at(a, c) - s.feat.at(b, c)) * (s.feat.at(a, c) - s.feat.at(b, c));
                best = std::max(best, std::sqrt(d2));
            }
        EXPECT_NEAR(got[i], best, 1e-12);
    }
}

// Two touching blobs with noisy cluster indicators. The block is trained to
// label the blob; afterwards, in neighborhoods straddling the boundary, the
// expected distance between two neighbors drawn by their channel-averaged
// similarity weights is compared with the same expectation under uniform
// weights (the plain pairwise mean).
struct TrendResult {
    double weighted = 0.0;
    double unweighted = 0.0;
};

TrendResult boundary_dissimilarity(std::uint64_t seed) {
    const std::size_t n = 192, k = 8, d = 8;
    RngState rng(seed);
    Tensor pos(Shape{n, 3}), feat(Shape{n, 2});
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = i < n / 2 ? 0 : 1;
        labels[i] = c;
        pos.at(i, 0) = c == 0 ? rng.uniform(-1, 0) : rng.uniform(0, 1);
        pos.at(i, 1) = rng.uniform(0, 1);
        pos.at(i, 2) = rng.uniform(0, 0.1);
        feat.at(i, 0) = (c == 0 ? 1.0 : -1.0) + 0.6 * rng.normal();
        feat.at(i, 1) = 0.6 * rng.normal();
    }
    const NeighborIndex nbrs = knn(pos, pos, k);
    RngState init = rng.fork(1);
    SWConvParams p = SWConvParams::make("b", 2, d, 2, init);
    std::vector<Parameter*> params;
    p.visit_params([&](Parameter& q) { params.push_back(&q); });
    Adam adam;
    const std::vector<double> unit{1.0, 1.0};
    for (int step = 0; step < 150; ++step) {
        Tape t;
        Var loss = weighted_ce(local_block(pos, t.constant(feat), nbrs, p), labels, unit);
        t.backward(loss);
        std::vector<Tensor> grads;
        for (Parameter* q : params) grads.push_back(t.param_grad(*q));
        adam.step(params, grads, 1e-2);
    }

    Tape t;
    Var lifted = p.beta(t.constant(feat));
    const Tensor w = similarity_weights(lifted, nbrs, p.phi).value();
    const Tensor& b = lifted.value();
    TrendResult r;
    std::size_t boundary = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool mixed = false;
        for (Index j : nbrs.row(i)) mixed |= labels[j] != labels[i];
        if (!mixed) continue;
        ++boundary;
        std::vector<double> wbar(k, 0.0);
        for (std::size_t jj = 0; jj < k; ++jj) {
            for (std::size_t c = 0; c < d; ++c) wbar[jj] += w[(i * k + jj) * d + c];
            wbar[jj] /= static_cast<double>(d);
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t c2 = 0; c2 < k; ++c2) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = b.at(nbrs.at(i, a), c) - b.at(nbrs.at(i, c2), c);
                    d2 += diff * diff;
                }
                const double dist = std::sqrt(d2);
                r.weighted += wbar[a] * wbar[c2] * dist;
                r.unweighted += dist / static_cast<double>(k * k);
            }
    }
    r.weighted /= static_cast<double>(boundary);
    r.unweighted /= static_cast<double>(boundary);
    return r;
}

TEST(Dissimilarity, SimilarityWeightingReducesBoundarySpreadOnAverage) {
    double weighted = 0.0, unweighted = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TrendResult r = boundary_dissimilarity(300 + seed);
        weighted += r.weighted;
        unweighted += r.unweighted;
    }
    EXPECT_LE(weighted, unweighted);
}

}  // namespace
}  // namespace swcf
