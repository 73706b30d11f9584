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

// Brute-force reference implementations written as plain loops over
// std::vector. They share no code with the library beyond the parameter
// containers they read.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "swcf/fusion.hpp"
#include "swcf/global_encoder.hpp"
#include "swcf/local_encoder.hpp"
#include "swcf/nn.hpp"
#include "swcf/rng.hpp"
#include "swcf/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline swcf::Tensor random_tensor(swcf::Shape shape, swcf::RngState& rng, double lo = -1.0, double hi = 1.0) {
    swcf::Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline Mat to_mat(const swcf::Tensor& t) {
    Mat m(t.rows(), Vec(t.cols()));
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
    return m;
}

inline double sq_dist3(const swcf::Tensor& a, std::size_t i, const swcf::Tensor& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        const double d = a.at(i, c) - b.at(j, c);
        s += d * d;
    }
    return s;
}

inline std::vector<std::vector<std::size_t>> knn(const swcf::Tensor& q, const swcf::Tensor& src, std::size_t k) {
    std::vector<std::vector<std::size_t>> out(q.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < src.rows(); ++j) all.emplace_back(sq_dist3(q, i, src, j), j);
        std::sort(all.begin(), all.end());
        for (std::size_t j = 0; j < k; ++j) out[i].push_back(all[j].second);
    }
    return out;
}

// Recomputes every candidate's distance to the whole selected set each round.
inline std::vector<std::size_t> fps(const swcf::Tensor& pts, std::size_t count, std::size_t start) {
    std::vector<std::size_t> sel{start};
    while (sel.size() < count) {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t s : sel) m = std::min(m, sq_dist3(pts, i, pts, s));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        sel.push_back(arg);
    }
    return sel;
}

inline Vec linear(const swcf::Linear& l, const Vec& x) {
    const swcf::Tensor& w = l.weight.value;
    Vec y(w.dim(1), 0.0);
    for (std::size_t o = 0; o < y.size(); ++o) {
        double s = l.has_bias ? l.bias.value[o] : 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w.at(i, o);
        y[o] = s;
    }
    return y;
}

inline Vec mlp(const swcf::Mlp& m, const Vec& x) {
    Vec h = linear(m.hidden, x);
    for (double& v : h) v = std::max(v, 0.0);
    return linear(m.output, h);
}

inline Vec rel_pos(const swcf::Tensor& pos, std::size_t i, std::size_t j) {
    return {pos.at(j, 0) - pos.at(i, 0), pos.at(j, 1) - pos.at(i, 1), pos.at(j, 2) - pos.at(i, 2)};
}

// w[i][jj][d] = softmax over jj of φ(f_j − f_i)[d].
inline std::vector<Mat> similarity(const Mat& f, const swcf::NeighborIndex& nb, const swcf::Mlp& phi) {
    std::vector<Mat> w(nb.rows);
    for (std::size_t i = 0; i < nb.rows; ++i) {
        Mat scores;
        for (std::size_t jj = 0; jj < nb.k; ++jj) {
            const std::size_t j = nb.at(i, jj);
            Vec diff(f[i].size());
            for (std::size_t d = 0; d < diff.size(); ++d) diff[d] = f[j][d] - f[i][d];
            scores.push_back(mlp(phi, diff));
        }
        const std::size_t dw = scores[0].size();
        w[i].assign(nb.k, Vec(dw));
        for (std::size_t d = 0; d < dw; ++d) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t jj = 0; jj < nb.k; ++jj) mx = std::max(mx, scores[jj][d]);
            double z = 0.0;
            for (std::size_t jj = 0; jj < nb.k; ++jj) z += std::exp(scores[jj][d] - mx);
            for (std::size_t jj = 0; jj < nb.k; ++jj) w[i][jj][d] = std::exp(scores[jj][d] - mx) / z;
        }
    }
    return w;
}

// Σ_j g(x_j − x_i) ⊙ [ω_ij ⊙] ψ(f_j or f_i).
inline Mat conv(const swcf::Tensor& pos, const Mat& f, const swcf::NeighborIndex& nb, const swcf::SWConvParams& p,
                bool weighted) {
    const std::vector<Mat> w = weighted ? similarity(f, nb, p.phi) : std::vector<Mat>{};
    Mat out(nb.rows);
    for (std::size_t i = 0; i < nb.rows; ++i) {
        out[i].assign(p.psi.out(), 0.0);
        for (std::size_t jj = 0; jj < nb.k; ++jj) {
            const std::size_t j = nb.at(i, jj);
            const Vec g = mlp(p.g, rel_pos(pos, i, j));
            const Vec psi = mlp(p.psi, f[p.options.psi_on_query ? i : j]);
            for (std::size_t d = 0; d < out[i].size(); ++d) {
                const double gd = g.size() == 1 ? g[0] : g[d];
                out[i][d] += gd * (weighted ? w[i][jj][d] : 1.0) * psi[d];
            }
        }
    }
    return out;
}

inline Mat local_block(const swcf::Tensor& pos, const Mat& f, const swcf::NeighborIndex& nb,
                       const swcf::SWConvParams& p) {
    Mat lifted;
    for (const Vec& row : f) lifted.push_back(mlp(p.beta, row));
    const Mat c = conv(pos, lifted, nb, p, true);
    Mat out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec a = mlp(p.alpha, c[i]);
        const Vec g = mlp(p.gamma, f[i]);
        out[i].resize(a.size());
        for (std::size_t d = 0; d < a.size(); ++d) out[i][d] = a[d] + g[d];
    }
    return out;
}

inline Mat neighborhood_means(const Mat& f, const std::vector<std::vector<std::size_t>>& groups) {
    Mat out;
    for (const auto& g : groups) {
        Vec m(f[0].size(), 0.0);
        for (std::size_t j : g)
            for (std::size_t d = 0; d < m.size(); ++d) m[d] += f[j][d];
        for (double& v : m) v /= static_cast<double>(g.size());
        out.push_back(m);
    }
    return out;
}

inline Mat project(const Mat& x, const swcf::Linear& l) {
    Mat y;
    for (const Vec& r : x) y.push_back(linear(l, r));
    return y;
}

// X + out_proj(concat_h softmax(Q_h K_hᵀ / sqrt(dh)) V_h), keys/values from `kv`.
inline Mat attention(const Mat& x, const Mat& kv, const swcf::AvgTransformerParams& p) {
    const Mat q = project(x, p.w_q), k = project(kv, p.w_k), v = project(kv, p.w_v);
    const std::size_t d = x[0].size(), dh = d / p.heads;
    Mat heads(x.size(), Vec(d, 0.0));
    for (std::size_t h = 0; h < p.heads; ++h) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            Vec s(kv.size());
            for (std::size_t j = 0; j < kv.size(); ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < dh; ++c) dot += q[i][h * dh + c] * k[j][h * dh + c];
                s[j] = dot / std::sqrt(static_cast<double>(dh));
            }
            const double mx = *std::max_element(s.begin(), s.end());
            double z = 0.0;
            for (double& e : s) z += (e = std::exp(e - mx));
            for (std::size_t j = 0; j < kv.size(); ++j)
                for (std::size_t c = 0; c < dh; ++c) heads[i][h * dh + c] += s[j] / z * v[j][h * dh + c];
        }
    }
    Mat out = project(heads, p.out_proj);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t c = 0; c < d; ++c) out[i][c] += x[i][c];
    return out;
}

inline Vec orthogonalize(const Vec& l, const Vec& g, double eps = 1e-12) {
    double lg = 0.0, ll = 0.0;
    for (std::size_t c = 0; c < l.size(); ++c) {
        lg += l[c] * g[c];
        ll += l[c] * l[c];
    }
    Vec out(g);
    for (std::size_t c = 0; c < l.size(); ++c) out[c] -= lg / (ll + eps) * l[c];
    return out;
}

struct Iou {
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
};

inline Iou miou(std::size_t classes, const std::vector<std::uint64_t>& counts) {
    Iou r;
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::uint64_t tp = counts[c * classes + c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += counts[o * classes + c];
            fn += counts[c * classes + o];
        }
        const std::uint64_t den = tp + fp + fn;
        if (den == 0) {
            r.per_class.emplace_back();
            continue;
        }
        const double iou = static_cast<double>(tp) / static_cast<double>(den);
        r.per_class.emplace_back(iou);
        sum += iou;
        ++present;
    }
    r.mean = present ? sum / static_cast<double>(present) : 0.0;
    return r;
}

inline double max_abs_diff(const Mat& a, const swcf::Tensor& b) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a[r].size(); ++c) m = std::max(m, std::abs(a[r][c] - b.at(r, c)));
    return m;
}

}  // namespace oracle
