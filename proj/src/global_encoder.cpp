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


#include "swcf/global_encoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "swcf/csv.hpp"
#include "swcf/error.hpp"

namespace swcf {

AvgTransformerParams AvgTransformerParams::make(const std::string& name, std::size_t width, std::size_t heads,
                                                std::size_t p, std::size_t k, std::size_t ffn_width,
                                                RngState& rng) {
    if (heads == 0 || width % heads != 0) {
        throw ConfigError(name + ": width " + std::to_string(width) + " not divisible by " + std::to_string(heads) +
                          " heads");
    }
    if (p == 0) throw ConfigError(name + ": P must be at least 1");
    if (k == 0) throw ConfigError(name + ": K must be at least 1");
    AvgTransformerParams t;
    t.w_q = Linear::make(name + ".w_q", width, width, rng, false);
    t.w_k = Linear::make(name + ".w_k", width, width, rng, false);
    t.w_v = Linear::make(name + ".w_v", width, width, rng, false);
    t.out_proj = Linear::make(name + ".out_proj", width, width, rng, false);
    t.ffn = Mlp::make(name + ".ffn", width, ffn_width, width, rng);
    t.heads = heads;
    t.p = p;
    t.k = k;
    return t;
}

DownsampledVar average_downsample(const Tensor& positions, Var features, std::size_t p, std::size_t k,
                                  RngState& rng, std::optional<Index> fps_start) {
    const std::size_t n = positions.rank() == 2 ? positions.dim(0) : 0;
    if (features.value().rows() != n) throw DimensionError("average_downsample: features do not match positions");
    if (p == 0 || p > n) {
        throw ArgumentError("average_downsample: P=" + std::to_string(p) + " for " + std::to_string(n) + " points");
    }
    if (k == 0 || k > n) {
        throw ArgumentError("average_downsample: K=" + std::to_string(k) + " for " + std::to_string(n) + " points");
    }
    const Index start = fps_start ? *fps_start : static_cast<Index>(rng.below(n));
    DownsampledVar out;
    out.anchor_indices = fps(positions, p, start);
    Tensor anchors(Shape{p, 3});
    for (std::size_t i = 0; i < p; ++i)
        for (int a = 0; a < 3; ++a) anchors.at(i, a) = positions.at(out.anchor_indices[i], a);
    out.groups = knn(anchors, positions, k);
    const std::size_t d = features.value().cols();
    Var grouped = reshape(gather_rows(features, out.groups.indices), Shape{p, k, d});
    out.avg_features = scale(sum_axis(grouped, 1), 1.0 / static_cast<double>(k));
    return out;
}

DownsampledKeys average_downsample(const PointCloud& cloud, std::size_t p, std::size_t k, RngState& rng,
                                   std::optional<Index> fps_start) {
    if (!cloud.features) throw StateError("average_downsample: point cloud has no features");
    Tape tape;
    DownsampledVar d = average_downsample(cloud.positions, tape.constant(*cloud.features), p, k, rng, fps_start);
    return DownsampledKeys{std::move(d.anchor_indices), d.avg_features.value()};
}

Var attention_core(Var q, Var k, Var v, std::size_t heads, MacCounter* counter, AttentionTrace* trace) {
    const Tensor& qv = q.value();
    const Tensor& kv = k.value();
    const Tensor& vv = v.value();
    if (qv.rank() != 2 || kv.rank() != 2 || vv.rank() != 2 || kv.shape() != vv.shape() || qv.dim(1) != kv.dim(1)) {
        throw DimensionError("attention_core: incompatible Q " + shape_str(qv.shape()) + ", K " +
                             shape_str(kv.shape()) + ", V " + shape_str(vv.shape()));
    }
    const std::size_t n = qv.dim(0), p = kv.dim(0), d = qv.dim(1);
    if (heads == 0 || d % heads != 0) throw DimensionError("attention_core: width not divisible by head count");
    auto weights = std::make_shared<Tensor>(Shape{heads, n, p});
    Tensor out(Shape{n, d});
    kernels::attention_forward(qv.data().data(), kv.data().data(), vv.data().data(), out.data().data(), n, p, d,
                               heads, weights->data().data(), counter);
    if (!weights->all_finite()) throw NumericError("attention_core: non-finite attention scores");
    if (trace) {
        trace->weights = *weights;
        trace->values = vv;
        trace->heads = out;
    }
    const std::size_t qi = q.id, ki = k.id, vi = v.id;
    return q.tape->record(std::move(out), {q, k, v}, [=](Tape& t, const Tensor& g) {
        const std::size_t dh = d / heads;
        const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
        const Tensor& qv = t.value(qi);
        const Tensor& kv = t.value(ki);
        const Tensor& vv = t.value(vi);
        const bool gq = t.requires_grad(qi), gk = t.requires_grad(ki), gv = t.requires_grad(vi);
        double* dq = gq ? t.grad_span(qi).data() : nullptr;
        double* dk = gk ? t.grad_span(ki).data() : nullptr;
        double* dv = gv ? t.grad_span(vi).data() : nullptr;
        std::vector<double> dw(p);
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < n; ++i) {
                const double* w = weights->data().data() + (h * n + i) * p;
                const double* gi = g.data().data() + i * d + off;
                // dW_ij = <dO_i, V_j>; dS = W ⊙ (dW − Σ_j W_ij dW_ij)
                double dot = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    const double* vj = vv.data().data() + j * d + off;
                    double s = 0.0;
                    for (std::size_t c = 0; c < dh; ++c) s += gi[c] * vj[c];
                    dw[j] = s;
                    dot += s * w[j];
                }
                for (std::size_t j = 0; j < p; ++j) {
                    const double ds = w[j] * (dw[j] - dot) * inv_scale;
                    if (dv) {
                        double* dvj = dv + j * d + off;
                        for (std::size_t c = 0; c < dh; ++c) dvj[c] += w[j] * gi[c];
                    }
                    if (dq) {
                        const double* kj = kv.data().data() + j * d + off;
                        double* dqi = dq + i * d + off;
                        for (std::size_t c = 0; c < dh; ++c) dqi[c] += ds * kj[c];
                    }
                    if (dk) {
                        const double* qi_row = qv.data().data() + i * d + off;
                        double* dkj = dk + j * d + off;
                        for (std::size_t c = 0; c < dh; ++c) dkj[c] += ds * qi_row[c];
                    }
                }
            }
        }
    }, "attention_core");
}

Var avg_attention(Var x, Var a, const AvgTransformerParams& params, MacCounter* counter, AttentionTrace* trace) {
    const std::size_t d = params.width();
    if (x.value().cols() != d || a.value().cols() != d) {
        throw DimensionError("avg_attention: feature width does not match parameters (" + std::to_string(d) + ")");
    }
    Tape& t = *x.tape;
    auto project = [&](Var in, const Linear& l) {
        if (counter) counter->macs += static_cast<std::uint64_t>(in.value().rows()) * d * d;
        return matmul(in, t.param(l.weight));
    };
    Var q = project(x, params.w_q);
    Var k = project(a, params.w_k);
    Var v = project(a, params.w_v);
    Var heads = attention_core(q, k, v, params.heads, counter, trace);
    Var tout = add(x, project(heads, params.out_proj));
    return params.layer_norm ? layer_norm_rows(tout) : tout;
}

std::uint64_t avg_attention_macs(std::size_t n, std::size_t p, std::size_t d) {
    const std::uint64_t nn = n, pp = p, dd = d;
    return 2 * nn * pp * dd + (2 * nn + 2 * pp) * dd * dd;
}

Var avg_transformer_block(const Tensor& positions, Var x, const AvgTransformerParams& params, RngState& rng,
                          std::optional<Index> fps_start) {
    const std::size_t n = x.value().rows();
    const std::size_t p = std::min(params.p, n);
    const std::size_t k = std::min(params.k, n);
    DownsampledVar keys = average_downsample(positions, x, p, k, rng, fps_start);
    Var t = avg_attention(x, keys.avg_features, params);
    Var f = add(t, params.ffn(t));
    return params.layer_norm ? layer_norm_rows(f) : f;
}

Var avg_transformer_block(Tape& tape, const PointCloud& cloud, const AvgTransformerParams& params, RngState& rng,
                          std::optional<Index> fps_start) {
    if (!cloud.features) throw StateError("avg_transformer_block: point cloud has no features");
    return avg_transformer_block(cloud.positions, tape.constant(*cloud.features), params, rng, fps_start);
}

namespace {

template <class T>
struct BenchData {
    std::vector<T> x, a, wq, wk, wv, wo;
    std::vector<T> q, k, v, heads, out;
};

template <class T>
std::vector<T> random_vec(std::size_t n, RngState& rng, double scale) {
    std::vector<T> v(n);
    for (auto& e : v) e = static_cast<T>(rng.uniform(-scale, scale));
    return v;
}

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class T>
void bench_one(std::size_t n, const BenchOptions& o, RngState& rng, std::vector<BenchRow>& rows) {
    const std::size_t d = o.width, p = std::min(o.p, n);
    BenchData<T> b;
    const double ws = 1.0 / std::sqrt(static_cast<double>(d));
    b.x = random_vec<T>(n * d, rng, 1.0);
    b.a = random_vec<T>(p * d, rng, 1.0);
    b.wq = random_vec<T>(d * d, rng, ws);
    b.wk = random_vec<T>(d * d, rng, ws);
    b.wv = random_vec<T>(d * d, rng, ws);
    b.wo = random_vec<T>(d * d, rng, ws);
    b.q.resize(n * d);
    b.heads.resize(n * d);
    b.out.resize(n * d);

    // Both methods project their own keys/values and run the same attention
    // kernel; only the key/value set differs (P averaged rows vs all N).
    auto run = [&](const std::vector<T>& kv_src, std::size_t rows) {
        b.k.resize(rows * d);
        b.v.resize(rows * d);
        kernels::gemm_nn(b.x.data(), b.wq.data(), b.q.data(), n, d, d);
        kernels::gemm_nn(kv_src.data(), b.wk.data(), b.k.data(), rows, d, d);
        kernels::gemm_nn(kv_src.data(), b.wv.data(), b.v.data(), rows, d, d);
        kernels::attention_forward<T>(b.q.data(), b.k.data(), b.v.data(), b.heads.data(), n, rows, d, o.heads);
        kernels::gemm_nn(b.heads.data(), b.wo.data(), b.out.data(), n, d, d);
        for (std::size_t i = 0; i < n * d; ++i) b.out[i] += b.x[i];
    };

    std::vector<double> t_avg, t_full;
    for (std::size_t r = 0; r < o.avg_repeats; ++r) t_avg.push_back(time_once([&] { run(b.a, p); }));
    for (std::size_t r = 0; r < o.repeats; ++r) t_full.push_back(time_once([&] { run(b.x, n); }));
    rows.push_back(BenchRow{n, "avg", median(t_avg), o.avg_repeats});
    rows.push_back(BenchRow{n, "full", median(t_full), o.repeats});
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

BenchResult bench_attention(const std::vector<std::size_t>& sizes, const BenchOptions& options) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw ArgumentError("bench sizes must be ascending");
    if (options.repeats == 0 || options.avg_repeats == 0) throw ArgumentError("bench repeats must be at least 1");
    if (options.heads == 0 || options.width % options.heads != 0) {
        throw ArgumentError("bench width must be divisible by the head count");
    }
    BenchResult result;
    RngState rng(options.seed);
    for (std::size_t n : sizes) {
        if (options.single_precision)
            bench_one<float>(n, options, rng, result.rows);
        else
            bench_one<double>(n, options, rng, result.rows);
    }
    std::vector<double> xs, ya, yf;
    for (const auto& r : result.rows) {
        if (r.method == "avg") {
            xs.push_back(static_cast<double>(r.n));
            ya.push_back(r.median_seconds);
        } else {
            yf.push_back(r.median_seconds);
        }
    }
    result.avg_slope = loglog_slope(xs, ya);
    result.full_slope = loglog_slope(xs, yf);
    return result;
}

std::string bench_csv(const BenchResult& result) {
    std::ostringstream os;
    os << "n,method,median_seconds,reps\n";
    for (const auto& r : result.rows) {
        os << r.n << ',' << r.method << ',' << format_double(r.median_seconds) << ',' << r.reps << '\n';
    }
    return os.str();
}

}  // namespace swcf
