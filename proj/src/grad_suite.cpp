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


#include "swcf/grad_suite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swcf/error.hpp"
#include "swcf/fusion.hpp"
#include "swcf/global_encoder.hpp"
#include "swcf/local_encoder.hpp"
#include "swcf/network.hpp"
#include "swcf/ops.hpp"
#include "swcf/rng.hpp"
#include "swcf/training.hpp"

namespace swcf {

namespace {

Tensor normal(Shape shape, RngState& rng, double sigma = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = sigma * rng.normal();
    return t;
}

/// Σ x ⊙ w for a fixed random w, so every output coordinate matters.
Var project(Var x, const Tensor& w) { return sum(mul(x, x.tape->constant(w))); }

double param_scalar(const std::function<Var(Tape&)>& fn) {
    Tape tape;
    const Tensor& out = fn(tape).value();
    if (out.size() != 1) throw DimensionError("grad_check_params: function must return a scalar");
    if (!std::isfinite(out[0])) throw NumericError("grad_check_params: function value is not finite");
    return out[0];
}

struct Suite {
    double tol;
    RngState jitter;
    const std::function<void(const GradCase&)>& on_case;
    std::vector<GradCase> cases;

    void add(const std::string& name, const GradCheckReport& r) {
        GradCase c{name, r.max_rel_error, 0, r.passed};
        for (const auto& in : r.inputs) c.coords_checked += in.coords_checked;
        cases.push_back(c);
        if (on_case) on_case(cases.back());
    }

    void inputs(const std::string& name, const ScalarFn& fn, const std::vector<Tensor>& in,
                GradCheckOptions opts = {}) {
        opts.tol = tol;
        add(name, grad_check(fn, in, opts));
    }

    template <class Module>
    void params(const std::string& name, const std::function<Var(Tape&)>& fn, Module& module,
                GradCheckOptions opts = {}) {
        opts.tol = tol;
        // Zero-initialised biases put ReLU inputs exactly on the kink for
        // zero offsets (a point is its own neighbor), where differences lie.
        std::vector<Parameter*> ps;
        module.visit_params([&](Parameter& p) {
            for (double& v : p.value.data()) v += 0.05 * jitter.normal();
            ps.push_back(&p);
        });
        add(name, grad_check_params(fn, ps, opts));
    }
};

}  // namespace

GradCheckReport grad_check_params(const std::function<Var(Tape&)>& fn, const std::vector<Parameter*>& params,
                                  const GradCheckOptions& options) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        Var out = fn(tape);
        if (out.value().size() != 1) throw DimensionError("grad_check_params: function must return a scalar");
        tape.backward(out);
        for (const Parameter* p : params)
            analytic.push_back(tape.has_param(*p) ? tape.param_grad(*p) : Tensor(p->value.shape()));
    }
    GradCheckReport report;
    RngState pick(0x706172616d73ULL);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& value = params[k]->value;
        const std::size_t n = value.size();
        std::vector<std::size_t> coords(n);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.max_coords_per_input && n > options.max_coords_per_input) {
            for (std::size_t i = 0; i < options.max_coords_per_input; ++i)
                std::swap(coords[i], coords[i + pick.below(n - i)]);
            coords.resize(options.max_coords_per_input);
        }
        InputGradReport r;
        for (std::size_t c : coords) {
            const double x0 = value[c];
            value[c] = x0 + options.step;
            const double fp = param_scalar(fn);
            value[c] = x0 - options.step;
            const double fm = param_scalar(fn);
            value[c] = x0;
            const double numeric = (fp - fm) / (2.0 * options.step);
            r.max_abs_error = std::max(r.max_abs_error, std::abs(analytic[k][c] - numeric));
            r.scale = std::max({r.scale, std::abs(analytic[k][c]), std::abs(numeric)});
        }
        r.coords_checked = coords.size();
        r.rel_error = r.max_abs_error / std::max(r.scale, options.scale_floor);
        report.max_rel_error = std::max(report.max_rel_error, r.rel_error);
        report.inputs.push_back(r);
    }
    report.passed = report.max_rel_error <= options.tol;
    return report;
}

std::vector<GradCase> run_grad_suite(std::uint64_t seed, double tol, const std::function<void(const GradCase&)>& on_case) {
    Suite s{tol, RngState(seed).fork(99), on_case, {}};
    RngState rng(seed);

    // Elementary ops.
    {
        const Tensor a = normal({3, 4}, rng), b = normal({4, 5}, rng), w35 = normal({3, 5}, rng);
        s.inputs("matmul", [&](Tape&, std::span<const Var> v) { return project(matmul(v[0], v[1]), w35); }, {a, b});
        const Tensor x = normal({3, 4}, rng), y = normal({3, 4}, rng), w34 = normal({3, 4}, rng);
        s.inputs("add", [&](Tape&, std::span<const Var> v) { return project(add(v[0], v[1]), w34); }, {x, y});
        s.inputs("sub", [&](Tape&, std::span<const Var> v) { return project(sub(v[0], v[1]), w34); }, {x, y});
        s.inputs("mul", [&](Tape&, std::span<const Var> v) { return project(mul(v[0], v[1]), w34); }, {x, y});
        s.inputs("scale", [&](Tape&, std::span<const Var> v) { return project(scale(v[0], -1.7), w34); }, {x});
        s.inputs("add_bias", [&](Tape&, std::span<const Var> v) { return project(add_bias(v[0], v[1]), w34); },
                 {x, normal({4}, rng)});
        s.inputs("mul_col", [&](Tape&, std::span<const Var> v) { return project(mul_col(v[0], v[1]), w34); },
                 {x, normal({3}, rng)});
        s.inputs("relu", [&](Tape&, std::span<const Var> v) { return project(relu(v[0]), w34); }, {x});
        s.inputs("sum", [&](Tape&, std::span<const Var> v) { return scale(sum(v[0]), 0.3); }, {x});
        s.inputs("mean", [&](Tape&, std::span<const Var> v) { return mean(mul(v[0], v[0])); }, {x});
        const Tensor x3 = normal({2, 3, 4}, rng);
        const Tensor w_ax0 = normal({3, 4}, rng), w_ax1 = normal({2, 4}, rng), w_ax2 = normal({2, 3}, rng);
        s.inputs("sum_axis0", [&](Tape&, std::span<const Var> v) { return project(sum_axis(v[0], 0), w_ax0); }, {x3});
        s.inputs("sum_axis1", [&](Tape&, std::span<const Var> v) { return project(sum_axis(v[0], 1), w_ax1); }, {x3});
        s.inputs("sum_axis2", [&](Tape&, std::span<const Var> v) { return project(sum_axis(v[0], 2), w_ax2); }, {x3});
        const Tensor w37 = normal({3, 7}, rng);
        s.inputs("concat", [&](Tape&, std::span<const Var> v) { return project(concat(v[0], v[1]), w37); },
                 {normal({3, 4}, rng), normal({3, 3}, rng)});
        const std::vector<Index> idx{2, 0, 2, 1, 2};
        const Tensor w54 = normal({5, 4}, rng), w44 = normal({4, 4}, rng);
        s.inputs("gather_rows", [&](Tape&, std::span<const Var> v) { return project(gather_rows(v[0], idx), w54); },
                 {x});
        const std::vector<Index> dst{3, 0, 3};
        s.inputs("scatter_add_rows",
                 [&](Tape&, std::span<const Var> v) { return project(scatter_add_rows(v[0], dst, 4), w44); }, {x});
        s.inputs("softmax_axis0", [&](Tape&, std::span<const Var> v) { return project(softmax(v[0], 0), w34); }, {x});
        s.inputs("softmax_axis1", [&](Tape&, std::span<const Var> v) { return project(softmax(v[0], 1), w34); }, {x});
        s.inputs("softmax_axis1_rank3",
                 [&](Tape&, std::span<const Var> v) { return project(softmax(v[0], 1), x3); }, {normal({2, 3, 4}, rng)});
        const Tensor w62 = normal({6, 2}, rng);
        s.inputs("reshape", [&](Tape&, std::span<const Var> v) { return project(reshape(v[0], {6, 2}), w62); },
                 {normal({3, 4}, rng)});
        s.inputs("layer_norm_rows",
                 [&](Tape&, std::span<const Var> v) { return project(layer_norm_rows(v[0]), w34); }, {x});
        const std::vector<int> labels{0, 3, 1};
        const std::vector<double> cw{0.5, 1.5, 1.0, 2.0};
        s.inputs("weighted_ce", [&](Tape&, std::span<const Var> v) { return weighted_ce(v[0], labels, cw); }, {x});
    }

    // Local encoder blocks.
    const std::size_t n = 24, k = 5, d = 4;
    const Tensor pos = normal({n, 3}, rng);
    const NeighborIndex nbrs = knn(pos, pos, k);
    const Tensor feat = normal({n, d}, rng);
    const Tensor wnd = normal({n, d}, rng), wnkd = normal({n, k, d}, rng), wn6 = normal({n, 6}, rng);
    for (auto [mode, label] : {std::pair{KernelMode::kPerChannel, ""}, std::pair{KernelMode::kScalar, "_scalar"}}) {
        for (bool on_query : {false, true}) {
            const std::string suffix = std::string(label) + (on_query ? "_psi_query" : "");
            auto params = SWConvParams::make("sw", d, d, 6, rng, SWConvOptions{mode, on_query});
            s.inputs("swconv" + suffix,
                     [&](Tape&, std::span<const Var> v) { return project(swconv(pos, v[0], nbrs, params), wnd); },
                     {feat});
            s.params("swconv_params" + suffix,
                     [&](Tape& t) { return project(swconv(pos, t.constant(feat), nbrs, params), wnd); }, params);
            if (on_query) continue;
            s.inputs("baseline_conv" + suffix,
                     [&](Tape&, std::span<const Var> v) { return project(baseline_conv(pos, v[0], nbrs, params), wnd); },
                     {feat});
            s.inputs("local_block" + suffix,
                     [&](Tape&, std::span<const Var> v) { return project(local_block(pos, v[0], nbrs, params), wn6); },
                     {feat});
            s.params("local_block_params" + suffix,
                     [&](Tape& t) { return project(local_block(pos, t.constant(feat), nbrs, params), wn6); }, params);
        }
    }
    {
        const Mlp phi = Mlp::make("phi", d, d, d, rng);
        s.inputs("similarity_weights",
                 [&](Tape&, std::span<const Var> v) { return project(similarity_weights(v[0], nbrs, phi), wnkd); },
                 {feat});
    }

    // Global encoder.
    {
        const std::size_t heads = 2, p = 6;
        const Tensor wq = normal({n, d}, rng);
        s.inputs("attention_core",
                 [&](Tape&, std::span<const Var> v) { return project(attention_core(v[0], v[1], v[2], heads), wq); },
                 {normal({n, d}, rng), normal({p, d}, rng), normal({p, d}, rng)});
        for (bool ln : {false, true}) {
            auto params = AvgTransformerParams::make("gl", d, heads, p, 3, 2 * d, rng);
            params.layer_norm = ln;
            const std::string suffix = ln ? "_layer_norm" : "";
            const Tensor anchors = normal({p, d}, rng);
            s.inputs("avg_attention" + suffix,
                     [&](Tape&, std::span<const Var> v) { return project(avg_attention(v[0], v[1], params), wq); },
                     {feat, anchors});
            s.params("avg_attention_params" + suffix,
                     [&](Tape& t) {
                         return project(avg_attention(t.constant(feat), t.constant(anchors), params), wq);
                     },
                     params);
            const RngState block_rng = rng.fork(ln ? 2 : 1);
            s.inputs("avg_transformer_block" + suffix,
                     [&](Tape&, std::span<const Var> v) {
                         RngState r = block_rng;
                         return project(avg_transformer_block(pos, v[0], params, r), wq);
                     },
                     {feat});
            s.params("avg_transformer_block_params" + suffix,
                     [&](Tape& t) {
                         RngState r = block_rng;
                         return project(avg_transformer_block(pos, t.constant(feat), params, r), wq);
                     },
                     params);
        }
        const Tensor wp = normal({p, d}, rng);
        const RngState ds_rng = rng.fork(3);
        s.inputs("average_downsample",
                 [&](Tape&, std::span<const Var> v) {
                     RngState r = ds_rng;
                     return project(average_downsample(pos, v[0], p, 3, r).avg_features, wp);
                 },
                 {feat});
    }

    // Fusion.
    {
        const Tensor l = normal({n, d}, rng), g = normal({n, d}, rng);
        for (auto [den, label] :
             {std::pair{OrthDenominator::kSquaredNorm, ""}, std::pair{OrthDenominator::kNorm, "_norm"}}) {
            s.inputs(std::string("orthogonalize") + label,
                     [&, den = den](Tape&, std::span<const Var> v) {
                         return project(orthogonalize(v[0], v[1], 1e-12, den), wnd);
                     },
                     {l, g});
        }
        for (auto [mode, label] : {std::pair{FusionMode::kOrthogonal, ""}, std::pair{FusionMode::kConcat, "_concat"}}) {
            auto params = FusionParams::make("fu", d, rng, mode);
            s.inputs(std::string("fuse") + label,
                     [&](Tape&, std::span<const Var> v) { return project(fuse(v[0], v[1], params), wnd); }, {l, g});
            s.params(std::string("fuse_params") + label,
                     [&](Tape& t) { return project(fuse(t.constant(l), t.constant(g), params), wnd); }, params);
        }
    }

    // Whole network at reduced width.
    {
        NetworkConfig cfg;
        cfg.channel_widths = {4, 8, 8, 8};
        cfg.k = 4;
        cfg.p = 8;
        cfg.heads = 2;
        cfg.num_classes = 3;
        cfg.seed = seed;
        ModelState model = ModelState::init(cfg);
        PointCloud cloud;
        cloud.positions = normal({64, 3}, rng);
        cloud.features = input_features(cloud.positions);
        std::vector<int> labels(64);
        for (auto& y : labels) y = static_cast<int>(rng.below(3));
        const std::vector<double> cw{1.0, 0.7, 1.3};
        const RngState fwd_rng = rng.fork(4);
        GradCheckOptions opts;
        opts.max_coords_per_input = 4;
        s.params("network_forward",
                 [&](Tape& t) { return weighted_ce(forward(t, cloud, model, cfg, fwd_rng).logits, labels, cw); },
                 model, opts);
    }
    return s.cases;
}

}  // namespace swcf
