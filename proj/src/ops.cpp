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


#include "swcf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "swcf/error.hpp"
#include "swcf/kernels.hpp"

namespace swcf {

namespace {

void require_same_shape(const char* op, Var a, Var b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

void require_same_tape(const char* op, Var a, Var b) {
    if (a.tape != b.tape || a.tape == nullptr) throw StateError(std::string(op) + ": Vars on different tapes");
}

std::shared_ptr<const std::vector<Index>> checked_indices(const char* op, std::span<const Index> idx,
                                                         std::size_t limit) {
    for (Index i : idx) {
        if (i >= limit) {
            throw IndexError(std::string(op) + ": index " + std::to_string(i) + " out of range [0, " +
                             std::to_string(limit) + ")");
        }
    }
    return std::make_shared<const std::vector<Index>>(idx.begin(), idx.end());
}

struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
    if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

}  // namespace

Var matmul(Var a, Var b) {
    require_same_tape("matmul", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
        throw DimensionError("matmul: cannot multiply " + shape_str(av.shape()) + " by " + shape_str(bv.shape()));
    }
    const std::size_t m = av.dim(0), d = av.dim(1), e = bv.dim(1);
    Tensor out(Shape{m, e});
    kernels::gemm_nn(av.data().data(), bv.data().data(), out.data().data(), m, d, e);
    const std::size_t ai = a.id, bi = b.id;
    return a.tape->record(std::move(out), {a, b}, [ai, bi, m, d, e](Tape& t, const Tensor& g) {
        if (t.requires_grad(ai)) {
            kernels::gemm_nt(g.data().data(), t.value(bi).data().data(), t.grad_span(ai).data(), m, e, d, true);
        }
        if (t.requires_grad(bi)) {
            kernels::gemm_tn(t.value(ai).data().data(), g.data().data(), t.grad_span(bi).data(), m, d, e, true);
        }
    }, "matmul");
}

Var add(Var a, Var b) {
    require_same_tape("add", a, b);
    require_same_shape("add", a, b);
    Tensor out = a.value();
    auto o = out.data();
    auto bv = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    const std::size_t ai = a.id, bi = b.id;
    return a.tape->record(std::move(out), {a, b}, [ai, bi](Tape& t, const Tensor& g) {
        t.accumulate(ai, g);
        t.accumulate(bi, g);
    }, "add");
}

Var sub(Var a, Var b) {
    require_same_tape("sub", a, b);
    require_same_shape("sub", a, b);
    Tensor out = a.value();
    auto o = out.data();
    auto bv = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
    const std::size_t ai = a.id, bi = b.id;
    return a.tape->record(std::move(out), {a, b}, [ai, bi](Tape& t, const Tensor& g) {
        t.accumulate(ai, g);
        if (t.requires_grad(bi)) {
            auto gb = t.grad_span(bi);
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
        }
    }, "sub");
}

Var mul(Var a, Var b) {
    require_same_tape("mul", a, b);
    require_same_shape("mul", a, b);
    Tensor out = a.value();
    auto o = out.data();
    auto bv = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
    const std::size_t ai = a.id, bi = b.id;
    return a.tape->record(std::move(out), {a, b}, [ai, bi](Tape& t, const Tensor& g) {
        if (t.requires_grad(ai)) {
            auto ga = t.grad_span(ai);
            const auto& bv = t.value(bi);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.requires_grad(bi)) {
            auto gb = t.grad_span(bi);
            const auto& av = t.value(ai);
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
        }
    }, "mul");
}

Var scale(Var a, double c) {
    Tensor out = a.value();
    for (double& v : out.data()) v *= c;
    const std::size_t ai = a.id;
    return a.tape->record(std::move(out), {a}, [ai, c](Tape& t, const Tensor& g) {
        auto ga = t.grad_span(ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * g[i];
    }, "scale");
}

Var add_bias(Var x, Var bias) {
    require_same_tape("add_bias", x, bias);
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    if (bv.size() != xv.cols()) {
        throw DimensionError("add_bias: bias of " + shape_str(bv.shape()) + " for input " + shape_str(xv.shape()));
    }
    Tensor out = xv;
    const std::size_t rows = xv.rows(), cols = xv.cols();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
    const std::size_t xi = x.id, bi = bias.id;
    return x.tape->record(std::move(out), {x, bias}, [xi, bi, rows, cols](Tape& t, const Tensor& g) {
        t.accumulate(xi, g);
        if (t.requires_grad(bi)) {
            auto gb = t.grad_span(bi);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        }
    }, "add_bias");
}

Var mul_col(Var x, Var s) {
    require_same_tape("mul_col", x, s);
    const Tensor& xv = x.value();
    const Tensor& sv = s.value();
    const std::size_t rows = xv.rows(), cols = xv.cols();
    if (sv.size() != rows) {
        throw DimensionError("mul_col: " + shape_str(sv.shape()) + " does not have one value per row of " +
                             shape_str(xv.shape()));
    }
    Tensor out = xv;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= sv[r];
    const std::size_t xi = x.id, si = s.id;
    return x.tape->record(std::move(out), {x, s}, [xi, si, rows, cols](Tape& t, const Tensor& g) {
        if (t.requires_grad(xi)) {
            auto gx = t.grad_span(xi);
            const auto& sv = t.value(si);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r * cols + c] * sv[r];
        }
        if (t.requires_grad(si)) {
            auto gs = t.grad_span(si);
            const auto& xv = t.value(xi);
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * xv[r * cols + c];
                gs[r] += acc;
            }
        }
    }, "mul_col");
}

Var relu(Var x) {
    Tensor out = x.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    const std::size_t xi = x.id;
    return x.tape->record(std::move(out), {x}, [xi](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        const auto& xv = t.value(xi);
        for (std::size_t i = 0; i < gx.size(); ++i)
            if (xv[i] > 0.0) gx[i] += g[i];
    }, "relu");
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    const std::size_t xi = x.id;
    return x.tape->record(Tensor::scalar(s), {x}, [xi](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        for (double& v : gx) v += g[0];
    }, "sum");
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    if (n == 0) throw DimensionError("mean of an empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var sum_axis(Var x, std::size_t axis) {
    const Shape& s = x.shape();
    const AxisSplit sp = split_axis(s, axis);
    Shape os;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != axis) os.push_back(s[i]);
    Tensor out(os, 0.0);
    const auto& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t l = 0; l < sp.len; ++l)
            for (std::size_t i = 0; i < sp.inner; ++i)
                out[o * sp.inner + i] += xv[(o * sp.len + l) * sp.inner + i];
    const std::size_t xi = x.id;
    return x.tape->record(std::move(out), {x}, [xi, sp](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t l = 0; l < sp.len; ++l)
                for (std::size_t i = 0; i < sp.inner; ++i)
                    gx[(o * sp.len + l) * sp.inner + i] += g[o * sp.inner + i];
    }, "sum_axis");
}

Var concat(Var a, Var b) {
    require_same_tape("concat", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    Shape sa = av.shape(), sb = bv.shape();
    if (sa.empty() || sb.empty() || sa.size() != sb.size() ||
        !std::equal(sa.begin(), sa.end() - 1, sb.begin())) {
        throw DimensionError("concat: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
    }
    const std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols(), c = ca + cb;
    Shape so = sa;
    so.back() = c;
    Tensor out(so);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(av.data().data() + r * ca, ca, out.data().data() + r * c);
        std::copy_n(bv.data().data() + r * cb, cb, out.data().data() + r * c + ca);
    }
    const std::size_t ai = a.id, bi = b.id;
    return a.tape->record(std::move(out), {a, b}, [ai, bi, rows, ca, cb, c](Tape& t, const Tensor& g) {
        if (t.requires_grad(ai)) {
            auto ga = t.grad_span(ai);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * c + j];
        }
        if (t.requires_grad(bi)) {
            auto gb = t.grad_span(bi);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * c + ca + j];
        }
    }, "concat");
}

Var gather_rows(Var src, std::span<const Index> idx) {
    const Tensor& sv = src.value();
    const std::size_t rows = sv.rows(), cols = sv.cols();
    auto ids = checked_indices("gather_rows", idx, rows);
    Tensor out(Shape{ids->size(), cols});
    for (std::size_t i = 0; i < ids->size(); ++i)
        std::copy_n(sv.data().data() + (*ids)[i] * cols, cols, out.data().data() + i * cols);
    const std::size_t si = src.id;
    return src.tape->record(std::move(out), {src}, [si, ids, cols](Tape& t, const Tensor& g) {
        auto gs = t.grad_span(si);
        for (std::size_t i = 0; i < ids->size(); ++i) {
            double* dst = gs.data() + (*ids)[i] * cols;
            for (std::size_t c = 0; c < cols; ++c) dst[c] += g[i * cols + c];
        }
    }, "gather_rows");
}

Var scatter_add_rows(Var src, std::span<const Index> idx, std::size_t out_rows) {
    const Tensor& sv = src.value();
    const std::size_t cols = sv.cols();
    if (idx.size() != sv.rows()) {
        throw DimensionError("scatter_add_rows: " + std::to_string(idx.size()) + " indices for " +
                             std::to_string(sv.rows()) + " rows");
    }
    auto ids = checked_indices("scatter_add_rows", idx, out_rows);
    Tensor out(Shape{out_rows, cols}, 0.0);
    for (std::size_t i = 0; i < ids->size(); ++i)
        for (std::size_t c = 0; c < cols; ++c) out[(*ids)[i] * cols + c] += sv[i * cols + c];
    const std::size_t si = src.id;
    return src.tape->record(std::move(out), {src}, [si, ids, cols](Tape& t, const Tensor& g) {
        auto gs = t.grad_span(si);
        for (std::size_t i = 0; i < ids->size(); ++i)
            for (std::size_t c = 0; c < cols; ++c) gs[i * cols + c] += g[(*ids)[i] * cols + c];
    }, "scatter_add_rows");
}

Var softmax(Var x) {
    if (x.shape().empty()) throw DimensionError("softmax of a scalar");
    return softmax(x, x.shape().size() - 1);
}

Var softmax(Var x, std::size_t axis) {
    const AxisSplit sp = split_axis(x.shape(), axis);
    Tensor out = x.value();
    std::vector<double> buf(sp.len);
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t i = 0; i < sp.inner; ++i) {
            for (std::size_t l = 0; l < sp.len; ++l) buf[l] = out[(o * sp.len + l) * sp.inner + i];
            kernels::softmax_inplace(buf.data(), sp.len);
            for (std::size_t l = 0; l < sp.len; ++l) out[(o * sp.len + l) * sp.inner + i] = buf[l];
        }
    const std::size_t xi = x.id;
    auto y = std::make_shared<const Tensor>(out);
    return x.tape->record(std::move(out), {x}, [xi, sp, y](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t i = 0; i < sp.inner; ++i) {
                double dot = 0.0;
                for (std::size_t l = 0; l < sp.len; ++l) {
                    const std::size_t k = (o * sp.len + l) * sp.inner + i;
                    dot += g[k] * (*y)[k];
                }
                for (std::size_t l = 0; l < sp.len; ++l) {
                    const std::size_t k = (o * sp.len + l) * sp.inner + i;
                    gx[k] += (*y)[k] * (g[k] - dot);
                }
            }
    }, "softmax");
}

Var reshape(Var x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    const std::size_t xi = x.id;
    return x.tape->record(std::move(out), {x}, [xi](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
    }, "reshape");
}

Var layer_norm_rows(Var x, double eps) {
    const Tensor& xv = x.value();
    const std::size_t rows = xv.rows(), cols = xv.cols();
    Tensor out(xv.shape());
    auto inv_std = std::make_shared<std::vector<double>>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double mu = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mu += xv[r * cols + c];
        mu /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = xv[r * cols + c] - mu;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = is;
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = (xv[r * cols + c] - mu) * is;
    }
    auto y = std::make_shared<const Tensor>(out);
    const std::size_t xi = x.id;
    return x.tape->record(std::move(out), {x}, [xi, rows, cols, y, inv_std](Tape& t, const Tensor& g) {
        auto gx = t.grad_span(xi);
        const double n = static_cast<double>(cols);
        for (std::size_t r = 0; r < rows; ++r) {
            double gm = 0.0, gy = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                gm += g[r * cols + c];
                gy += g[r * cols + c] * (*y)[r * cols + c];
            }
            gm /= n;
            gy /= n;
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t k = r * cols + c;
                gx[k] += (*inv_std)[r] * (g[k] - gm - (*y)[k] * gy);
            }
        }
    }, "layer_norm_rows");
}

}  // namespace swcf
