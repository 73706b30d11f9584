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


#pragma once

// Raw dense kernels shared by the differentiable ops (double) and the
// attention benchmark (float). Row-major throughout.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <type_traits>
#include <vector>

namespace swcf {

/// Multiply-accumulate tally. Kernels add their exact MAC count when given one.
struct MacCounter {
    std::uint64_t macs = 0;
};

namespace kernels {

/// c[M×E] (+)= a[M×D] · b[D×E]
template <class T>
void gemm_nn(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m, std::size_t d,
             std::size_t e, bool accumulate = false, MacCounter* counter = nullptr) {
    if (!accumulate) std::fill(c, c + m * e, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        T* __restrict ci = c + i * e;
        const T* ai = a + i * d;
        for (std::size_t k = 0; k < d; ++k) {
            const T aik = ai[k];
            const T* bk = b + k * e;
            for (std::size_t j = 0; j < e; ++j) ci[j] += aik * bk[j];
        }
    }
    if (counter) counter->macs += static_cast<std::uint64_t>(m) * d * e;
}

/// c[M×D] (+)= a[M×E] · b[D×E]ᵀ
template <class T>
void gemm_nt(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m, std::size_t e,
             std::size_t d, bool accumulate = false) {
    std::vector<T> bt(e * d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < e; ++j) bt[j * d + k] = b[k * e + j];
    gemm_nn(a, bt.data(), c, m, e, d, accumulate);
}

/// c[D×E] (+)= a[M×D]ᵀ · b[M×E]
template <class T>
void gemm_tn(const T* __restrict a, const T* __restrict b, T* __restrict c, std::size_t m, std::size_t d,
             std::size_t e, bool accumulate = false) {
    if (!accumulate) std::fill(c, c + d * e, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        const T* ai = a + i * d;
        const T* bi = b + i * e;
        for (std::size_t k = 0; k < d; ++k) {
            const T aik = ai[k];
            T* __restrict ck = c + k * e;
            for (std::size_t j = 0; j < e; ++j) ck[j] += aik * bi[j];
        }
    }
}

/// In-place stable softmax of a contiguous run of `n` values.
template <class T>
void softmax_inplace(T* x, std::size_t n) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i] - mx);
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    const T inv = T(1) / s;
    for (std::size_t i = 0; i < n; ++i) x[i] *= inv;
}

}  // namespace kernels
}  // namespace swcf

namespace swcf::kernels {

/// s[j] = scale · Σ_c q[c]·kt[c·stride + j] for j < p.
template <class T>
void attention_scores(const T* q, const T* kt, T* s, std::size_t p, std::size_t dh, T scale,
                      std::size_t stride = 0) {
    if (stride == 0) stride = p;
    for (std::size_t j = 0; j < p; ++j) s[j] = 0;
    for (std::size_t c = 0; c < dh; ++c) {
        const T qc = q[c];
        const T* kc = kt + c * stride;
        for (std::size_t j = 0; j < p; ++j) s[j] += qc * kc[j];
    }
    for (std::size_t j = 0; j < p; ++j) s[j] *= scale;
}

/// x[j] ← exp(x[j] − m) for softmax inputs (x[j] ≤ m). float uses a
/// branch-free polynomial the compiler vectorises (within 2 ulp on
/// [-87, 0]); double uses std::exp.
template <class T>
inline void softmax_exp(T* x, std::size_t n, T m) {
    if constexpr (std::is_same_v<T, float>) {
        for (std::size_t j = 0; j < n; ++j) {
            float v = x[j] - m;
            v = v < -87.0f ? -87.0f : v;
            const float t = v * 1.44269504088896341f - 0.5f;
            const std::int32_t k = static_cast<std::int32_t>(t);  // round(t + 0.5), t ≤ 0
            const float fk = static_cast<float>(k);
            float r = v - fk * 0.693359375f;
            r = r + fk * 2.12194440e-4f;
            float poly = 1.9875691500e-4f;
            poly = poly * r + 1.3981999507e-3f;
            poly = poly * r + 8.3334519073e-3f;
            poly = poly * r + 4.1665795894e-2f;
            poly = poly * r + 1.6666665459e-1f;
            poly = poly * r + 5.0000001201e-1f;
            x[j] = (poly * r * r + r + 1.0f) * std::bit_cast<float>((k + 127) << 23);
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) x[j] = std::exp(x[j] - m);
    }
}

/// Σ a[j]·b[j] with eight interleaved partial sums (fixed order, so the
/// result is reproducible; the lanes let the loop vectorise).
template <class T>
inline T dot_lanes(const T* a, const T* b, std::size_t n) {
    T part[8] = {};
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8)
        for (std::size_t l = 0; l < 8; ++l) part[l] += a[j + l] * b[j + l];
    T s = ((part[0] + part[1]) + (part[2] + part[3])) + ((part[4] + part[5]) + (part[6] + part[7]));
    for (; j < n; ++j) s += a[j] * b[j];
    return s;
}

template <class T>
inline T max_lanes(const T* a, std::size_t n, T init) {
    T part[8];
    for (auto& x : part) x = init;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8)
        for (std::size_t l = 0; l < 8; ++l) part[l] = part[l] > a[j + l] ? part[l] : a[j + l];
    T m = init;
    for (T x : part) m = m > x ? m : x;
    for (; j < n; ++j) m = m > a[j] ? m : a[j];
    return m;
}

template <class T>
inline T sum_lanes(const T* a, std::size_t n) {
    T part[8] = {};
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8)
        for (std::size_t l = 0; l < 8; ++l) part[l] += a[j + l];
    T s = ((part[0] + part[1]) + (part[2] + part[3])) + ((part[4] + part[5]) + (part[6] + part[7]));
    for (; j < n; ++j) s += a[j];
    return s;
}

/// Same result as the two-pass softmax up to rounding. Queries and keys are
/// visited in cache-sized blocks with a running max and sum per query, so
/// no P-length row is ever materialised. `kt` and `vt` are [D×P].
template <class T>
void attention_streaming(const T* q, const T* kt, const T* vt, T* out, std::size_t n, std::size_t p, std::size_t d,
                         std::size_t heads, T inv_scale) {
    constexpr std::size_t kQueries = 256, kKeys = 512;
    const std::size_t dh = d / heads;
    std::vector<T> s(kKeys), acc(kQueries * dh), run_max(kQueries), run_sum(kQueries);
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i0 = 0; i0 < n; i0 += kQueries) {
            const std::size_t qb = std::min(kQueries, n - i0);
            std::fill(run_max.begin(), run_max.end(), -std::numeric_limits<T>::infinity());
            std::fill(run_sum.begin(), run_sum.end(), T(0));
            std::fill(acc.begin(), acc.end(), T(0));
            for (std::size_t t0 = 0; t0 < p; t0 += kKeys) {
                const std::size_t tb = std::min(kKeys, p - t0);
                for (std::size_t qi = 0; qi < qb; ++qi) {
                    attention_scores(q + (i0 + qi) * d + off, kt + off * p + t0, s.data(), tb, dh, inv_scale, p);
                    const T m = max_lanes(s.data(), tb, run_max[qi]);
                    T* a = acc.data() + qi * dh;
                    if (m > run_max[qi]) {
                        T f = run_max[qi];
                        softmax_exp(&f, 1, m);
                        run_sum[qi] *= f;
                        for (std::size_t c = 0; c < dh; ++c) a[c] *= f;
                        run_max[qi] = m;
                    }
                    softmax_exp(s.data(), tb, m);
                    run_sum[qi] += sum_lanes(s.data(), tb);
                    for (std::size_t c = 0; c < dh; ++c) a[c] += dot_lanes(s.data(), vt + (off + c) * p + t0, tb);
                }
            }
            for (std::size_t qi = 0; qi < qb; ++qi)
                for (std::size_t c = 0; c < dh; ++c)
                    out[(i0 + qi) * d + off + c] = acc[qi * dh + c] / run_sum[qi];
        }
    }
}

/// Multi-head attention core for one batch of queries.
///
/// q: [N×D], k/v: [P×D], out: [N×D]; D is split into `heads` blocks of
/// D/heads columns. Scores are scaled by 1/sqrt(D/heads) and normalised over
/// the P axis. When `weights` is non-null it receives the [heads×N×P]
/// attention matrix; otherwise keys are streamed in tiles. Extra memory is
/// O(P·D) for the transposed keys. Counts exactly 2·N·P·D
/// MACs.
template <class T>
void attention_forward(const T* q, const T* k, const T* v, T* out, std::size_t n, std::size_t p, std::size_t d,
                       std::size_t heads, T* weights = nullptr, MacCounter* counter = nullptr) {
    const std::size_t dh = d / heads;
    const T inv_scale = T(1) / std::sqrt(static_cast<T>(dh));
    // Keys column-major per channel so the score loop runs over contiguous j.
    std::vector<T> kt(p * d);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t c = 0; c < d; ++c) kt[c * p + j] = k[j * d + c];
    if (!weights) {
        std::vector<T> vt(p * d);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t c = 0; c < d; ++c) vt[c * p + j] = v[j * d + c];
        attention_streaming(q, kt.data(), vt.data(), out, n, p, d, heads, inv_scale);
    } else {
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < n; ++i) {
                T* s = weights + (h * n + i) * p;
                attention_scores(q + i * d + off, kt.data() + off * p, s, p, dh, inv_scale);
                softmax_inplace(s, p);
                T* oi = out + i * d + off;
                for (std::size_t c = 0; c < dh; ++c) oi[c] = 0;
                for (std::size_t j = 0; j < p; ++j) {
                    const T w = s[j];
                    const T* vj = v + j * d + off;
                    for (std::size_t c = 0; c < dh; ++c) oi[c] += w * vj[c];
                }
            }
        }
    }
    if (counter) counter->macs += 2ULL * n * p * d;
}

}  // namespace swcf::kernels
