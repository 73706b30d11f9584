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


#include "swcf/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "swcf/error.hpp"

namespace swcf {

namespace {

void require_points(const Tensor& t, const char* what) {
    if (t.rank() != 2 || t.dim(1) != 3) {
        throw DimensionError(std::string(what) + " must be [N×3], got " + shape_str(t.shape()));
    }
}

inline double dist2(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

struct Candidate {
    double d2;
    Index idx;
    bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
};

/// Keeps the best k candidates in sorted order.
class BestK {
  public:
    explicit BestK(std::size_t k) : k_(k) { items_.reserve(k + 1); }

    void offer(double d2, Index idx) {
        const Candidate c{d2, idx};
        if (items_.size() == k_ && !(c < items_.back())) return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), c);
        items_.insert(pos, c);
        if (items_.size() > k_) items_.pop_back();
    }
    bool full() const { return items_.size() == k_; }
    double worst() const { return items_.back().d2; }
    const std::vector<Candidate>& items() const { return items_; }
    void clear() { items_.clear(); }

  private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

/// Uniform voxel grid over a point set, cells stored in CSR form.
class Grid {
  public:
    explicit Grid(const Tensor& pts) : pts_(pts) {
        const std::size_t n = pts.dim(0);
        for (int a = 0; a < 3; ++a) {
            lo_[a] = std::numeric_limits<double>::infinity();
            double hi = -lo_[a];
            for (std::size_t i = 0; i < n; ++i) {
                lo_[a] = std::min(lo_[a], pts[i * 3 + a]);
                hi = std::max(hi, pts[i * 3 + a]);
            }
            ext_[a] = hi - lo_[a];
        }
        const double max_ext = std::max({ext_[0], ext_[1], ext_[2], 1e-9});
        double vol = 1.0;
        for (int a = 0; a < 3; ++a) vol *= std::max(ext_[a], max_ext * 1e-3);
        // Aim for a handful of points per occupied cell.
        h_ = std::cbrt(vol * 4.0 / static_cast<double>(n));
        h_ = std::max(h_, max_ext * 1e-6);
        for (;;) {
            std::size_t cells = 1;
            for (int a = 0; a < 3; ++a) {
                dims_[a] = static_cast<long>(std::floor(ext_[a] / h_)) + 1;
                cells *= static_cast<std::size_t>(dims_[a]);
            }
            if (cells <= 4 * n + 64) break;
            h_ *= 1.5;
        }
        const std::size_t cells = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
        start_.assign(cells + 1, 0);
        std::vector<std::size_t> cell_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::array<long, 3> c{};
            for (int a = 0; a < 3; ++a) c[a] = std::clamp(cell_coord(pts[i * 3 + a], a), 0L, dims_[a] - 1);
            cell_of[i] = flat(c);
            ++start_[cell_of[i] + 1];
        }
        std::partial_sum(start_.begin(), start_.end(), start_.begin());
        items_.resize(n);
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < n; ++i) items_[fill[cell_of[i]]++] = i;
    }

    void search(const double* q, BestK& best) const {
        std::array<long, 3> c{};
        long r0 = 0;
        long r_max = 0;
        for (int a = 0; a < 3; ++a) {
            c[a] = cell_coord(q[a], a);
            const long below = c[a] < 0 ? -c[a] : 0;
            const long above = c[a] > dims_[a] - 1 ? c[a] - (dims_[a] - 1) : 0;
            r0 = std::max(r0, std::max(below, above));
            r_max = std::max(r_max, std::max(std::abs(c[a]), std::abs(dims_[a] - 1 - c[a])));
        }
        for (long r = r0; r <= r_max; ++r) {
            visit_ring(c, r, q, best);
            // Every unvisited cell is at least r cells away along one axis.
            const double bound = static_cast<double>(r) * h_;
            if (best.full() && best.worst() < bound * bound) return;
        }
    }

  private:
    long cell_coord(double v, int a) const { return static_cast<long>(std::floor((v - lo_[a]) / h_)); }
    std::size_t flat(const std::array<long, 3>& c) const {
        return static_cast<std::size_t>((c[0] * dims_[1] + c[1]) * dims_[2] + c[2]);
    }

    void visit_ring(const std::array<long, 3>& c, long r, const double* q, BestK& best) const {
        std::array<long, 3> lo{}, hi{};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(c[a] - r, 0L);
            hi[a] = std::min(c[a] + r, dims_[a] - 1);
            if (lo[a] > hi[a]) return;
        }
        std::array<long, 3> p{};
        for (p[0] = lo[0]; p[0] <= hi[0]; ++p[0]) {
            for (p[1] = lo[1]; p[1] <= hi[1]; ++p[1]) {
                const bool edge01 = std::abs(p[0] - c[0]) == r || std::abs(p[1] - c[1]) == r;
                for (p[2] = lo[2]; p[2] <= hi[2]; ++p[2]) {
                    if (!edge01 && std::abs(p[2] - c[2]) != r) {
                        // Jump straight to the far face of the ring.
                        if (p[2] < c[2] + r) p[2] = std::max(p[2], c[2] + r - 1);
                        continue;
                    }
                    const std::size_t cell = flat(p);
                    for (std::size_t s = start_[cell]; s < start_[cell + 1]; ++s) {
                        const Index i = items_[s];
                        best.offer(dist2(q, pts_.data().data() + i * 3), i);
                    }
                }
            }
        }
    }

    const Tensor& pts_;
    std::array<double, 3> lo_{}, ext_{};
    std::array<long, 3> dims_{};
    double h_ = 1.0;
    std::vector<std::size_t> start_;
    std::vector<Index> items_;
};

void check_k(std::size_t k, std::size_t n) {
    if (k == 0) throw ArgumentError("knn: K must be at least 1");
    if (k > n) throw ArgumentError("knn: K=" + std::to_string(k) + " exceeds source size " + std::to_string(n));
}

}  // namespace

void PointCloud::validate() const {
    if (positions.rank() != 2 || positions.dim(1) != 3) {
        throw DataError("positions must be [N×3], got " + shape_str(positions.shape()));
    }
    const std::size_t n = positions.dim(0);
    if (n == 0) throw DataError("point cloud is empty");
    if (!positions.all_finite()) throw DataError("point cloud has non-finite positions");
    if (features && (features->rank() != 2 || features->dim(0) != n)) {
        throw DataError("features " + shape_str(features->shape()) + " do not match " + std::to_string(n) + " points");
    }
    if (labels && labels->size() != n) {
        throw DataError(std::to_string(labels->size()) + " labels for " + std::to_string(n) + " points");
    }
}

PointCloud PointCloud::select(std::span<const Index> idx) const {
    auto take = [&idx](const Tensor& t) {
        const std::size_t cols = t.cols();
        Tensor out(Shape{idx.size(), cols});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= t.rows()) throw IndexError("select: index " + std::to_string(idx[i]) + " out of range");
            std::copy_n(t.data().data() + idx[i] * cols, cols, out.data().data() + i * cols);
        }
        return out;
    };
    PointCloud out;
    out.positions = take(positions);
    if (features) out.features = take(*features);
    if (labels) {
        std::vector<int> l(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) l[i] = (*labels)[idx[i]];
        out.labels = std::move(l);
    }
    return out;
}

std::vector<Index> fps(const Tensor& positions, std::size_t count, Index start) {
    require_points(positions, "fps positions");
    const std::size_t n = positions.dim(0);
    if (count == 0 || count > n) {
        throw ArgumentError("fps: cannot select " + std::to_string(count) + " of " + std::to_string(n) + " points");
    }
    if (start >= n) throw ArgumentError("fps: start index " + std::to_string(start) + " out of range");
    const double* p = positions.data().data();
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::vector<char> taken(n, 0);
    std::vector<Index> out;
    out.reserve(count);
    Index last = start;
    out.push_back(last);
    taken[last] = 1;
    while (out.size() < count) {
        Index best = n;
        double best_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double d = dist2(p + i * 3, p + last * 3);
            if (d < min_d2[i]) min_d2[i] = d;
            if (min_d2[i] > best_d) {
                best_d = min_d2[i];
                best = i;
            }
        }
        last = best;
        taken[last] = 1;
        out.push_back(last);
    }
    return out;
}

std::vector<Index> fps(const PointCloud& cloud, std::size_t count, Index start) {
    return fps(cloud.positions, count, start);
}

NeighborIndex knn_brute_force(const Tensor& queries, const Tensor& source, std::size_t k) {
    require_points(queries, "knn queries");
    require_points(source, "knn source");
    const std::size_t m = queries.dim(0), n = source.dim(0);
    check_k(k, n);
    NeighborIndex out{m, k, std::vector<Index>(m * k)};
    BestK best(k);
    for (std::size_t i = 0; i < m; ++i) {
        best.clear();
        const double* q = queries.data().data() + i * 3;
        for (std::size_t j = 0; j < n; ++j) best.offer(dist2(q, source.data().data() + j * 3), j);
        for (std::size_t j = 0; j < k; ++j) out.indices[i * k + j] = best.items()[j].idx;
    }
    return out;
}

NeighborIndex knn(const Tensor& queries, const Tensor& source, std::size_t k) {
    require_points(queries, "knn queries");
    require_points(source, "knn source");
    const std::size_t m = queries.dim(0), n = source.dim(0);
    check_k(k, n);
    if (n <= 64 || 2 * k >= n) return knn_brute_force(queries, source, k);
    const Grid grid(source);
    NeighborIndex out{m, k, std::vector<Index>(m * k)};
    BestK best(k);
    for (std::size_t i = 0; i < m; ++i) {
        best.clear();
        grid.search(queries.data().data() + i * 3, best);
        for (std::size_t j = 0; j < k; ++j) out.indices[i * k + j] = best.items()[j].idx;
    }
    return out;
}

std::size_t downsample_count(std::size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ArgumentError("downsample ratio must lie in (0, 1]");
    const double exact = static_cast<double>(n) * ratio;
    auto m = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::clamp<std::size_t>(m, std::min<std::size_t>(1, n), n);
}

std::vector<Index> random_subset(std::size_t n, double ratio, RngState& rng) {
    const std::size_t m = downsample_count(n, ratio);
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    if (m == n) return perm;
    for (std::size_t i = 0; i < m; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
    perm.resize(m);
    std::sort(perm.begin(), perm.end());
    return perm;
}

Downsampled random_downsample(const PointCloud& cloud, double ratio, RngState& rng) {
    std::vector<Index> kept = random_subset(cloud.size(), ratio, rng);
    PointCloud sub = cloud.select(kept);
    return Downsampled{std::move(sub), std::move(kept)};
}

std::vector<Index> nn_upsample_map(const Tensor& coarse, const Tensor& fine) {
    require_points(coarse, "coarse positions");
    if (coarse.dim(0) == 0) throw ArgumentError("nn_upsample_map: empty coarse set");
    NeighborIndex nn = knn(fine, coarse, 1);
    return nn.indices;
}

}  // namespace swcf
