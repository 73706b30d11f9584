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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swcf/network.hpp"

namespace swcf {

struct TrainConfig {
    double lr0 = 1e-2;
    double decay = 0.95;
    std::size_t epochs = 100;
    /// 0: one pass over the dataset per epoch, ⌈|dataset| / batch_size⌉ steps.
    std::size_t steps_per_epoch = 0;
    std::size_t batch_size = 5;
    std::size_t points_per_sample = 45056;
    /// Empty: derived from the training label histogram.
    std::vector<double> class_weights;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Batch elements evaluated concurrently; the gradient reduction order is
    /// fixed, so results do not depend on this value.
    std::size_t threads = 1;

    void validate(std::size_t num_classes) const;

    /// Short single-scene schedule for synthetic desk runs.
    static TrainConfig desk();
};

/// Σ_i w[y_i]·(−log softmax(z_i)[y_i]) / Σ_i w[y_i]. Labels equal to
/// `ignore_label` (default: the class count) are skipped.
Var weighted_ce(Var logits, std::span<const int> labels, std::span<const double> weights,
                std::optional<int> ignore_label = std::nullopt);

/// w_c = 1/sqrt(freq_c + eps), zero-count classes get the largest weight,
/// then everything is scaled to mean 1.
std::vector<double> class_weights_from_freq(std::span<const std::uint64_t> histogram, double eps = 1e-6);

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;
};

/// Bias-corrected Adam. Rejects (throws NumericError, changes nothing) when a
/// gradient is not finite.
class Adam {
  public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::span<Parameter* const> params, std::span<const Tensor> grads, double lr);

    const AdamState& state() const { return state_; }

  private:
    double beta1_, beta2_, eps_;
    AdamState state_;
};

double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch);

/// Rows are true classes, columns predictions.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(std::size_t classes = 0) : classes_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return classes_; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * classes_ + pred]; }
    void add(int truth, int pred, std::uint64_t count = 1);
    /// Labels outside [0, C) are skipped.
    void add_all(std::span<const int> truth, std::span<const int> pred);
    void merge(const ConfusionMatrix& other);
    std::uint64_t total() const;

    static ConfusionMatrix from_counts(std::size_t classes, std::vector<std::uint64_t> counts);

  private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
};

struct MiouResult {
    /// Empty entries: class absent from both truth and predictions.
    std::vector<std::optional<double>> iou;
    double mean = 0.0;
    double accuracy = 0.0;
};

/// IoU_c = TP/(TP+FP+FN). With `exclude_absent`, classes whose denominator is
/// zero are left out of the mean; otherwise they count as 0.
MiouResult miou(const ConfusionMatrix& cm, bool exclude_absent = true);

struct StepLog {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double lr = 0.0;
    double loss = 0.0;
    double acc = 0.0;
    double miou = 0.0;
};

/// `epoch,step,lr,loss,acc,miou`
std::string metric_csv(const std::vector<StepLog>& log);

/// Uniform point subset of the given size (with replacement iff the cloud
/// is smaller).
std::vector<Index> sample_points(std::size_t n, std::size_t count, RngState& rng);

struct TrainResult {
    std::vector<StepLog> log;
    std::vector<double> class_weights;
};

using StepCallback = std::function<void(const StepLog&)>;

/// Mini-batch training: per step, crop each cloud to points_per_sample,
/// forward, weighted CE, backward, ordered gradient mean, Adam at lr_at_epoch.
TrainResult train(ModelState& model, const std::vector<PointCloud>& dataset, const NetworkConfig& net_cfg,
                  const TrainConfig& cfg, const RngState& rng, const StepCallback& on_step = {});

/// Confusion matrix of the model over labelled clouds.
ConfusionMatrix evaluate(const ModelState& model, const std::vector<PointCloud>& clouds, const NetworkConfig& cfg,
                         const RngState& rng);

}  // namespace swcf
