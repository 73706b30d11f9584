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


#include "swcf/training.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <numeric>
#include <sstream>

#include "swcf/csv.hpp"
#include "swcf/error.hpp"

namespace swcf {

void TrainConfig::validate(std::size_t num_classes) const {
    if (!(lr0 >= 0.0)) throw ConfigError("lr0 must be non-negative");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (points_per_sample == 0) throw ConfigError("points_per_sample must be at least 1");
    if (!class_weights.empty()) {
        if (class_weights.size() != num_classes) {
            throw ConfigError(std::to_string(class_weights.size()) + " class weights for " +
                              std::to_string(num_classes) + " classes");
        }
        for (double w : class_weights)
            if (!(w > 0.0)) throw ConfigError("class weights must be positive");
    }
    if (threads == 0) throw ConfigError("threads must be at least 1");
}

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.epochs = 20;
    c.steps_per_epoch = 10;
    c.batch_size = 2;
    c.points_per_sample = 2048;
    return c;
}

Var weighted_ce(Var logits, std::span<const int> labels, std::span<const double> weights,
                std::optional<int> ignore_label) {
    const Tensor& z = logits.value();
    if (z.rank() != 2) throw DimensionError("weighted_ce: logits must be [N×C]");
    const std::size_t n = z.dim(0), c = z.dim(1);
    if (labels.size() != n) throw DimensionError("weighted_ce: label count differs from logits rows");
    if (weights.size() != c) throw DimensionError("weighted_ce: need one weight per class");
    const int ignore = ignore_label.value_or(static_cast<int>(c));

    auto probs = std::make_shared<Tensor>(z.shape());
    auto lab = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
    double total_w = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y == ignore) continue;
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            throw DataError("label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
        }
        const double* zi = z.data().data() + i * c;
        double* pi = probs->data().data() + i * c;
        const double mx = *std::max_element(zi, zi + c);
        double s = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            pi[k] = std::exp(zi[k] - mx);
            s += pi[k];
        }
        for (std::size_t k = 0; k < c; ++k) pi[k] /= s;
        const double nll = std::log(s) + mx - zi[y];
        total_w += weights[y];
        acc += weights[y] * nll;
    }
    if (!(total_w > 0.0)) throw DataError("weighted_ce: no labelled points");
    auto w = std::make_shared<std::vector<double>>(weights.begin(), weights.end());
    const std::size_t li = logits.id;
    return logits.tape->record(Tensor::scalar(acc / total_w), {logits},
                               [=](Tape& t, const Tensor& g) {
                                   auto gz = t.grad_span(li);
                                   const double scale = g[0] / total_w;
                                   for (std::size_t i = 0; i < n; ++i) {
                                       const int y = (*lab)[i];
                                       if (y == ignore) continue;
                                       const double wy = (*w)[y] * scale;
                                       for (std::size_t k = 0; k < c; ++k) {
                                           const double ind = static_cast<int>(k) == y ? 1.0 : 0.0;
                                           gz[i * c + k] += wy * ((*probs)[i * c + k] - ind);
                                       }
                                   }
                               },
                               "weighted_ce");
}

std::vector<double> class_weights_from_freq(std::span<const std::uint64_t> histogram, double eps) {
    const std::uint64_t total = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
    if (total == 0) throw DataError("class histogram is all zero");
    std::vector<double> w(histogram.size(), 0.0);
    double max_w = 0.0;
    for (std::size_t c = 0; c < histogram.size(); ++c) {
        if (histogram[c] == 0) continue;
        const double freq = static_cast<double>(histogram[c]) / static_cast<double>(total);
        w[c] = 1.0 / std::sqrt(freq + eps);
        max_w = std::max(max_w, w[c]);
    }
    for (std::size_t c = 0; c < histogram.size(); ++c)
        if (histogram[c] == 0) w[c] = max_w;
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (double& v : w) v /= mean;
    return w;
}

void Adam::step(std::span<Parameter* const> params, std::span<const Tensor> grads, double lr) {
    if (params.size() != grads.size()) throw DimensionError("adam: parameter and gradient counts differ");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != params[i]->value.size()) {
            throw DimensionError("adam: gradient shape mismatch for " + params[i]->name);
        }
        if (!grads[i].all_finite()) throw NumericError("adam: non-finite gradient for " + params[i]->name);
    }
    if (state_.m.empty()) {
        for (Parameter* p : params) {
            state_.m.emplace_back(p->value.shape(), 0.0);
            state_.v.emplace_back(p->value.shape(), 0.0);
        }
    } else if (state_.m.size() != params.size()) {
        throw StateError("adam: parameter set changed between steps");
    }
    ++state_.step;
    const double t = static_cast<double>(state_.step);
    const double c1 = 1.0 - std::pow(beta1_, t);
    const double c2 = 1.0 - std::pow(beta2_, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto x = params[i]->value.data();
        auto m = state_.m[i].data();
        auto v = state_.v[i].data();
        auto g = grads[i].data();
        for (std::size_t j = 0; j < x.size(); ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            x[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

double lr_at_epoch(const TrainConfig& cfg, std::size_t epoch) {
    return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(epoch));
}

void ConfusionMatrix::add(int truth, int pred, std::uint64_t count) {
    if (truth < 0 || pred < 0 || static_cast<std::size_t>(truth) >= classes_ ||
        static_cast<std::size_t>(pred) >= classes_) {
        throw IndexError("confusion matrix entry (" + std::to_string(truth) + ", " + std::to_string(pred) +
                         ") outside " + std::to_string(classes_) + " classes");
    }
    counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(pred)] += count;
}

void ConfusionMatrix::add_all(std::span<const int> truth, std::span<const int> pred) {
    if (truth.size() != pred.size()) throw DimensionError("confusion matrix: truth/prediction counts differ");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes_) continue;
        add(truth[i], pred[i]);
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw DimensionError("cannot merge confusion matrices of different sizes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix ConfusionMatrix::from_counts(std::size_t classes, std::vector<std::uint64_t> counts) {
    if (counts.size() != classes * classes) throw DimensionError("confusion matrix needs C×C counts");
    ConfusionMatrix cm(classes);
    cm.counts_ = std::move(counts);
    return cm;
}

MiouResult miou(const ConfusionMatrix& cm, bool exclude_absent) {
    const std::size_t c = cm.classes();
    MiouResult r;
    r.iou.resize(c);
    double sum = 0.0, diag = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < c; ++k) {
        const std::uint64_t tp = cm.at(k, k);
        std::uint64_t fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            fp += cm.at(j, k);
            fn += cm.at(k, j);
        }
        diag += static_cast<double>(tp);
        const std::uint64_t den = tp + fp + fn;
        if (den == 0) {
            if (!exclude_absent) {
                r.iou[k] = 0.0;
                ++present;
            }
            continue;
        }
        r.iou[k] = static_cast<double>(tp) / static_cast<double>(den);
        sum += *r.iou[k];
        ++present;
    }
    r.mean = present ? sum / static_cast<double>(present) : 0.0;
    const std::uint64_t total = cm.total();
    r.accuracy = total ? diag / static_cast<double>(total) : 0.0;
    return r;
}

std::string metric_csv(const std::vector<StepLog>& log) {
    std::ostringstream os;
    os << "epoch,step,lr,loss,acc,miou\n";
    for (const auto& s : log) {
        os << s.epoch << ',' << s.step << ',' << format_double(s.lr) << ',' << format_double(s.loss) << ','
           << format_double(s.acc) << ',' << format_double(s.miou) << '\n';
    }
    return os.str();
}

std::vector<Index> sample_points(std::size_t n, std::size_t count, RngState& rng) {
    if (n == 0) throw DataError("cannot sample from an empty cloud");
    if (count >= n) {
        if (count == n) {
            std::vector<Index> all(n);
            std::iota(all.begin(), all.end(), Index{0});
            return all;
        }
        std::vector<Index> out(count);
        for (auto& i : out) i = static_cast<Index>(rng.below(n));
        return out;
    }
    return random_subset(n, static_cast<double>(count) / static_cast<double>(n), rng);
}

namespace {

struct ElementResult {
    std::vector<Tensor> grads;
    double loss = 0.0;
    std::vector<int> truth;
    std::vector<int> pred;
};

ElementResult run_element(const ModelState& model, const PointCloud& crop, const NetworkConfig& net_cfg,
                          std::span<const double> weights, const RngState& rng) {
    Tape tape;
    ForwardResult fr = forward(tape, crop, model, net_cfg, rng);
    Var loss = weighted_ce(fr.logits, *crop.labels, weights);
    tape.backward(loss);
    ElementResult r;
    r.loss = loss.value()[0];
    model.visit_params([&](const Parameter& p) { r.grads.push_back(tape.param_grad(p)); });
    r.truth = *crop.labels;
    r.pred = argmax_rows(fr.logits.value());
    return r;
}

}  // namespace

TrainResult train(ModelState& model, const std::vector<PointCloud>& dataset, const NetworkConfig& net_cfg,
                  const TrainConfig& cfg, const RngState& rng, const StepCallback& on_step) {
    net_cfg.validate();
    cfg.validate(net_cfg.num_classes);
    if (dataset.empty()) throw DataError("training dataset is empty");
    const std::size_t classes = net_cfg.num_classes;
    for (const auto& cloud : dataset) {
        cloud.validate();
        if (!cloud.labels) throw DataError("training cloud without labels");
        if (!cloud.features) throw DataError("training cloud without input features");
    }

    TrainResult result;
    result.class_weights = cfg.class_weights;
    if (result.class_weights.empty()) {
        std::vector<std::uint64_t> hist(classes, 0);
        for (const auto& cloud : dataset)
            for (int y : *cloud.labels)
                if (y >= 0 && static_cast<std::size_t>(y) < classes) ++hist[static_cast<std::size_t>(y)];
        result.class_weights = class_weights_from_freq(hist);
    }

    const std::size_t steps_per_epoch =
        cfg.steps_per_epoch ? cfg.steps_per_epoch : (dataset.size() + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<Parameter*> params = model.parameters();
    Adam adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    RngState order_rng = rng.fork(0x6f72646572ULL);
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    std::size_t global_step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at_epoch(cfg, epoch);
        for (std::size_t s = 0; s < steps_per_epoch; ++s, ++global_step) {
            std::vector<PointCloud> crops;
            std::vector<RngState> fwd_rngs;
            for (std::size_t b = 0; b < cfg.batch_size; ++b) {
                if (cursor == order.size()) {
                    order.resize(dataset.size());
                    std::iota(order.begin(), order.end(), std::size_t{0});
                    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
                    cursor = 0;
                }
                const PointCloud& cloud = dataset[order[cursor++]];
                RngState element = rng.fork(global_step).fork(b);
                RngState crop_rng = element.fork(1);
                crops.push_back(cloud.select(sample_points(cloud.size(), cfg.points_per_sample, crop_rng)));
                fwd_rngs.push_back(element.fork(2));
            }

            std::vector<ElementResult> results(crops.size());
            const ModelState& frozen = model;
            if (cfg.threads <= 1) {
                for (std::size_t b = 0; b < crops.size(); ++b)
                    results[b] = run_element(frozen, crops[b], net_cfg, result.class_weights, fwd_rngs[b]);
            } else {
                for (std::size_t start = 0; start < crops.size(); start += cfg.threads) {
                    std::vector<std::future<ElementResult>> jobs;
                    for (std::size_t b = start; b < std::min(crops.size(), start + cfg.threads); ++b) {
                        jobs.push_back(std::async(std::launch::async, [&, b] {
                            return run_element(frozen, crops[b], net_cfg, result.class_weights, fwd_rngs[b]);
                        }));
                    }
                    for (std::size_t j = 0; j < jobs.size(); ++j) results[start + j] = jobs[j].get();
                }
            }

            // Ordered reduction: element 0, then 1, ... regardless of threads.
            std::vector<Tensor> grads = std::move(results[0].grads);
            double loss = results[0].loss;
            ConfusionMatrix cm(classes);
            cm.add_all(results[0].truth, results[0].pred);
            for (std::size_t b = 1; b < results.size(); ++b) {
                for (std::size_t i = 0; i < grads.size(); ++i) {
                    auto dst = grads[i].data();
                    auto src = results[b].grads[i].data();
                    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                }
                loss += results[b].loss;
                cm.add_all(results[b].truth, results[b].pred);
            }
            const double inv_b = 1.0 / static_cast<double>(results.size());
            for (auto& g : grads)
                for (double& v : g.data()) v *= inv_b;
            loss *= inv_b;
            if (!std::isfinite(loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(global_step) + " (lr " + format_double(lr) + ")");
            }
            adam.step(params, grads, lr);

            const MiouResult m = miou(cm);
            StepLog entry{epoch, global_step, lr, loss, m.accuracy, m.mean};
            result.log.push_back(entry);
            if (on_step) on_step(entry);
        }
    }
    return result;
}

ConfusionMatrix evaluate(const ModelState& model, const std::vector<PointCloud>& clouds, const NetworkConfig& cfg,
                         const RngState& rng) {
    ConfusionMatrix cm(cfg.num_classes);
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        if (!clouds[i].labels) throw DataError("evaluation cloud without labels");
        const std::vector<int> pred = infer(clouds[i], model, cfg, rng.fork(i));
        cm.add_all(*clouds[i].labels, pred);
    }
    return cm;
}

}  // namespace swcf
