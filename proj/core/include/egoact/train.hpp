#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egoact/augment.hpp"
#include "egoact/dataset.hpp"
#include "egoact/error.hpp"
#include "egoact/net.hpp"
#include "egoact/optim.hpp"

namespace egoact {

template <typename T>
struct LossResult {
    T loss = 0;
    Eigen::Matrix<T, 1, Eigen::Dynamic> grad; // d-loss / d-logits
};

// -log softmax(logits)[label] with max subtraction; gradient = softmax - onehot.
template <typename T>
LossResult<T> cross_entropy(std::span<const T> logits, int label) {
    const auto n = static_cast<int>(logits.size());
    if (label < 0 || label >= n) {
        throw InvalidInput("label " + std::to_string(label) + " outside [0, " + std::to_string(n) + ")");
    }
    T mx = -std::numeric_limits<T>::infinity();
    for (T v : logits) mx = std::max(mx, v);
    LossResult<T> r;
    r.grad.resize(n);
    T sum = 0;
    for (int i = 0; i < n; ++i) {
        r.grad(i) = std::exp(logits[static_cast<std::size_t>(i)] - mx);
        sum += r.grad(i);
    }
    r.loss = std::log(sum) - (logits[static_cast<std::size_t>(label)] - mx);
    r.grad /= sum;
    r.grad(label) -= T(1);
    return r;
}

enum class ScheduleKind {
    H2O,      // halve at 900, then every 200 epochs
    FPHA,     // halve at 100 and at 1000
    Constant,
};

struct LrSchedule {
    ScheduleKind kind = ScheduleKind::H2O;
    double lr0 = 0.001;
};

std::string to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(const std::string& s);

double lr_at(int epoch, const LrSchedule& schedule);

struct TrainConfig {
    int batch_size = 64;
    LrSchedule schedule;
    int epochs = 1200;
    AdamWConfig adamw;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    AugmentConfig augment;
    PoseSource train_pose_source = PoseSource::GroundTruth;
    PoseSource eval_pose_source = PoseSource::GroundTruth;
    // 1 = strictly single-threaded.
    int threads = 1;
    int checkpoint_every = 10;

    void validate() const;
};

struct HistoryEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;

    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

std::string to_json_line(const HistoryEntry& e);
HistoryEntry history_entry_from_json_line(const std::string& line);

struct TrainData {
    DatasetLayout layout;
    std::vector<ActionSample> train;
    std::vector<ActionSample> val;
};

struct TrainResult {
    std::vector<HistoryEntry> history;
    int best_epoch = -1;
    double best_val_acc = 0.0;
    ClassifierParams<float> best_params;
    ClassifierParams<float> final_params;
};

struct TrainRunOptions {
    // When set, history.jsonl, best.ckpt and last.ckpt are written here.
    std::optional<std::filesystem::path> out_dir;
    // Continue from out_dir/last.ckpt when it exists.
    bool resume = false;
    std::function<void(const HistoryEntry&)> on_epoch;
};

// Deterministic random stream seed derived from (seed, epoch, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t purpose, std::uint64_t index);

// Eval-mode, uniformly sub-sampled predictions.
std::vector<int> predict_labels(const ClassifierParams<float>& params, std::span<const ActionSample> samples,
                                const DatasetLayout& layout);
double evaluate_accuracy(const ClassifierParams<float>& params, std::span<const ActionSample> samples,
                         const DatasetLayout& layout);

// Selects the checkpoint with the best validation accuracy (earliest epoch on
// ties). With an empty validation split the final epoch is kept.
TrainResult train_run(const TrainData& data, const NetConfig& net_cfg, const TrainConfig& train_cfg,
                      std::uint64_t seed, const TrainRunOptions& opts = {});

struct SeedSummary {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation (n - 1)
    double best = 0.0;
    std::size_t n = 0;
};

// Requires at least two runs.
SeedSummary multi_seed_report(std::span<const double> accuracies);
// Percent values, e.g. "89.17% ± 1.56 (best 91.32%, n=5)".
std::string format_summary(const SeedSummary& s);

} // namespace egoact
