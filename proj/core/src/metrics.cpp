#include "egoact/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "egoact/error.hpp"

namespace egoact {

namespace {

void require_records(std::span<const PoseEvalRecord> records) {
    if (records.empty()) throw InvalidInput("pose metrics need at least one record");
    for (const auto& r : records) {
        if (!(r.bbox_width > 0.0)) throw InvalidInput("bbox_width must be > 0");
    }
}

std::vector<double> keypoint_errors_impl(std::span<const PoseEvalRecord> records) {
    require_records(records);
    std::vector<double> out;
    out.reserve(records.size() * kHandKeypoints);
    for (const auto& r : records) {
        for (int j = 0; j < kHandKeypoints; ++j) {
            const auto& p = r.predicted.keypoints[static_cast<std::size_t>(j)];
            const auto& g = r.ground_truth.keypoints[static_cast<std::size_t>(j)];
            out.push_back(std::hypot(static_cast<double>(p.x) - g.x, static_cast<double>(p.y) - g.y));
        }
    }
    return out;
}

std::vector<double> normalized_errors(std::span<const PoseEvalRecord> records) {
    auto out = keypoint_errors_impl(records);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= records[i / kHandKeypoints].bbox_width;
    return out;
}

// Count of sorted errors strictly below t (or exactly zero at t = 0).
double pck_sorted(const std::vector<double>& sorted, double threshold) {
    const auto count = threshold <= 0.0 ? std::upper_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin()
                                        : std::lower_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin();
    return static_cast<double>(count) / static_cast<double>(sorted.size());
}

} // namespace

double hand_bbox_width(const HandPose& hand) {
    auto [lo, hi] = std::minmax_element(hand.keypoints.begin(), hand.keypoints.end(),
                                        [](const Keypoint& a, const Keypoint& b) { return a.x < b.x; });
    return static_cast<double>(hi->x) - lo->x;
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const auto half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::vector<double> keypoint_errors(std::span<const PoseEvalRecord> records) {
    return keypoint_errors_impl(records);
}

double epe(std::span<const PoseEvalRecord> records) {
    const auto errors = keypoint_errors(records);
    return pairwise_sum(errors) / static_cast<double>(errors.size());
}

double pck(std::span<const PoseEvalRecord> records, double threshold) {
    auto errors = normalized_errors(records);
    std::sort(errors.begin(), errors.end());
    return pck_sorted(errors, threshold);
}

double auc(std::span<const PoseEvalRecord> records, int num_thresholds) {
    if (num_thresholds < 1) throw InvalidInput("num_thresholds must be >= 1");
    auto errors = normalized_errors(records);
    std::sort(errors.begin(), errors.end());
    std::vector<double> segments;
    segments.reserve(static_cast<std::size_t>(num_thresholds));
    const double step = 1.0 / num_thresholds;
    double prev = pck_sorted(errors, 0.0);
    for (int i = 1; i <= num_thresholds; ++i) {
        const double cur = pck_sorted(errors, static_cast<double>(i) / num_thresholds);
        segments.push_back(0.5 * (prev + cur) * step);
        prev = cur;
    }
    return pairwise_sum(segments);
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw InvalidInput("prediction and label vectors differ in length");
    if (truth.empty()) throw InvalidInput("accuracy of an empty set is undefined");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<std::vector<int>> confusion(std::span<const int> predicted, std::span<const int> truth,
                                        int num_classes) {
    if (predicted.size() != truth.size()) throw InvalidInput("prediction and label vectors differ in length");
    std::vector<std::vector<int>> m(static_cast<std::size_t>(num_classes),
                                    std::vector<int>(static_cast<std::size_t>(num_classes), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes) {
            throw InvalidInput("label outside [0, num_classes)");
        }
        ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    }
    return m;
}

std::string MetricReport::to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["epe"] = opt(epe);
    j["pck02"] = opt(pck02);
    j["auc"] = opt(auc);
    j["accuracy"] = opt(accuracy);
    j["confusion"] = confusion;
    j["n"] = n;
    return j.dump(2);
}

} // namespace egoact
