#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egoact/geometry.hpp"

namespace egoact {

// Predicted and ground-truth hands in pixel coordinates, with the width of
// the ground-truth hand bounding box used to normalize PCK.
struct PoseEvalRecord {
    HandPose predicted;
    HandPose ground_truth;
    double bbox_width = 1.0;
};

// Width of the tight box around a hand's keypoints.
double hand_bbox_width(const HandPose& hand);

// Order-fixed pairwise sum.
double pairwise_sum(std::span<const double> values);

// Euclidean error of every keypoint, in record order.
std::vector<double> keypoint_errors(std::span<const PoseEvalRecord> records);

double epe(std::span<const PoseEvalRecord> records);

// Fraction of keypoints with error / bbox_width < threshold. At threshold 0
// the fraction with exactly zero error is returned.
double pck(std::span<const PoseEvalRecord> records, double threshold = 0.2);

// Trapezoidal mean of PCK over num_thresholds + 1 evenly spaced thresholds on [0,1].
double auc(std::span<const PoseEvalRecord> records, int num_thresholds = 100);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

// Row = true class, column = predicted class.
std::vector<std::vector<int>> confusion(std::span<const int> predicted, std::span<const int> truth, int num_classes);

struct MetricReport {
    std::optional<double> epe;
    std::optional<double> pck02;
    std::optional<double> auc;
    std::optional<double> accuracy;
    std::vector<std::vector<int>> confusion;
    std::size_t n = 0;

    std::string to_json() const;
};

} // namespace egoact
