#include "egoact/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "egoact/error.hpp"

namespace egoact {

namespace {

bool finite(const Keypoint& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

bool is_zero(const Keypoint& p) { return p.x == 0.0f && p.y == 0.0f; }

bool normalized(const Keypoint& p) { return p.x >= 0.0f && p.x <= 1.0f && p.y >= 0.0f && p.y <= 1.0f; }

template <std::size_t K>
void write_points(const std::array<Keypoint, K>& pts, std::span<float> out) {
    for (std::size_t i = 0; i < K; ++i) {
        out[2 * i] = pts[i].x;
        out[2 * i + 1] = pts[i].y;
    }
}

template <std::size_t K>
bool read_points(std::span<const float> in, std::array<Keypoint, K>& pts) {
    bool any = false;
    for (std::size_t i = 0; i < K; ++i) {
        pts[i] = {in[2 * i], in[2 * i + 1]};
        any = any || !is_zero(pts[i]);
    }
    return any;
}

} // namespace

int DatasetLayout::frame_dim() const noexcept {
    return variant == LayoutVariant::TwoHandsWithObject ? slices::two_hand_dim : slices::one_hand_dim;
}

DatasetLayout DatasetLayout::two_hands(int num_classes, int num_object_classes) {
    return {LayoutVariant::TwoHandsWithObject, num_classes, num_object_classes};
}

DatasetLayout DatasetLayout::one_hand(int num_classes, int num_object_classes) {
    return {LayoutVariant::OneHandWithLabel, num_classes, num_object_classes};
}

std::string to_string(LayoutVariant v) {
    return v == LayoutVariant::TwoHandsWithObject ? "two_hands_with_object" : "one_hand_with_label";
}

LayoutVariant layout_variant_from_string(const std::string& s) {
    if (s == "two_hands_with_object") return LayoutVariant::TwoHandsWithObject;
    if (s == "one_hand_with_label") return LayoutVariant::OneHandWithLabel;
    throw InvalidInput("unknown layout variant '" + s + "'");
}

SequenceTensor::SequenceTensor(int n, int d)
    : seq_len(n), frame_dim(d), valid_frames(0), data(static_cast<std::size_t>(n) * d, 0.0f) {}

std::span<float> SequenceTensor::row(int r) {
    return std::span<float>(data).subspan(static_cast<std::size_t>(r) * frame_dim, frame_dim);
}

std::span<const float> SequenceTensor::row(int r) const {
    return std::span<const float>(data).subspan(static_cast<std::size_t>(r) * frame_dim, frame_dim);
}

void validate(const HandPose& hand) {
    for (const auto& p : hand.keypoints) {
        if (!finite(p)) throw InvalidInput("hand keypoint is not finite");
        if (!hand.present && !is_zero(p)) throw InvalidInput("absent hand has non-zero keypoints");
    }
}

void validate(const ObjectPose& object) {
    for (const auto& p : object.corners) {
        if (!finite(p)) throw InvalidInput("object corner is not finite");
        if (!object.present && !is_zero(p)) throw InvalidInput("absent object has non-zero corners");
    }
    if (object.label < 0) throw InvalidInput("object label must be >= 0");
    if (!object.present && object.label != 0) throw InvalidInput("absent object has non-zero label");
}

void validate(const FramePose& frame) {
    if (frame.frame_index < 0) throw InvalidInput("frame_index must be >= 0");
    validate(frame.left);
    validate(frame.right);
    validate(frame.object);
}

void validate(const ActionSample& sample, const DatasetLayout& layout) {
    if (sample.frames.empty()) throw InvalidInput("sample '" + sample.sequence_id + "' has no frames");
    if (sample.action_label < 0 || sample.action_label >= layout.num_classes) {
        throw InvalidInput("sample '" + sample.sequence_id + "' action label " + std::to_string(sample.action_label) +
                           " outside [0, " + std::to_string(layout.num_classes) + ")");
    }
    int prev = -1;
    for (const auto& f : sample.frames) {
        validate(f);
        if (f.frame_index <= prev) throw InvalidInput("frame indices must be strictly increasing");
        prev = f.frame_index;
        auto check = [&](const auto& pts) {
            for (const auto& p : pts) {
                if (!normalized(p)) throw InvalidInput("coordinate outside [0,1] in '" + sample.sequence_id + "'");
            }
        };
        check(f.left.keypoints);
        check(f.right.keypoints);
        check(f.object.corners);
        if (f.object.present && f.object.label >= layout.num_object_classes) {
            throw InvalidInput("object label " + std::to_string(f.object.label) + " >= num_object_classes");
        }
    }
}

void canonicalize(FramePose& frame) {
    if (!frame.left.present) frame.left.keypoints.fill({});
    if (!frame.right.present) frame.right.keypoints.fill({});
    if (!frame.object.present) {
        frame.object.corners.fill({});
        frame.object.label = 0;
    }
}

void flatten_frame_into(const FramePose& frame, const DatasetLayout& layout, std::span<float> out) {
    if (static_cast<int>(out.size()) != layout.frame_dim()) throw InvalidInput("output span has wrong frame size");
    if (layout.num_object_classes < 1) throw InvalidInput("num_object_classes must be >= 1");
    const float label =
        frame.object.present ? static_cast<float>(frame.object.label) / static_cast<float>(layout.num_object_classes)
                             : 0.0f;

    if (layout.variant == LayoutVariant::TwoHandsWithObject) {
        write_points(frame.left.keypoints, out.subspan(slices::left_begin, 42));
        write_points(frame.right.keypoints, out.subspan(slices::right_begin, 42));
        write_points(frame.object.corners, out.subspan(slices::object_begin, 8));
        out[slices::label_index] = label;
        return;
    }

    if (frame.left.present && frame.right.present) {
        throw InvalidInput("one-hand layout given a frame with both hands present");
    }
    const HandPose& hand = frame.left.present ? frame.left : frame.right;
    if (hand.present) {
        write_points(hand.keypoints, out.subspan(0, 42));
    } else {
        std::fill(out.begin(), out.begin() + 42, 0.0f);
    }
    out[slices::one_hand_label_index] = label;
}

std::vector<float> flatten_frame(const FramePose& frame, const DatasetLayout& layout) {
    std::vector<float> out(static_cast<std::size_t>(layout.frame_dim()), 0.0f);
    flatten_frame_into(frame, layout, out);
    return out;
}

FramePose unflatten_frame(std::span<const float> vec, const DatasetLayout& layout) {
    if (static_cast<int>(vec.size()) != layout.frame_dim()) throw InvalidInput("vector has wrong frame size");
    FramePose frame;
    auto decode_label = [&](float v) { return static_cast<int>(std::lround(v * layout.num_object_classes)); };
    if (layout.variant == LayoutVariant::TwoHandsWithObject) {
        frame.left.present = read_points(vec.subspan(slices::left_begin, 42), frame.left.keypoints);
        frame.right.present = read_points(vec.subspan(slices::right_begin, 42), frame.right.keypoints);
        frame.object.present = read_points(vec.subspan(slices::object_begin, 8), frame.object.corners);
        frame.object.label = decode_label(vec[slices::label_index]);
        frame.object.present = frame.object.present || frame.object.label != 0;
    } else {
        frame.right.present = read_points(vec.subspan(0, 42), frame.right.keypoints);
        frame.object.label = decode_label(vec[slices::one_hand_label_index]);
        frame.object.present = frame.object.label != 0;
    }
    return frame;
}

std::vector<int> subsample_indices(int num_frames, int seq_len, SubsampleMode mode, std::uint64_t seed) {
    if (num_frames < 1 || seq_len < 1) throw InvalidInput("subsample_indices requires M >= 1 and N >= 1");
    std::vector<int> idx;
    if (num_frames <= seq_len) {
        idx.resize(static_cast<std::size_t>(num_frames));
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    idx.reserve(static_cast<std::size_t>(seq_len));
    if (mode == SubsampleMode::Uniform) {
        for (int i = 0; i < seq_len; ++i) {
            idx.push_back(static_cast<int>(static_cast<std::int64_t>(i) * num_frames / seq_len));
        }
        return idx;
    }
    std::vector<int> all(static_cast<std::size_t>(num_frames));
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    // std::sample keeps relative order, so the result is already sorted.
    std::sample(all.begin(), all.end(), std::back_inserter(idx), seq_len, rng);
    return idx;
}

SequenceTensor build_sequence(const ActionSample& sample, const DatasetLayout& layout, int seq_len,
                              SubsampleMode mode, std::uint64_t seed) {
    if (sample.frames.empty()) throw InvalidInput("cannot build a sequence from an empty sample");
    SequenceTensor seq(seq_len, layout.frame_dim());
    const auto idx = subsample_indices(static_cast<int>(sample.frames.size()), seq_len, mode, seed);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        flatten_frame_into(sample.frames[static_cast<std::size_t>(idx[r])], layout, seq.row(static_cast<int>(r)));
    }
    seq.valid_frames = static_cast<int>(idx.size());
    return seq;
}

} // namespace egoact
