#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace egoact {

inline constexpr int kHandKeypoints = 21;
inline constexpr int kObjectCorners = 4;
inline constexpr int kDefaultSeqLen = 20;

struct Keypoint {
    float x = 0.0f;
    float y = 0.0f;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// 21 keypoints in wrist, thumb(4), index(4), middle(4), ring(4), pinky(4) order.
// Coordinates are normalized to [0,1] by image size unless stated otherwise.
struct HandPose {
    std::array<Keypoint, kHandKeypoints> keypoints{};
    bool present = false;

    friend bool operator==(const HandPose&, const HandPose&) = default;
};

// Bounding box corners in top-left, top-right, bottom-right, bottom-left order.
struct ObjectPose {
    std::array<Keypoint, kObjectCorners> corners{};
    int label = 0;
    bool present = false;

    friend bool operator==(const ObjectPose&, const ObjectPose&) = default;
};

struct FramePose {
    HandPose left;
    HandPose right;
    ObjectPose object;
    int frame_index = 0;

    friend bool operator==(const FramePose&, const FramePose&) = default;
};

enum class LayoutVariant {
    TwoHandsWithObject, // D = 93
    OneHandWithLabel,   // D = 43
};

struct DatasetLayout {
    LayoutVariant variant = LayoutVariant::TwoHandsWithObject;
    int num_classes = 36;
    // Divisor for the object label scalar; labels live in [0, num_object_classes).
    int num_object_classes = 1;

    int frame_dim() const noexcept;

    static DatasetLayout two_hands(int num_classes, int num_object_classes);
    static DatasetLayout one_hand(int num_classes, int num_object_classes);
};

std::string to_string(LayoutVariant v);
LayoutVariant layout_variant_from_string(const std::string& s);

// Offsets into the flattened two-hand frame vector.
namespace slices {
inline constexpr int left_begin = 0;
inline constexpr int right_begin = 42;
inline constexpr int object_begin = 84;
inline constexpr int label_index = 92;
inline constexpr int two_hand_dim = 93;
inline constexpr int one_hand_label_index = 42;
inline constexpr int one_hand_dim = 43;
} // namespace slices

// Row-major N x D float matrix with trailing zero padding.
struct SequenceTensor {
    int seq_len = kDefaultSeqLen;
    int frame_dim = 0;
    int valid_frames = 0;
    std::vector<float> data;

    SequenceTensor() = default;
    SequenceTensor(int n, int d);

    std::span<float> row(int r);
    std::span<const float> row(int r) const;
    float at(int r, int c) const { return data[static_cast<std::size_t>(r) * frame_dim + c]; }

    friend bool operator==(const SequenceTensor&, const SequenceTensor&) = default;
};

struct ActionSample {
    std::vector<FramePose> frames;
    int action_label = 0;
    std::string subject_id;
    std::string sequence_id;
};

enum class SubsampleMode { Uniform, Random };

// Throw InvalidInput when a type invariant is broken.
void validate(const HandPose& hand);
void validate(const ObjectPose& object);
void validate(const FramePose& frame);
void validate(const ActionSample& sample, const DatasetLayout& layout);

// Zeroes coordinates (and the object label) of parts flagged absent.
void canonicalize(FramePose& frame);

std::vector<float> flatten_frame(const FramePose& frame, const DatasetLayout& layout);
void flatten_frame_into(const FramePose& frame, const DatasetLayout& layout, std::span<float> out);

// Inverse of flatten_frame. A part is marked present when any of its values
// is non-zero. One-hand vectors are restored into the right-hand slot.
FramePose unflatten_frame(std::span<const float> vec, const DatasetLayout& layout);

std::vector<int> subsample_indices(int num_frames, int seq_len, SubsampleMode mode, std::uint64_t seed);

SequenceTensor build_sequence(const ActionSample& sample, const DatasetLayout& layout, int seq_len,
                              SubsampleMode mode, std::uint64_t seed);

} // namespace egoact
