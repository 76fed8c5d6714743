#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egoact/geometry.hpp"

namespace egoact {

// J x h x w grid of non-negative per-joint scores, stored joint-major then
// row-major: values[(j * height + y) * width + x].
struct Heatmap {
    int joints = kHandKeypoints;
    int width = 0;
    int height = 0;
    std::vector<float> values;

    Heatmap() = default;
    Heatmap(int joints, int width, int height);

    float& at(int joint, int x, int y);
    float at(int joint, int x, int y) const;
    void validate() const;
};

// Two-way (absent, present) logits per hand.
struct HandnessLogits {
    std::array<float, 2> left{};
    std::array<float, 2> right{};
};

struct DecodedHand {
    HandPose pose; // pixel coordinates
    std::array<bool, kHandKeypoints> low_confidence{};
};

// Argmax cell per joint mapped to the pixel at the cell center. Ties go to the
// smallest row-major index; an all-zero channel yields (0,0) flagged low-confidence.
DecodedHand decode(const Heatmap& hm, int image_width, int image_height);

double presence_probability(const std::array<float, 2>& logits);

// A hand is kept iff softmax(logits)[present] > 0.5; otherwise it is zeroed.
FramePose gate(const HandPose& left, const HandPose& right, const HandnessLogits& logits);

inline constexpr std::uint32_t kHeatmapFormatVersion = 1;

// Binary container (little-endian):
//   "EGOAHMAP" magic, u32 format_version, u32 num_hands, u32 joints, u32 width,
//   u32 height, u32 dtype (0 = float32), u32 has_handness,
//   num_hands * joints * height * width f32,
//   if has_handness: 4 f32 (left absent, left present, right absent, right present).
struct HeatmapFile {
    std::vector<Heatmap> hands;
    std::optional<HandnessLogits> handness;
};

std::string serialize_heatmaps(const HeatmapFile& file);
HeatmapFile deserialize_heatmaps(const std::string& bytes);
void save_heatmaps(const HeatmapFile& file, const std::filesystem::path& path);
HeatmapFile load_heatmaps(const std::filesystem::path& path);

} // namespace egoact
