#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "egoact/geometry.hpp"

namespace egoact {

enum class MaskTarget { Left, Right, Object };

struct AugmentConfig {
    double p_hflip = 0.5;
    double p_vflip = 0.5;
    double p_rotate = 0.5;
    double p_crop = 0.5;
    double p_mask = 0.5;
    double max_rotation_deg = 15.0;
    std::pair<double, double> crop_scale_range{0.8, 1.0};
    std::vector<MaskTarget> mask_targets{MaskTarget::Left, MaskTarget::Right, MaskTarget::Object};

    // Every probability set to zero.
    static AugmentConfig none();

    void validate() const;
};

struct CropWindow {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 1.0;
    double height = 1.0;
};

const char* to_string(MaskTarget t);
MaskTarget mask_target_from_string(const std::string& s);

// Mirrors x and swaps the left/right hand slots.
FramePose hflip(const FramePose& frame);
FramePose vflip(const FramePose& frame);
// Pure 2D rotation of normalized coordinates about `center`; results are clamped to [0,1].
FramePose rotate(const FramePose& frame, double angle_deg, Keypoint center = {0.5f, 0.5f});
FramePose crop(const FramePose& frame, const CropWindow& window);
FramePose mask_part(const FramePose& frame, MaskTarget target);

// One random draw per augmentation per sample; every frame gets the same transform.
ActionSample apply_augmentations(const ActionSample& sample, const AugmentConfig& cfg, std::uint64_t seed);

} // namespace egoact
