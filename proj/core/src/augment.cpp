#include "egoact/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "egoact/error.hpp"

namespace egoact {

namespace {

template <typename Fn>
void map_present(FramePose& f, Fn&& fn) {
    auto apply = [&](auto& pts) {
        for (auto& p : pts) p = fn(p);
    };
    if (f.left.present) apply(f.left.keypoints);
    if (f.right.present) apply(f.right.keypoints);
    if (f.object.present) apply(f.object.corners);
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

AugmentConfig AugmentConfig::none() {
    AugmentConfig cfg;
    cfg.p_hflip = cfg.p_vflip = cfg.p_rotate = cfg.p_crop = cfg.p_mask = 0.0;
    return cfg;
}

void AugmentConfig::validate() const {
    for (double p : {p_hflip, p_vflip, p_rotate, p_crop, p_mask}) {
        if (!valid_probability(p)) throw InvalidInput("augmentation probabilities must lie in [0,1]");
    }
    if (max_rotation_deg < 0.0) throw InvalidInput("max_rotation_deg must be >= 0");
    const auto [lo, hi] = crop_scale_range;
    if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) throw InvalidInput("crop_scale_range must satisfy 0 < min <= max <= 1");
    if (p_mask > 0.0 && mask_targets.empty()) throw InvalidInput("p_mask > 0 requires at least one mask target");
}

const char* to_string(MaskTarget t) {
    switch (t) {
    case MaskTarget::Left: return "left";
    case MaskTarget::Right: return "right";
    case MaskTarget::Object: return "object";
    }
    return "?";
}

MaskTarget mask_target_from_string(const std::string& s) {
    if (s == "left") return MaskTarget::Left;
    if (s == "right") return MaskTarget::Right;
    if (s == "object") return MaskTarget::Object;
    throw InvalidInput("unknown mask target '" + s + "' (expected left, right or object)");
}

FramePose hflip(const FramePose& frame) {
    FramePose out = frame;
    std::swap(out.left, out.right);
    map_present(out, [](Keypoint p) { return Keypoint{1.0f - p.x, p.y}; });
    if (out.object.present) {
        // Keep corners in TL, TR, BR, BL order after mirroring.
        auto& c = out.object.corners;
        std::swap(c[0], c[1]);
        std::swap(c[2], c[3]);
    }
    return out;
}

FramePose vflip(const FramePose& frame) {
    FramePose out = frame;
    map_present(out, [](Keypoint p) { return Keypoint{p.x, 1.0f - p.y}; });
    if (out.object.present) {
        auto& c = out.object.corners;
        std::swap(c[0], c[3]);
        std::swap(c[1], c[2]);
    }
    return out;
}

FramePose rotate(const FramePose& frame, double angle_deg, Keypoint center) {
    const double rad = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    FramePose out = frame;
    map_present(out, [&](Keypoint p) {
        const double dx = static_cast<double>(p.x) - center.x;
        const double dy = static_cast<double>(p.y) - center.y;
        return Keypoint{clamp01(center.x + c * dx - s * dy), clamp01(center.y + s * dx + c * dy)};
    });
    return out;
}

FramePose crop(const FramePose& frame, const CropWindow& w) {
    if (!(w.width > 0.0 && w.height > 0.0) || w.x0 < 0.0 || w.y0 < 0.0 || w.x0 + w.width > 1.0 + 1e-9 ||
        w.y0 + w.height > 1.0 + 1e-9) {
        throw InvalidInput("crop window must have positive area and lie inside [0,1]^2");
    }
    FramePose out = frame;
    map_present(out, [&](Keypoint p) {
        return Keypoint{clamp01((p.x - w.x0) / w.width), clamp01((p.y - w.y0) / w.height)};
    });
    return out;
}

FramePose mask_part(const FramePose& frame, MaskTarget target) {
    FramePose out = frame;
    switch (target) {
    case MaskTarget::Left: out.left = HandPose{}; break;
    case MaskTarget::Right: out.right = HandPose{}; break;
    case MaskTarget::Object: out.object = ObjectPose{}; break;
    }
    return out;
}

ActionSample apply_augmentations(const ActionSample& sample, const AugmentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Draw every parameter up front so the random stream does not depend on which branches fire.
    const bool do_hflip = unit(rng) < cfg.p_hflip;
    const bool do_vflip = unit(rng) < cfg.p_vflip;
    const bool do_rotate = unit(rng) < cfg.p_rotate;
    const double angle = (2.0 * unit(rng) - 1.0) * cfg.max_rotation_deg;
    const bool do_crop = unit(rng) < cfg.p_crop;
    const auto [lo, hi] = cfg.crop_scale_range;
    const double scale = lo + (hi - lo) * unit(rng);
    CropWindow window{(1.0 - scale) * unit(rng), (1.0 - scale) * unit(rng), scale, scale};
    const bool do_mask = unit(rng) < cfg.p_mask;
    const double mask_pick = unit(rng);

    ActionSample out = sample;
    for (auto& f : out.frames) {
        if (do_hflip) f = hflip(f);
        if (do_vflip) f = vflip(f);
        if (do_rotate) f = rotate(f, angle);
        if (do_crop) f = crop(f, window);
    }
    if (do_mask && !cfg.mask_targets.empty()) {
        const auto n = cfg.mask_targets.size();
        const auto pick = std::min(n - 1, static_cast<std::size_t>(mask_pick * static_cast<double>(n)));
        for (auto& f : out.frames) f = mask_part(f, cfg.mask_targets[pick]);
    }
    return out;
}

} // namespace egoact
