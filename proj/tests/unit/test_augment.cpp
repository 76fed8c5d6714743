#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "egoact/augment.hpp"
#include "egoact/error.hpp"
#include "support/fixtures.hpp"

using namespace egoact;
using namespace egoact::testing;

namespace {

bool all_in_unit_square(const FramePose& f) {
    auto ok = [](const Keypoint& k) { return k.x >= 0.0f && k.x <= 1.0f && k.y >= 0.0f && k.y <= 1.0f; };
    return std::all_of(f.left.keypoints.begin(), f.left.keypoints.end(), ok) &&
           std::all_of(f.right.keypoints.begin(), f.right.keypoints.end(), ok) &&
           std::all_of(f.object.corners.begin(), f.object.corners.end(), ok);
}

void check_close(const FramePose& a, const FramePose& b, double tol) {
    for (int k = 0; k < kHandKeypoints; ++k) {
        CHECK(a.left.keypoints[k].x == doctest::Approx(b.left.keypoints[k].x).epsilon(tol));
        CHECK(a.left.keypoints[k].y == doctest::Approx(b.left.keypoints[k].y).epsilon(tol));
        CHECK(a.right.keypoints[k].x == doctest::Approx(b.right.keypoints[k].x).epsilon(tol));
        CHECK(a.right.keypoints[k].y == doctest::Approx(b.right.keypoints[k].y).epsilon(tol));
    }
    for (int c = 0; c < kObjectCorners; ++c) {
        CHECK(a.object.corners[c].x == doctest::Approx(b.object.corners[c].x).epsilon(tol));
        CHECK(a.object.corners[c].y == doctest::Approx(b.object.corners[c].y).epsilon(tol));
    }
}

} // namespace

TEST_CASE("horizontal flip mirrors x and swaps hands") {
    FramePose f;
    f.left.present = true;
    f.left.keypoints[0] = {0.3f, 0.7f};
    const FramePose g = hflip(f);
    CHECK_FALSE(g.left.present);
    CHECK(g.right.present);
    CHECK(g.right.keypoints[0].x == doctest::Approx(0.7));
    CHECK(g.right.keypoints[0].y == doctest::Approx(0.7));
    CHECK(g.left == HandPose{});
    CHECK(g.object == ObjectPose{});

    const FramePose full = make_frame(0);
    check_close(hflip(hflip(full)), full, 1e-6);
    CHECK(hflip(FramePose{}) == FramePose{});
    CHECK(hflip(full).object.corners[0].x == doctest::Approx(1.0 - full.object.corners[1].x));
}

TEST_CASE("vertical flip") {
    const FramePose f = make_frame(0);
    const FramePose g = vflip(f);
    CHECK(g.left.keypoints[5].y == doctest::Approx(1.0 - f.left.keypoints[5].y));
    CHECK(g.left.keypoints[5].x == f.left.keypoints[5].x);
    check_close(vflip(vflip(f)), f, 1e-6);
    CHECK(vflip(FramePose{}) == FramePose{});
}

TEST_CASE("rotation matches the rotation matrix") {
    FramePose f;
    f.right.present = true;
    for (auto& k : f.right.keypoints) k = {0.5f, 0.25f};
    const FramePose g = rotate(f, 90.0);
    CHECK(g.right.keypoints[0].x == doctest::Approx(0.75));
    CHECK(g.right.keypoints[0].y == doctest::Approx(0.5));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(-15.0, 15.0);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int i = 0; i < 50; ++i) {
        const double a = ang(rng);
        const FramePose p = make_frame(0, 0.01f * static_cast<float>(i % 5));
        const FramePose r = rotate(p, a);
        const double c = std::cos(a * std::numbers::pi / 180.0), s = std::sin(a * std::numbers::pi / 180.0);
        for (int k = 0; k < kHandKeypoints; ++k) {
            const double dx = p.left.keypoints[k].x - 0.5, dy = p.left.keypoints[k].y - 0.5;
            CHECK(r.left.keypoints[k].x == doctest::Approx(std::clamp(0.5 + c * dx - s * dy, 0.0, 1.0)));
            CHECK(r.left.keypoints[k].y == doctest::Approx(std::clamp(0.5 + s * dx + c * dy, 0.0, 1.0)));
        }
        check_close(rotate(r, -a), p, 1e-5);
    }
    CHECK(rotate(make_frame(0), 0.0) == make_frame(0));
}

TEST_CASE("rotation clamps to the unit square") {
    FramePose f;
    f.left.present = true;
    for (auto& k : f.left.keypoints) k = {0.99f, 0.99f};
    CHECK(all_in_unit_square(rotate(f, 15.0)));
}

TEST_CASE("crop remaps and clamps") {
    const FramePose f = make_frame(0);
    CHECK(crop(f, {0, 0, 1, 1}) == f);

    FramePose g;
    g.left.present = true;
    g.left.keypoints[0] = {0.5f, 0.5f};
    g.left.keypoints[1] = {0.3f, 0.3f};
    g.left.keypoints[2] = {0.1f, 0.9f};
    const FramePose c = crop(g, {0.25, 0.25, 0.5, 0.5});
    CHECK(c.left.keypoints[0].x == doctest::Approx(0.5));
    CHECK(c.left.keypoints[0].y == doctest::Approx(0.5));
    CHECK(c.left.keypoints[1].x == doctest::Approx(0.1));
    CHECK(c.left.keypoints[1].y == doctest::Approx(0.1));
    CHECK(c.left.keypoints[2].x == 0.0f);
    CHECK(c.left.keypoints[2].y == 1.0f);
    CHECK_FALSE(c.right.present);

    CHECK_THROWS_AS(crop(f, {0.2, 0.2, 0.0, 0.5}), InvalidInput);
    CHECK_THROWS_AS(crop(f, {0.8, 0.2, 0.5, 0.5}), InvalidInput);
}

TEST_CASE("masking zeroes the target slice") {
    const auto layout = DatasetLayout::two_hands(36, 8);
    const FramePose f = make_frame(0);
    const auto full = flatten_frame(f, layout);

    const auto left = flatten_frame(mask_part(f, MaskTarget::Left), layout);
    for (int i = 0; i < 42; ++i) CHECK(left[i] == 0.0f);
    for (int i = 42; i < 93; ++i) CHECK(left[i] == full[i]);

    const auto right = flatten_frame(mask_part(f, MaskTarget::Right), layout);
    for (int i = 42; i < 84; ++i) CHECK(right[i] == 0.0f);

    const auto obj = flatten_frame(mask_part(f, MaskTarget::Object), layout);
    for (int i = 84; i < 93; ++i) CHECK(obj[i] == 0.0f);
    for (int i = 0; i < 84; ++i) CHECK(obj[i] == full[i]);

    for (auto t : {MaskTarget::Left, MaskTarget::Right, MaskTarget::Object}) {
        CHECK(mask_part(mask_part(f, t), t) == mask_part(f, t));
    }
}

TEST_CASE("config validation") {
    AugmentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.p_rotate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = AugmentConfig{};
    cfg.crop_scale_range = {0.9, 0.8};
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = AugmentConfig{};
    cfg.crop_scale_range = {0.0, 0.5};
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    CHECK(mask_target_from_string("object") == MaskTarget::Object);
    CHECK_THROWS_AS(mask_target_from_string("head"), InvalidInput);
}

TEST_CASE("apply_augmentations") {
    const ActionSample s = make_sample(12, 4);
    CHECK(apply_augmentations(s, AugmentConfig::none(), 1).frames == s.frames);

    const AugmentConfig cfg;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ActionSample a = apply_augmentations(s, cfg, seed);
        CHECK(a.frames == apply_augmentations(s, cfg, seed).frames);
        CHECK(a.action_label == s.action_label);
        CHECK(a.frames.size() == s.frames.size());
        for (const auto& f : a.frames) CHECK(all_in_unit_square(f));
    }

    AugmentConfig flip = AugmentConfig::none();
    flip.p_hflip = 1.0;
    const ActionSample h = apply_augmentations(s, flip, 3);
    for (std::size_t i = 0; i < s.frames.size(); ++i) CHECK(h.frames[i] == hflip(s.frames[i]));
}

TEST_CASE("augmentation draws are shared by every frame") {
    // Translate-free frames make every per-frame transform identical, so the
    // output frames must all agree once the draw is per sample.
    ActionSample s;
    for (int i = 0; i < 10; ++i) {
        FramePose f = make_frame(i);
        s.frames.push_back(f);
    }
    const AugmentConfig cfg;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const ActionSample a = apply_augmentations(s, cfg, seed);
        for (std::size_t i = 1; i < a.frames.size(); ++i) {
            FramePose f = a.frames[i];
            f.frame_index = a.frames[0].frame_index;
            CHECK(f == a.frames[0]);
        }
    }
}
