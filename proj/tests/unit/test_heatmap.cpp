#include <doctest.h>

#include <random>

#include "egoact/error.hpp"
#include "egoact/heatmap.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace egoact;
using namespace egoact::testing;

TEST_CASE("decode maps the argmax cell center to pixels") {
    const Heatmap hm = one_hot_heatmap(21, 128, 128, 0, 10, 20);
    const DecodedHand d = decode(hm, 1280, 720);
    CHECK(d.pose.keypoints[0].x == doctest::Approx(105.0));
    CHECK(d.pose.keypoints[0].y == doctest::Approx(115.3125));
    CHECK_FALSE(d.low_confidence[0]);
    CHECK(d.low_confidence[1]);
    CHECK(d.pose.keypoints[1] == Keypoint{0.0f, 0.0f});
}

TEST_CASE("decode ties go to the smallest row-major index") {
    Heatmap hm = one_hot_heatmap(21, 16, 16, 3, 9, 5);
    hm.at(3, 2, 7) = 1.0f;
    hm.at(3, 12, 4) = 1.0f;
    const auto d = decode(hm, 160, 160);
    CHECK(d.pose.keypoints[3].x == doctest::Approx(125.0));
    CHECK(d.pose.keypoints[3].y == doctest::Approx(45.0));
}

TEST_CASE("one-hot encode then decode is the identity") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<int> joint(0, 20), size(4, 48);
    for (int t = 0; t < 2000; ++t) {
        const int w = size(rng), h = size(rng);
        std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
        const int j = joint(rng), x = xs(rng), y = ys(rng);
        const auto d = decode(one_hot_heatmap(21, w, h, j, x, y), 1280, 720);
        const auto [px, py] = cell_center(x, y, w, h, 1280, 720);
        CHECK(d.pose.keypoints[j].x == doctest::Approx(px));
        CHECK(d.pose.keypoints[j].y == doctest::Approx(py));
    }
}

TEST_CASE("decode is invariant to positive scaling") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Heatmap hm(21, 24, 18);
    for (auto& v : hm.values) v = u(rng);
    const auto base = decode(hm, 640, 480);
    for (float c : {1e-3f, 1.0f, 1e3f}) {
        Heatmap scaled = hm;
        for (auto& v : scaled.values) v *= c;
        CHECK(decode(scaled, 640, 480).pose == base.pose);
    }
}

TEST_CASE("decode output satisfies hand invariants") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Heatmap hm(21, 32, 32);
    for (auto& v : hm.values) v = u(rng);
    const auto d = decode(hm, 1280, 720);
    CHECK(d.pose.present);
    for (const auto& k : d.pose.keypoints) {
        CHECK(k.x >= 0.0f);
        CHECK(k.x <= 1280.0f);
        CHECK(k.y >= 0.0f);
        CHECK(k.y <= 720.0f);
    }
}

TEST_CASE("invalid heatmaps are rejected") {
    Heatmap hm(21, 4, 4);
    hm.values[3] = -1.0f;
    CHECK_THROWS_AS(decode(hm, 100, 100), InvalidInput);
    Heatmap wrong(20, 4, 4);
    CHECK_THROWS_AS(decode(wrong, 100, 100), InvalidInput);
}

TEST_CASE("presence gate") {
    const HandPose l = make_hand(0.1f, 0.1f), r = make_hand(0.5f, 0.5f);
    HandnessLogits logits;
    logits.left = {-10.0f, 10.0f};
    logits.right = {0.0f, 0.0f};
    CHECK(presence_probability(logits.left) > 0.99);
    CHECK(presence_probability(logits.right) == 0.5);
    const FramePose f = gate(l, r, logits);
    CHECK(f.left == l);
    CHECK(f.right == HandPose{});
    const auto v = flatten_frame(f, DatasetLayout::two_hands(36, 8));
    for (int i = 42; i < 84; ++i) CHECK(v[i] == 0.0f);
}

TEST_CASE("heatmap file round trip") {
    const auto dir = scratch_dir("heatmap_file");
    HeatmapFile file;
    file.hands.push_back(one_hot_heatmap(21, 8, 6, 2, 3, 4));
    file.hands.push_back(one_hot_heatmap(21, 8, 6, 5, 1, 1));
    file.handness = HandnessLogits{{0.1f, 0.9f}, {2.0f, -1.0f}};
    save_heatmaps(file, dir / "h.bin");
    const HeatmapFile back = load_heatmaps(dir / "h.bin");
    REQUIRE(back.hands.size() == 2);
    CHECK(back.hands[1].values == file.hands[1].values);
    REQUIRE(back.handness.has_value());
    CHECK(back.handness->right == file.handness->right);
    CHECK(serialize_heatmaps(back) == serialize_heatmaps(file));

    const std::string bytes = serialize_heatmaps(file);
    CHECK_THROWS_AS(deserialize_heatmaps(bytes.substr(0, bytes.size() - 1)), InvalidInput);
    CHECK_THROWS_AS(deserialize_heatmaps("EGOAHMAX" + bytes.substr(8)), InvalidInput);
}
