#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "egoact/error.hpp"
#include "egoact/geometry.hpp"
#include "support/fixtures.hpp"

using namespace egoact;
using namespace egoact::testing;

TEST_CASE("frame dimensions per layout") {
    CHECK(DatasetLayout::two_hands(36, 8).frame_dim() == 93);
    CHECK(DatasetLayout::one_hand(45, 26).frame_dim() == 43);
}

TEST_CASE("all-absent frame flattens to zeros") {
    const auto layout = DatasetLayout::two_hands(36, 8);
    const auto v = flatten_frame(FramePose{}, layout);
    REQUIRE(v.size() == 93);
    CHECK(std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; }));
}

TEST_CASE("flatten follows the slice map") {
    const auto layout = DatasetLayout::two_hands(36, 8);
    const FramePose f = make_frame(0);
    const auto v = flatten_frame(f, layout);
    REQUIRE(v.size() == 93);
    CHECK(v[0] == f.left.keypoints[0].x);
    CHECK(v[1] == f.left.keypoints[0].y);
    CHECK(v[41] == f.left.keypoints[20].y);
    CHECK(v[42] == f.right.keypoints[0].x);
    CHECK(v[83] == f.right.keypoints[20].y);
    CHECK(v[84] == f.object.corners[0].x);
    CHECK(v[91] == f.object.corners[3].y);
    CHECK(v[92] == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("one-hand layout") {
    const auto layout = DatasetLayout::one_hand(45, 26);
    FramePose f;
    f.right = make_hand(0.4f, 0.4f);
    f.object.label = 13;
    f.object.present = true;
    const auto v = flatten_frame(f, layout);
    REQUIRE(v.size() == 43);
    CHECK(v[0] == f.right.keypoints[0].x);
    CHECK(v[42] == doctest::Approx(0.5));

    FramePose both = make_frame(0);
    CHECK_THROWS_AS(flatten_frame(both, layout), InvalidInput);
}

TEST_CASE("flatten length matches layout for random frames") {
    std::mt19937_64 rng(1);
    const auto two = DatasetLayout::two_hands(36, 8);
    const auto one = DatasetLayout::one_hand(45, 26);
    for (int i = 0; i < 200; ++i) {
        FramePose f = random_frame(rng, 8);
        CHECK(flatten_frame(f, two).size() == static_cast<std::size_t>(two.frame_dim()));
        f.left = HandPose{};
        CHECK(flatten_frame(f, one).size() == static_cast<std::size_t>(one.frame_dim()));
    }
}

TEST_CASE("unflatten inverts flatten for fully present frames") {
    std::mt19937_64 rng(2);
    const auto layout = DatasetLayout::two_hands(36, 8);
    for (int i = 0; i < 200; ++i) {
        const FramePose f = random_frame(rng, 8);
        const FramePose back = unflatten_frame(flatten_frame(f, layout), layout);
        CHECK(back == f);
    }
}

TEST_CASE("validation rejects broken invariants") {
    HandPose h = make_hand(0.2f, 0.2f);
    h.present = false;
    CHECK_THROWS_AS(validate(h), InvalidInput);

    ObjectPose o;
    o.label = 2;
    CHECK_THROWS_AS(validate(o), InvalidInput);

    const auto layout = DatasetLayout::two_hands(36, 8);
    ActionSample s = make_sample(3);
    s.frames[1].right.keypoints[4].x = 1.5f;
    CHECK_THROWS_AS(validate(s, layout), InvalidInput);

    ActionSample order = make_sample(3);
    order.frames[2].frame_index = 1;
    CHECK_THROWS_AS(validate(order, layout), InvalidInput);

    ActionSample label = make_sample(3, 36);
    CHECK_THROWS_AS(validate(label, layout), InvalidInput);

    CHECK_NOTHROW(validate(make_sample(5, 35), layout));
}

TEST_CASE("canonicalize zeroes absent parts") {
    FramePose f = make_frame(0);
    f.left.present = false;
    f.object.present = false;
    canonicalize(f);
    CHECK(f.left == HandPose{});
    CHECK(f.object == ObjectPose{});
    CHECK(f.right.present);
}

TEST_CASE("uniform subsampling") {
    std::vector<int> id(20);
    std::iota(id.begin(), id.end(), 0);
    CHECK(subsample_indices(20, 20, SubsampleMode::Uniform, 0) == id);

    std::vector<int> even;
    for (int i = 0; i < 20; ++i) even.push_back(2 * i);
    CHECK(subsample_indices(40, 20, SubsampleMode::Uniform, 0) == even);

    const std::vector<int> seven{0, 1, 2, 3, 4, 5, 6};
    CHECK(subsample_indices(7, 20, SubsampleMode::Uniform, 0) == seven);
    CHECK(subsample_indices(7, 20, SubsampleMode::Random, 9) == seven);
}

TEST_CASE("subsampling properties") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(1, 200);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = len(rng);
        for (auto mode : {SubsampleMode::Uniform, SubsampleMode::Random}) {
            const auto idx = subsample_indices(m, 20, mode, static_cast<std::uint64_t>(trial));
            CHECK(idx.size() == static_cast<std::size_t>(std::min(m, 20)));
            CHECK(std::is_sorted(idx.begin(), idx.end()));
            CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
            CHECK(idx.front() >= 0);
            CHECK(idx.back() < m);
            CHECK(idx == subsample_indices(m, 20, mode, static_cast<std::uint64_t>(trial)));
        }
        const auto uni = subsample_indices(m, 20, SubsampleMode::Uniform, 0);
        for (std::size_t i = 0; m >= 20 && i < uni.size(); ++i) {
            CHECK(uni[i] == static_cast<int>(i) * m / 20);
        }
    }
}

TEST_CASE("build_sequence pads trailing rows") {
    const auto layout = DatasetLayout::two_hands(36, 8);
    const ActionSample s = make_sample(7);
    const SequenceTensor t = build_sequence(s, layout, 20, SubsampleMode::Uniform, 0);
    CHECK(t.seq_len == 20);
    CHECK(t.frame_dim == 93);
    CHECK(t.valid_frames == 7);
    CHECK(t.data.size() == 20u * 93u);
    for (int r = 0; r < 7; ++r) {
        const auto expect = flatten_frame(s.frames[static_cast<std::size_t>(r)], layout);
        const auto row = t.row(r);
        CHECK(std::equal(row.begin(), row.end(), expect.begin()));
    }
    for (int r = 7; r < 20; ++r) {
        const auto row = t.row(r);
        CHECK(std::all_of(row.begin(), row.end(), [](float x) { return x == 0.0f; }));
    }
}

TEST_CASE("build_sequence shape is fixed and random mode is seeded") {
    const auto two = DatasetLayout::two_hands(36, 8);
    const auto one = DatasetLayout::one_hand(45, 26);
    for (int m : {1, 19, 20, 21, 64}) {
        const ActionSample s = make_sample(m);
        const auto a = build_sequence(s, two, 20, SubsampleMode::Random, 5);
        CHECK(a.data.size() == 20u * 93u);
        CHECK(a == build_sequence(s, two, 20, SubsampleMode::Random, 5));
        ActionSample single = s;
        for (auto& f : single.frames) f.left = HandPose{};
        CHECK(build_sequence(single, one, 20, SubsampleMode::Uniform, 0).data.size() == 20u * 43u);
    }
    CHECK(build_sequence(make_sample(20), two, 20, SubsampleMode::Uniform, 0).valid_frames == 20);
    CHECK_THROWS_AS(build_sequence(ActionSample{}, two, 20, SubsampleMode::Uniform, 0), InvalidInput);
}
