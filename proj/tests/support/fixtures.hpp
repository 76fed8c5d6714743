#pragma once

#include <random>

#include "egoact/geometry.hpp"

namespace egoact::testing {

inline HandPose make_hand(float x0, float y0, float step = 0.01f) {
    HandPose h;
    h.present = true;
    for (int k = 0; k < kHandKeypoints; ++k) {
        h.keypoints[static_cast<std::size_t>(k)] = {x0 + step * static_cast<float>(k % 5),
                                                    y0 + step * static_cast<float>(k / 5)};
    }
    return h;
}

inline ObjectPose make_object(float x0, float y0, float w, float h, int label) {
    ObjectPose o;
    o.present = true;
    o.label = label;
    o.corners = {Keypoint{x0, y0}, Keypoint{x0 + w, y0}, Keypoint{x0 + w, y0 + h}, Keypoint{x0, y0 + h}};
    return o;
}

inline FramePose make_frame(int index, float shift = 0.0f) {
    FramePose f;
    f.frame_index = index;
    f.left = make_hand(0.1f + shift, 0.2f);
    f.right = make_hand(0.6f + shift, 0.3f);
    f.object = make_object(0.4f + shift, 0.5f, 0.1f, 0.2f, 3);
    return f;
}

inline ActionSample make_sample(int frames, int label = 0) {
    ActionSample s;
    s.action_label = label;
    s.sequence_id = "seq";
    for (int i = 0; i < frames; ++i) s.frames.push_back(make_frame(i, 0.005f * static_cast<float>(i)));
    return s;
}

inline FramePose random_frame(std::mt19937_64& rng, int num_object_classes) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::uniform_int_distribution<int> lab(0, num_object_classes - 1);
    FramePose f;
    for (HandPose* h : {&f.left, &f.right}) {
        h->present = true;
        for (auto& k : h->keypoints) k = {u(rng), u(rng)};
    }
    f.object.present = true;
    f.object.label = lab(rng);
    for (auto& c : f.object.corners) c = {u(rng), u(rng)};
    return f;
}

} // namespace egoact::testing
