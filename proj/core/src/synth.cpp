#include "egoact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "egoact/error.hpp"

namespace egoact {

using nlohmann::json;

namespace {

constexpr double kSweep = 0.2;
constexpr double kArcRadius = 0.1;
constexpr Keypoint kRightStart{0.62f, 0.55f};
constexpr Keypoint kLeftAnchor{0.30f, 0.60f};

constexpr std::array<const char*, kSynthMotions> kMotionNames = {
    "sweep_left", "sweep_right", "sweep_up", "sweep_down", "arc_cw", "arc_ccw",
};

// Fan of five fingers above the wrist; x is mirrored for the left hand.
std::array<Keypoint, kHandKeypoints> hand_shape(bool mirror) {
    std::array<Keypoint, kHandKeypoints> pts{};
    constexpr std::array<double, 4> reach = {0.022, 0.038, 0.050, 0.060};
    for (int finger = 0; finger < 5; ++finger) {
        const double angle = -std::numbers::pi / 2 + (finger - 1.5) * 0.32;
        for (int joint = 0; joint < 4; ++joint) {
            const double r = reach[static_cast<std::size_t>(joint)] * (finger == 0 ? 0.8 : 1.0);
            double dx = r * std::cos(angle);
            if (mirror) dx = -dx;
            pts[static_cast<std::size_t>(1 + finger * 4 + joint)] = {static_cast<float>(dx),
                                                                     static_cast<float>(r * std::sin(angle))};
        }
    }
    return pts;
}

HandPose place_hand(const std::array<Keypoint, kHandKeypoints>& shape, double wx, double wy) {
    HandPose h;
    h.present = true;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        h.keypoints[i] = {static_cast<float>(wx + shape[i].x), static_cast<float>(wy + shape[i].y)};
    }
    return h;
}

template <std::size_t K>
void add_noise(std::array<Keypoint, K>& pts, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& p : pts) {
        // Draws happen even at sigma = 0 so the stream layout is independent of sigma.
        const double nx = normal(rng) * sigma;
        const double ny = normal(rng) * sigma;
        p.x = static_cast<float>(std::clamp(p.x + nx, 0.0, 1.0));
        p.y = static_cast<float>(std::clamp(p.y + ny, 0.0, 1.0));
    }
}

template <std::size_t K>
void to_pixels(std::array<Keypoint, K>& pts, double w, double h) {
    for (auto& p : pts) p = {static_cast<float>(p.x * w), static_cast<float>(p.y * h)};
}

double template_cost(const ActionSample& sample, const DatasetLayout& layout, Motion m) {
    const auto n = sample.frames.size();
    std::vector<double> ox(n), oy(n), tx(n), ty(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = flatten_frame(sample.frames[i], layout);
        ox[i] = v[slices::right_begin];
        oy[i] = v[slices::right_begin + 1];
        const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        const auto d = motion_displacement(m, t);
        tx[i] = d.x;
        ty[i] = d.y;
    }
    auto center = [](std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        for (double& x : v) x -= mean;
    };
    center(ox);
    center(oy);
    center(tx);
    center(ty);
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += (ox[i] - tx[i]) * (ox[i] - tx[i]) + (oy[i] - ty[i]) * (oy[i] - ty[i]);
    return cost;
}

} // namespace

void SynthSpec::validate() const {
    if (num_classes < 2) throw InvalidInput("synthetic spec needs num_classes >= 2");
    if (num_classes > kSynthMotions * kSynthObjects) throw InvalidInput("synthetic spec supports at most 36 classes");
    if (samples_per_class < 0 || val_per_class < 0 || test_per_class < 0) {
        throw InvalidInput("per-class sample counts must be >= 0");
    }
    if (min_frames < 1 || max_frames < min_frames) throw InvalidInput("frame range must satisfy 1 <= min <= max");
    if (!(noise_sigma >= 0.0)) throw InvalidInput("noise_sigma must be >= 0");
    if (predicted_noise_sigma && !(*predicted_noise_sigma >= 0.0)) {
        throw InvalidInput("predicted_noise_sigma must be >= 0");
    }
}

json to_json(const SynthSpec& spec) {
    json j = {
        {"num_classes", spec.num_classes},
        {"samples_per_class", spec.samples_per_class},
        {"val_per_class", spec.val_per_class},
        {"test_per_class", spec.test_per_class},
        {"frames_range", {spec.min_frames, spec.max_frames}},
        {"noise_sigma", spec.noise_sigma},
        {"seed", spec.seed},
    };
    if (spec.predicted_noise_sigma) j["predicted_noise_sigma"] = *spec.predicted_noise_sigma;
    return j;
}

SynthSpec synth_spec_from_json(const json& j) {
    SynthSpec s;
    if (!j.is_object()) throw InvalidInput("synthetic spec must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "num_classes") {
                s.num_classes = value.get<int>();
            } else if (key == "samples_per_class") {
                s.samples_per_class = value.get<int>();
            } else if (key == "val_per_class") {
                s.val_per_class = value.get<int>();
            } else if (key == "test_per_class") {
                s.test_per_class = value.get<int>();
            } else if (key == "frames_range") {
                const auto r = value.get<std::vector<int>>();
                if (r.size() != 2) throw InvalidInput("frames_range must be [min, max]");
                s.min_frames = r[0];
                s.max_frames = r[1];
            } else if (key == "noise_sigma") {
                s.noise_sigma = value.get<double>();
            } else if (key == "predicted_noise_sigma") {
                s.predicted_noise_sigma = value.get<double>();
            } else if (key == "seed") {
                s.seed = value.get<std::uint64_t>();
            } else if (key != "format_version") {
                throw InvalidInput("unknown key '" + key + "' in synthetic spec");
            }
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("synthetic spec: ") + e.what());
    }
    s.validate();
    return s;
}

Keypoint motion_displacement(Motion m, double t) {
    const double arc = std::numbers::pi * t;
    switch (m) {
    case Motion::SweepLeft: return {static_cast<float>(-kSweep * t), 0.0f};
    case Motion::SweepRight: return {static_cast<float>(kSweep * t), 0.0f};
    case Motion::SweepUp: return {0.0f, static_cast<float>(-kSweep * t)};
    case Motion::SweepDown: return {0.0f, static_cast<float>(kSweep * t)};
    case Motion::ArcClockwise:
        return {static_cast<float>(kArcRadius * (1.0 - std::cos(arc))), static_cast<float>(-kArcRadius * std::sin(arc))};
    case Motion::ArcCounterClockwise:
        return {static_cast<float>(kArcRadius * (1.0 - std::cos(arc))), static_cast<float>(kArcRadius * std::sin(arc))};
    }
    return {};
}

SynthDataset generate(const SynthSpec& spec) {
    spec.validate();
    SynthDataset ds;
    auto& m = ds.manifest;
    m.layout = DatasetLayout::two_hands(spec.num_classes, kSynthObjects);
    m.image_width = 1280;
    m.image_height = 720;
    for (int k = 0; k < spec.num_classes; ++k) {
        m.class_names.push_back(std::string(kMotionNames[static_cast<std::size_t>(k / kSynthObjects)]) + "_object" +
                                std::to_string(k % kSynthObjects));
    }
    for (int o = 0; o < kSynthObjects; ++o) m.object_class_names.push_back("object" + std::to_string(o));

    const auto right_shape = hand_shape(false);
    const auto left_shape = hand_shape(true);
    const double w = m.image_width;
    const double h = m.image_height;
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> frame_count(spec.min_frames, spec.max_frames);

    const std::array<std::pair<const char*, int>, 3> splits = {
        std::pair{"train", spec.samples_per_class},
        std::pair{"val", spec.val_per_class},
        std::pair{"test", spec.test_per_class},
    };
    for (const auto& [split, per_class] : splits) {
        auto& ids = m.splits[split];
        for (int k = 0; k < spec.num_classes; ++k) {
            const auto motion = static_cast<Motion>(k / kSynthObjects);
            const int object_label = k % kSynthObjects;
            for (int s = 0; s < per_class; ++s) {
                ClipRecord clip;
                clip.sequence_id = std::string("synth_") + split + "_c" + std::to_string(k) + "_" + std::to_string(s);
                clip.subject_id = "synthetic";
                clip.action_label = k;
                const int frames = frame_count(rng);
                for (int i = 0; i < frames; ++i) {
                    const double t = frames > 1 ? static_cast<double>(i) / (frames - 1) : 0.0;
                    const auto d = motion_displacement(motion, t);
                    const double rx = kRightStart.x + d.x;
                    const double ry = kRightStart.y + d.y;
                    const double lx = kLeftAnchor.x + 0.01 * std::sin(4.0 * std::numbers::pi * t);
                    const double ly = kLeftAnchor.y + 0.01 * std::cos(6.0 * std::numbers::pi * t);

                    ClipFrameRecord f;
                    f.frame_index = i;
                    f.left = place_hand(left_shape, lx, ly);
                    f.right = place_hand(right_shape, rx, ry);
                    f.object.present = true;
                    f.object.label = object_label;
                    const double cx = rx;
                    const double cy = ry - 0.06;
                    f.object.corners = {Keypoint{static_cast<float>(cx - 0.04), static_cast<float>(cy - 0.03)},
                                        Keypoint{static_cast<float>(cx + 0.04), static_cast<float>(cy - 0.03)},
                                        Keypoint{static_cast<float>(cx + 0.04), static_cast<float>(cy + 0.03)},
                                        Keypoint{static_cast<float>(cx - 0.04), static_cast<float>(cy + 0.03)}};
                    add_noise(f.left.keypoints, spec.noise_sigma, rng);
                    add_noise(f.right.keypoints, spec.noise_sigma, rng);
                    add_noise(f.object.corners, spec.noise_sigma, rng);
                    if (spec.predicted_noise_sigma) {
                        HandPose pl = f.left;
                        HandPose pr = f.right;
                        add_noise(pl.keypoints, *spec.predicted_noise_sigma, rng);
                        add_noise(pr.keypoints, *spec.predicted_noise_sigma, rng);
                        to_pixels(pl.keypoints, w, h);
                        to_pixels(pr.keypoints, w, h);
                        f.predicted_left = pl;
                        f.predicted_right = pr;
                    }
                    to_pixels(f.left.keypoints, w, h);
                    to_pixels(f.right.keypoints, w, h);
                    to_pixels(f.object.corners, w, h);
                    clip.frames.push_back(f);
                }
                ids.push_back(clip.sequence_id);
                ds.clips.push_back(std::move(clip));
            }
        }
    }
    return ds;
}

int oracle_classify(const ActionSample& sample, const DatasetLayout& layout) {
    if (layout.variant != LayoutVariant::TwoHandsWithObject) {
        throw InvalidInput("the synthetic oracle needs the two-hand layout");
    }
    if (sample.frames.empty()) throw InvalidInput("cannot classify an empty sample");

    std::vector<double> labels;
    for (const auto& f : sample.frames) labels.push_back(flatten_frame(f, layout)[slices::label_index]);
    std::nth_element(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(labels.size() / 2), labels.end());
    const int object = static_cast<int>(std::lround(labels[labels.size() / 2] * layout.num_object_classes));

    std::array<double, kSynthMotions> cost{};
    for (int mo = 0; mo < kSynthMotions; ++mo) cost[static_cast<std::size_t>(mo)] = template_cost(sample, layout, static_cast<Motion>(mo));

    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < layout.num_classes; ++k) {
        const double c = cost[static_cast<std::size_t>(k / kSynthObjects)] + (k % kSynthObjects == object ? 0.0 : 1e6);
        if (c < best_cost) {
            best_cost = c;
            best = k;
        }
    }
    return best;
}

} // namespace egoact
