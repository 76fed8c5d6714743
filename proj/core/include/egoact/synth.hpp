#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egoact/dataset.hpp"

namespace egoact {

// Class k pairs object label k % 6 with right-wrist motion k / 6.
enum class Motion { SweepLeft = 0, SweepRight, SweepUp, SweepDown, ArcClockwise, ArcCounterClockwise };

inline constexpr int kSynthMotions = 6;
inline constexpr int kSynthObjects = 6;

struct SynthSpec {
    int num_classes = 36;
    int samples_per_class = 20; // train split
    int val_per_class = 5;
    int test_per_class = 5;
    int min_frames = 12;
    int max_frames = 40;
    double noise_sigma = 0.01; // normalized units
    // When set, clips carry a predicted_* stream with this much extra noise.
    std::optional<double> predicted_noise_sigma;
    std::uint64_t seed = 7;

    void validate() const;
};

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthDataset {
    DatasetManifest manifest;
    std::vector<ClipRecord> clips;
};

// Right-wrist displacement from its start position at normalized time t in [0,1].
Keypoint motion_displacement(Motion m, double t);

SynthDataset generate(const SynthSpec& spec);

// Nearest-template classifier reading only the flattened frame vectors.
int oracle_classify(const ActionSample& sample, const DatasetLayout& layout);

} // namespace egoact
