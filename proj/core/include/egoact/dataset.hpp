#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egoact/geometry.hpp"

namespace egoact {

inline constexpr int kDatasetFormatVersion = 1;

enum class PoseSource { GroundTruth, Predicted };

std::string to_string(PoseSource s);
PoseSource pose_source_from_string(const std::string& s);

// Describes a dataset in the neutral on-disk format:
//
//   manifest.json
//   <clip_dir>/<sequence_id>.json
//
// Clip files store raw pixel coordinates; normalization by image size
// happens in load_samples.
struct DatasetManifest {
    int format_version = kDatasetFormatVersion;
    DatasetLayout layout;
    int image_width = 1280;
    int image_height = 720;
    std::vector<std::string> class_names;
    std::vector<std::string> object_class_names;
    std::string clip_dir = "clips";
    std::map<std::string, std::vector<std::string>> splits;

    // Directory holding the manifest; clip paths resolve against it.
    std::filesystem::path root;

    std::filesystem::path clip_path(const std::string& sequence_id) const;
    const std::vector<std::string>& split(const std::string& name) const;
};

// One frame of a clip file, in pixel coordinates.
struct ClipFrameRecord {
    int frame_index = 0;
    HandPose left;
    HandPose right;
    ObjectPose object;
    std::optional<HandPose> predicted_left;
    std::optional<HandPose> predicted_right;
    std::optional<ObjectPose> predicted_object;
};

struct ClipRecord {
    std::string sequence_id;
    std::string subject_id;
    int action_label = 0;
    std::vector<ClipFrameRecord> frames;
};

// Throws InvalidInput listing every violation found (missing file, schema
// errors, overlapping splits, class-count mismatch).
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

ClipRecord load_clip_record(const std::filesystem::path& path);
void save_clip_record(const ClipRecord& clip, const std::filesystem::path& path);

// Converts a pixel-space clip into a normalized ActionSample. Coordinates up to
// 5% outside the image are clamped; anything further is rejected.
ActionSample to_sample(const ClipRecord& clip, const DatasetManifest& manifest, PoseSource source,
                       const std::string& origin = "<memory>");

// Writes manifest.json plus one file per clip under <dir>/<clip_dir>/.
void write_dataset(const DatasetManifest& manifest, const std::vector<ClipRecord>& clips,
                   const std::filesystem::path& dir);

std::vector<ActionSample> load_samples(const DatasetManifest& manifest, const std::string& split_name,
                                       PoseSource source);

} // namespace egoact
