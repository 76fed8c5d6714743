#include "egoact/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egoact/error.hpp"

namespace egoact {

using nlohmann::json;

namespace {

constexpr double kBoundsTolerance = 0.05;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text << '\n';
}

template <std::size_t K>
json points_to_json(const std::array<Keypoint, K>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

template <std::size_t K>
std::array<Keypoint, K> points_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
    if (j.size() != K) {
        throw InvalidInput(std::string(what) + ": expected " + std::to_string(K) + " points, got " +
                           std::to_string(j.size()));
    }
    std::array<Keypoint, K> pts{};
    for (std::size_t i = 0; i < K; ++i) {
        const auto& p = j[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw InvalidInput(std::string(what) + ": point " + std::to_string(i) + " is not an [x, y] pair");
        }
        pts[i] = {p[0].get<float>(), p[1].get<float>()};
    }
    return pts;
}

bool get_bool(const json& rec, const char* key) {
    if (!rec.contains(key) || !rec[key].is_boolean()) throw InvalidInput(std::string("missing boolean '") + key + "'");
    return rec[key].get<bool>();
}

HandPose hand_from_json(const json& rec, const char* pts_key, const char* present_key) {
    if (!rec.contains(pts_key)) throw InvalidInput(std::string("missing '") + pts_key + "'");
    HandPose h;
    h.keypoints = points_from_json<kHandKeypoints>(rec[pts_key], pts_key);
    h.present = get_bool(rec, present_key);
    return h;
}

ObjectPose object_from_json(const json& rec, const char* pts_key, const char* label_key, const char* present_key) {
    if (!rec.contains(pts_key)) throw InvalidInput(std::string("missing '") + pts_key + "'");
    ObjectPose o;
    o.corners = points_from_json<kObjectCorners>(rec[pts_key], pts_key);
    if (!rec.contains(label_key) || !rec[label_key].is_number_integer()) {
        throw InvalidInput(std::string("missing integer '") + label_key + "'");
    }
    o.label = rec[label_key].get<int>();
    o.present = get_bool(rec, present_key);
    return o;
}

// Maps pixel coordinates into [0,1], clamping small overshoot.
template <std::size_t K>
void normalize_points(std::array<Keypoint, K>& pts, double width, double height, const std::string& where) {
    for (auto& p : pts) {
        const double x = p.x / width;
        const double y = p.y / height;
        if (x < -kBoundsTolerance || x > 1.0 + kBoundsTolerance || y < -kBoundsTolerance ||
            y > 1.0 + kBoundsTolerance) {
            std::ostringstream os;
            os << where << ": coordinate (" << p.x << ", " << p.y << ") outside image bounds beyond 5% tolerance";
            throw InvalidInput(os.str());
        }
        p.x = static_cast<float>(std::clamp(x, 0.0, 1.0));
        p.y = static_cast<float>(std::clamp(y, 0.0, 1.0));
    }
}

} // namespace

std::string to_string(PoseSource s) { return s == PoseSource::GroundTruth ? "ground_truth" : "predicted"; }

PoseSource pose_source_from_string(const std::string& s) {
    if (s == "ground_truth" || s == "gt") return PoseSource::GroundTruth;
    if (s == "predicted") return PoseSource::Predicted;
    throw InvalidInput("unknown pose source '" + s + "'");
}

std::filesystem::path DatasetManifest::clip_path(const std::string& sequence_id) const {
    return root / clip_dir / (sequence_id + ".json");
}

const std::vector<std::string>& DatasetManifest::split(const std::string& name) const {
    auto it = splits.find(name);
    if (it == splits.end()) throw InvalidInput("manifest has no split named '" + name + "'");
    return it->second;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw InvalidInput("manifest not found: '" + path.string() + "'");
    const json doc = read_json_file(path);
    std::vector<std::string> errors;
    DatasetManifest m;
    m.root = path.parent_path();

    auto require = [&](const char* key, auto check, const char* type) {
        if (!doc.contains(key) || !check(doc[key])) {
            errors.push_back(std::string("field '") + key + "' missing or not " + type);
            return false;
        }
        return true;
    };
    auto is_int = [](const json& j) { return j.is_number_integer(); };
    auto is_str = [](const json& j) { return j.is_string(); };
    auto is_str_array = [](const json& j) {
        return j.is_array() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_string(); });
    };

    if (!doc.is_object()) throw InvalidInput(path.string() + ": manifest must be a JSON object");
    if (require("format_version", is_int, "an integer")) {
        m.format_version = doc["format_version"].get<int>();
        if (m.format_version != kDatasetFormatVersion) {
            errors.push_back("unsupported format_version " + std::to_string(m.format_version));
        }
    }
    if (require("layout", is_str, "a string")) {
        try {
            m.layout.variant = layout_variant_from_string(doc["layout"].get<std::string>());
        } catch (const InvalidInput& e) {
            errors.emplace_back(e.what());
        }
    }
    if (require("num_classes", is_int, "an integer")) m.layout.num_classes = doc["num_classes"].get<int>();
    if (require("image_width", is_int, "an integer")) m.image_width = doc["image_width"].get<int>();
    if (require("image_height", is_int, "an integer")) m.image_height = doc["image_height"].get<int>();
    if (require("class_names", is_str_array, "an array of strings")) {
        m.class_names = doc["class_names"].get<std::vector<std::string>>();
    }
    if (require("object_class_names", is_str_array, "an array of strings")) {
        m.object_class_names = doc["object_class_names"].get<std::vector<std::string>>();
    }
    if (doc.contains("clip_dir")) {
        if (doc["clip_dir"].is_string()) {
            m.clip_dir = doc["clip_dir"].get<std::string>();
        } else {
            errors.emplace_back("field 'clip_dir' is not a string");
        }
    }
    if (require("splits", [](const json& j) { return j.is_object(); }, "an object")) {
        for (const auto& [name, ids] : doc["splits"].items()) {
            if (!is_str_array(ids)) {
                errors.push_back("split '" + name + "' is not an array of strings");
                continue;
            }
            m.splits[name] = ids.get<std::vector<std::string>>();
        }
    }

    if (m.layout.num_classes < 1) errors.emplace_back("num_classes must be >= 1");
    if (static_cast<int>(m.class_names.size()) != m.layout.num_classes) {
        errors.push_back("num_classes is " + std::to_string(m.layout.num_classes) + " but " +
                         std::to_string(m.class_names.size()) + " class names are listed");
    }
    if (m.object_class_names.empty()) errors.emplace_back("object_class_names must not be empty");
    m.layout.num_object_classes = std::max<int>(1, static_cast<int>(m.object_class_names.size()));
    if (m.image_width <= 0 || m.image_height <= 0) errors.emplace_back("image size must be positive");

    std::map<std::string, std::string> owner;
    for (const auto& [name, ids] : m.splits) {
        std::set<std::string> seen;
        for (const auto& id : ids) {
            if (!seen.insert(id).second) {
                errors.push_back("sequence id '" + id + "' listed twice in split '" + name + "'");
                continue;
            }
            auto [it, inserted] = owner.emplace(id, name);
            if (!inserted) {
                errors.push_back("sequence id '" + id + "' appears in both '" + it->second + "' and '" + name + "'");
            }
        }
    }

    if (!errors.empty()) {
        std::string msg = path.string() + ": invalid manifest";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw InvalidInput(msg);
    }
    return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = m.format_version;
    doc["layout"] = to_string(m.layout.variant);
    doc["num_classes"] = m.layout.num_classes;
    doc["image_width"] = m.image_width;
    doc["image_height"] = m.image_height;
    doc["class_names"] = m.class_names;
    doc["object_class_names"] = m.object_class_names;
    doc["clip_dir"] = m.clip_dir;
    doc["splits"] = m.splits;
    write_text_file(path, doc.dump(2));
}

ClipRecord load_clip_record(const std::filesystem::path& path) {
    const json doc = read_json_file(path);
    const std::string where = path.string();
    ClipRecord clip;
    try {
        if (!doc.is_object()) throw InvalidInput("clip must be a JSON object");
        if (doc.value("format_version", 0) != kDatasetFormatVersion) throw InvalidInput("unsupported format_version");
        clip.sequence_id = doc.at("sequence_id").get<std::string>();
        clip.subject_id = doc.value("subject_id", std::string{});
        clip.action_label = doc.at("action_label").get<int>();
        if (!doc.at("frames").is_array()) throw InvalidInput("'frames' must be an array");
    } catch (const json::exception& e) {
        throw InvalidInput(where + ": " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + ": " + e.what());
    }

    std::size_t record_no = 0;
    for (const auto& rec : doc["frames"]) {
        try {
            ClipFrameRecord f;
            if (!rec.contains("frame_index") || !rec["frame_index"].is_number_integer()) {
                throw InvalidInput("missing integer 'frame_index'");
            }
            f.frame_index = rec["frame_index"].get<int>();
            f.left = hand_from_json(rec, "left", "left_present");
            f.right = hand_from_json(rec, "right", "right_present");
            f.object = object_from_json(rec, "obj", "obj_label", "obj_present");
            if (rec.contains("predicted_left")) {
                f.predicted_left = hand_from_json(rec, "predicted_left", "predicted_left_present");
            }
            if (rec.contains("predicted_right")) {
                f.predicted_right = hand_from_json(rec, "predicted_right", "predicted_right_present");
            }
            if (rec.contains("predicted_obj")) {
                f.predicted_object =
                    object_from_json(rec, "predicted_obj", "predicted_obj_label", "predicted_obj_present");
            }
            clip.frames.push_back(std::move(f));
        } catch (const InvalidInput& e) {
            throw InvalidInput(where + ": frame record " + std::to_string(record_no) + ": " + e.what());
        }
        ++record_no;
    }
    return clip;
}

void save_clip_record(const ClipRecord& clip, const std::filesystem::path& path) {
    json frames = json::array();
    for (const auto& f : clip.frames) {
        json rec;
        rec["frame_index"] = f.frame_index;
        rec["left"] = points_to_json(f.left.keypoints);
        rec["left_present"] = f.left.present;
        rec["right"] = points_to_json(f.right.keypoints);
        rec["right_present"] = f.right.present;
        rec["obj"] = points_to_json(f.object.corners);
        rec["obj_label"] = f.object.label;
        rec["obj_present"] = f.object.present;
        if (f.predicted_left) {
            rec["predicted_left"] = points_to_json(f.predicted_left->keypoints);
            rec["predicted_left_present"] = f.predicted_left->present;
        }
        if (f.predicted_right) {
            rec["predicted_right"] = points_to_json(f.predicted_right->keypoints);
            rec["predicted_right_present"] = f.predicted_right->present;
        }
        if (f.predicted_object) {
            rec["predicted_obj"] = points_to_json(f.predicted_object->corners);
            rec["predicted_obj_label"] = f.predicted_object->label;
            rec["predicted_obj_present"] = f.predicted_object->present;
        }
        frames.push_back(std::move(rec));
    }
    json doc;
    doc["format_version"] = kDatasetFormatVersion;
    doc["sequence_id"] = clip.sequence_id;
    doc["subject_id"] = clip.subject_id;
    doc["action_label"] = clip.action_label;
    doc["frames"] = std::move(frames);
    write_text_file(path, doc.dump());
}

ActionSample to_sample(const ClipRecord& clip, const DatasetManifest& manifest, PoseSource source,
                       const std::string& origin) {
    ActionSample sample;
    sample.sequence_id = clip.sequence_id;
    sample.subject_id = clip.subject_id;
    sample.action_label = clip.action_label;
    sample.frames.reserve(clip.frames.size());
    const double w = manifest.image_width;
    const double h = manifest.image_height;
    std::size_t record_no = 0;
    for (const auto& rec : clip.frames) {
        const std::string where = origin + ": frame record " + std::to_string(record_no++);
        FramePose f;
        f.frame_index = rec.frame_index;
        if (source == PoseSource::GroundTruth) {
            f.left = rec.left;
            f.right = rec.right;
            f.object = rec.object;
        } else {
            if (!rec.predicted_left || !rec.predicted_right) {
                throw InvalidInput(where + ": predicted pose stream requested but 'predicted_left'/'predicted_right' "
                                           "missing");
            }
            f.left = *rec.predicted_left;
            f.right = *rec.predicted_right;
            f.object = rec.predicted_object.value_or(rec.object);
        }
        canonicalize(f);
        normalize_points(f.left.keypoints, w, h, where);
        normalize_points(f.right.keypoints, w, h, where);
        normalize_points(f.object.corners, w, h, where);
        sample.frames.push_back(f);
    }
    try {
        validate(sample, manifest.layout);
    } catch (const InvalidInput& e) {
        throw InvalidInput(origin + ": " + e.what());
    }
    return sample;
}

void write_dataset(const DatasetManifest& manifest, const std::vector<ClipRecord>& clips,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / manifest.clip_dir);
    save_manifest(manifest, dir / "manifest.json");
    for (const auto& clip : clips) save_clip_record(clip, dir / manifest.clip_dir / (clip.sequence_id + ".json"));
}

std::vector<ActionSample> load_samples(const DatasetManifest& manifest, const std::string& split_name,
                                       PoseSource source) {
    const auto& ids = manifest.split(split_name);
    std::vector<ActionSample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto path = manifest.clip_path(id);
        if (!std::filesystem::exists(path)) throw InvalidInput("clip file not found: '" + path.string() + "'");
        ClipRecord clip = load_clip_record(path);
        if (clip.sequence_id != id) {
            throw InvalidInput(path.string() + ": sequence_id '" + clip.sequence_id + "' does not match '" + id + "'");
        }
        out.push_back(to_sample(clip, manifest, source, path.string()));
    }
    return out;
}

} // namespace egoact
