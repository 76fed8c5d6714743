#include "egoact/importers.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "egoact/dataset.hpp"
#include "egoact/error.hpp"

namespace egoact {

namespace {

constexpr double kTolerance = 0.05;

struct Intrinsics {
    double fx, fy, cx, cy;
    int width, height;
};

std::optional<std::vector<double>> read_numbers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::vector<double> v;
    double x = 0.0;
    while (in >> x) v.push_back(x);
    return v;
}

std::string frame_name(int frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.txt", frame);
    return buf;
}

Keypoint project(const Intrinsics& k, double x, double y, double z) {
    if (z <= 0.0) return {-1e6f, -1e6f};
    return {static_cast<float>(k.fx * x / z + k.cx), static_cast<float>(k.fy * y / z + k.cy)};
}

template <std::size_t K>
bool within_tolerance(const std::array<Keypoint, K>& pts, int w, int h) {
    return std::all_of(pts.begin(), pts.end(), [&](const Keypoint& p) {
        return p.x >= -kTolerance * w && p.x <= (1.0 + kTolerance) * w && p.y >= -kTolerance * h &&
               p.y <= (1.0 + kTolerance) * h;
    });
}

ObjectPose box_from_points(const std::vector<Keypoint>& pts) {
    float x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    ObjectPose o;
    o.present = true;
    o.corners = {Keypoint{x0, y0}, Keypoint{x1, y0}, Keypoint{x1, y1}, Keypoint{x0, y1}};
    return o;
}

void write_log(const ConversionLog& log, const std::filesystem::path& out) {
    std::ofstream f(out / "conversion_log.txt");
    f << "converted " << log.converted << "\n";
    for (const auto& s : log.skipped) f << "skipped " << s << "\n";
}

struct H2OClipRow {
    std::string id;
    std::string path;
    int label = 0;
    int start = 0;
    int end = 0;
};

std::vector<H2OClipRow> read_h2o_split(const std::filesystem::path& file, ConversionLog& log) {
    std::vector<H2OClipRow> rows;
    std::ifstream in(file);
    if (!in) return rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        H2OClipRow r;
        if (!(ls >> r.id >> r.path >> r.label >> r.start >> r.end)) {
            log.skipped.push_back(file.filename().string() + ": unparseable row '" + line + "'");
            continue;
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace

ConversionLog convert_h2o(const std::filesystem::path& src, const std::filesystem::path& out) {
    if (!std::filesystem::is_directory(src / "label_split")) {
        throw InvalidInput("'" + src.string() + "' does not look like an H2O tree (missing label_split/)");
    }
    ConversionLog log;
    DatasetManifest m;
    m.layout = DatasetLayout::two_hands(36, 8);
    for (int k = 1; k <= 36; ++k) m.class_names.push_back("action_" + std::to_string(k));
    m.object_class_names = {"book", "espresso", "lotion", "spray", "milk", "cocoa", "chips", "cappuccino"};
    std::vector<ClipRecord> clips;
    bool size_known = false;

    for (const std::string split : {"train", "val", "test"}) {
        auto& ids = m.splits[split];
        for (const auto& row : read_h2o_split(src / "label_split" / ("action_" + split + ".txt"), log)) {
            const std::string clip_id = split + "_" + row.id;
            const auto cam = src / row.path / "cam4";
            const auto intr = read_numbers(cam / "cam_intrinsics.txt");
            if (!intr || intr->size() < 6) {
                log.skipped.push_back(clip_id + ": missing or malformed cam_intrinsics.txt");
                continue;
            }
            const Intrinsics k{(*intr)[0], (*intr)[1], (*intr)[2], (*intr)[3], static_cast<int>((*intr)[4]),
                               static_cast<int>((*intr)[5])};
            if (!size_known) {
                m.image_width = k.width;
                m.image_height = k.height;
                size_known = true;
            }
            if (row.label < 1 || row.label > 36) {
                log.skipped.push_back(clip_id + ": action label " + std::to_string(row.label) + " outside 1..36");
                continue;
            }
            ClipRecord clip;
            clip.sequence_id = clip_id;
            clip.subject_id = row.path.substr(0, row.path.find('/'));
            clip.action_label = row.label - 1;
            std::string failure;
            for (int fr = row.start; fr <= row.end && failure.empty(); ++fr) {
                const auto hand = read_numbers(cam / "hand_pose" / frame_name(fr));
                if (!hand || hand->size() != 128) {
                    failure = "missing or malformed hand_pose/" + frame_name(fr);
                    break;
                }
                ClipFrameRecord f;
                f.frame_index = fr;
                auto read_hand = [&](std::size_t offset, HandPose& hp) {
                    hp.present = (*hand)[offset] > 0.5;
                    if (!hp.present) return;
                    for (std::size_t j = 0; j < kHandKeypoints; ++j) {
                        const std::size_t b = offset + 1 + 3 * j;
                        hp.keypoints[j] = project(k, (*hand)[b], (*hand)[b + 1], (*hand)[b + 2]);
                    }
                    if (!within_tolerance(hp.keypoints, k.width, k.height)) {
                        hp = HandPose{};
                        log.skipped.push_back(clip_id + ": frame " + std::to_string(fr) +
                                              " hand projects outside the image, marked absent");
                    }
                };
                read_hand(0, f.left);
                read_hand(64, f.right);

                if (const auto obj = read_numbers(cam / "obj_pose" / frame_name(fr)); obj && obj->size() >= 4) {
                    const int cls = static_cast<int>((*obj)[0]);
                    if (cls >= 1 && cls <= 8) {
                        std::vector<Keypoint> pts;
                        for (std::size_t b = 1; b + 2 < obj->size(); b += 3) {
                            pts.push_back(project(k, (*obj)[b], (*obj)[b + 1], (*obj)[b + 2]));
                        }
                        ObjectPose o = box_from_points(pts);
                        o.label = cls - 1;
                        if (within_tolerance(o.corners, k.width, k.height)) f.object = o;
                    }
                }
                clip.frames.push_back(f);
            }
            if (!failure.empty() || clip.frames.empty()) {
                log.skipped.push_back(clip_id + ": " + (failure.empty() ? "no frames" : failure));
                continue;
            }
            ids.push_back(clip_id);
            clips.push_back(std::move(clip));
            ++log.converted;
        }
    }
    write_dataset(m, clips, out);
    write_log(log, out);
    return log;
}

ConversionLog convert_fpha(const std::filesystem::path& src, const std::filesystem::path& out) {
    const auto split_file = src / "data_split_action_recognition.txt";
    std::ifstream in(split_file);
    if (!in) throw InvalidInput("'" + src.string() + "' does not look like an FPHA tree (missing " +
                                split_file.filename().string() + ")");

    // Published colour camera calibration of the FPHA recordings.
    constexpr std::array<std::array<double, 4>, 3> extrinsic = {{
        {0.999988496304, -0.00468848412856, 0.000982563360594, 25.7},
        {0.00469115935266, 0.999985218048, -0.00273845880292, 1.22},
        {-0.000969709653873, 0.00274303671904, 0.99999576807, 3.902},
    }};
    const Intrinsics k{1395.749023, 1395.749268, 935.732544, 540.681030, 1920, 1080};
    // FPHA stores wrist, 5 MCPs, then PIP/DIP/TIP per finger; reorder to per-finger chains.
    constexpr std::array<int, kHandKeypoints> reorder = {0, 1, 6, 7, 8, 2, 9, 10, 11, 3, 12,
                                                         13, 14, 4, 15, 16, 17, 5, 18, 19, 20};

    ConversionLog log;
    DatasetManifest m;
    m.image_width = k.width;
    m.image_height = k.height;
    m.object_class_names = {"none"};
    std::map<int, std::string> class_names;
    std::vector<ClipRecord> clips;

    std::string split;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "Training" || first == "Test") {
            split = first == "Training" ? "train" : "test";
            m.splits[split];
            continue;
        }
        int label = -1;
        if (split.empty() || !(ls >> label) || label < 0) {
            log.skipped.push_back("unparseable split line '" + line + "'");
            continue;
        }
        const std::string rel = first;
        const auto parts_end = rel.find('/');
        const auto action_begin = parts_end == std::string::npos ? 0 : parts_end + 1;
        const auto action_end = rel.find('/', action_begin);
        class_names.emplace(label, rel.substr(action_begin, action_end - action_begin));

        std::string clip_id = rel;
        std::replace(clip_id.begin(), clip_id.end(), '/', '_');
        std::ifstream skel(src / "Hand_pose_annotation_v1" / rel / "skeleton.txt");
        if (!skel) {
            log.skipped.push_back(clip_id + ": missing skeleton.txt");
            continue;
        }
        ClipRecord clip;
        clip.sequence_id = clip_id;
        clip.subject_id = rel.substr(0, parts_end);
        clip.action_label = label;
        std::string row;
        bool bad = false;
        while (std::getline(skel, row)) {
            std::istringstream rs(row);
            std::vector<double> v;
            double x = 0.0;
            while (rs >> x) v.push_back(x);
            if (v.empty()) continue;
            if (v.size() != 64) {
                log.skipped.push_back(clip_id + ": skeleton row with " + std::to_string(v.size()) + " values");
                bad = true;
                break;
            }
            ClipFrameRecord f;
            f.frame_index = static_cast<int>(v[0]);
            f.right.present = true;
            for (int j = 0; j < kHandKeypoints; ++j) {
                const std::size_t b = 1 + 3 * static_cast<std::size_t>(reorder[static_cast<std::size_t>(j)]);
                std::array<double, 3> cam{};
                for (std::size_t r = 0; r < 3; ++r) {
                    cam[r] = extrinsic[r][0] * v[b] + extrinsic[r][1] * v[b + 1] + extrinsic[r][2] * v[b + 2] +
                             extrinsic[r][3];
                }
                f.right.keypoints[static_cast<std::size_t>(j)] = project(k, cam[0], cam[1], cam[2]);
            }
            if (!within_tolerance(f.right.keypoints, k.width, k.height)) f.right = HandPose{};
            clip.frames.push_back(f);
        }
        if (bad || clip.frames.empty()) {
            if (!bad) log.skipped.push_back(clip_id + ": no frames");
            continue;
        }
        m.splits[split].push_back(clip_id);
        clips.push_back(std::move(clip));
        ++log.converted;
    }

    const int num_classes = class_names.empty() ? 45 : std::max(45, class_names.rbegin()->first + 1);
    m.layout = DatasetLayout::one_hand(num_classes, 1);
    for (int c = 0; c < num_classes; ++c) {
        auto it = class_names.find(c);
        m.class_names.push_back(it != class_names.end() ? it->second : "action_" + std::to_string(c));
    }
    write_dataset(m, clips, out);
    write_log(log, out);
    return log;
}

ConversionLog convert_dataset(const std::string& layout, const std::filesystem::path& src,
                              const std::filesystem::path& out) {
    if (layout == "h2o") return convert_h2o(src, out);
    if (layout == "fpha") return convert_fpha(src, out);
    throw InvalidInput("unrecognized source layout '" + layout + "' (expected h2o or fpha)");
}

} // namespace egoact
