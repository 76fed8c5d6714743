#include "egoact/heatmap.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "egoact/error.hpp"

namespace egoact {

namespace {

constexpr char kMagic[8] = {'E', 'G', 'O', 'A', 'H', 'M', 'A', 'P'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

struct Cursor {
    const std::string& bytes;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > bytes.size()) throw InvalidInput("heatmap file is truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

} // namespace

Heatmap::Heatmap(int j, int w, int h)
    : joints(j), width(w), height(h), values(static_cast<std::size_t>(j) * w * h, 0.0f) {}

float& Heatmap::at(int joint, int x, int y) {
    return values[(static_cast<std::size_t>(joint) * height + y) * width + x];
}

float Heatmap::at(int joint, int x, int y) const {
    return values[(static_cast<std::size_t>(joint) * height + y) * width + x];
}

void Heatmap::validate() const {
    if (joints < 1 || width < 1 || height < 1) throw InvalidInput("heatmap dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(joints) * width * height) {
        throw InvalidInput("heatmap value count does not match its dimensions");
    }
    for (float v : values) {
        if (!std::isfinite(v) || v < 0.0f) throw InvalidInput("heatmap values must be finite and non-negative");
    }
}

DecodedHand decode(const Heatmap& hm, int image_width, int image_height) {
    hm.validate();
    if (hm.joints != kHandKeypoints) {
        throw InvalidInput("expected " + std::to_string(kHandKeypoints) + " joints, got " + std::to_string(hm.joints));
    }
    if (image_width < 1 || image_height < 1) throw InvalidInput("image size must be positive");
    DecodedHand out;
    out.pose.present = true;
    const double sx = static_cast<double>(image_width) / hm.width;
    const double sy = static_cast<double>(image_height) / hm.height;
    const std::size_t cells = static_cast<std::size_t>(hm.width) * hm.height;
    for (int j = 0; j < hm.joints; ++j) {
        const float* channel = hm.values.data() + static_cast<std::size_t>(j) * cells;
        std::size_t best = 0;
        for (std::size_t i = 1; i < cells; ++i) {
            if (channel[i] > channel[best]) best = i;
        }
        auto& kp = out.pose.keypoints[static_cast<std::size_t>(j)];
        if (channel[best] <= 0.0f) {
            kp = {};
            out.low_confidence[static_cast<std::size_t>(j)] = true;
            continue;
        }
        const auto cx = static_cast<double>(best % static_cast<std::size_t>(hm.width));
        const auto cy = static_cast<double>(best / static_cast<std::size_t>(hm.width));
        kp = {static_cast<float>((cx + 0.5) * sx), static_cast<float>((cy + 0.5) * sy)};
    }
    return out;
}

double presence_probability(const std::array<float, 2>& logits) {
    // softmax(l)[1] = 1 / (1 + exp(l0 - l1))
    return 1.0 / (1.0 + std::exp(static_cast<double>(logits[0]) - logits[1]));
}

FramePose gate(const HandPose& left, const HandPose& right, const HandnessLogits& logits) {
    FramePose f;
    if (presence_probability(logits.left) > 0.5) {
        f.left = left;
        f.left.present = true;
    }
    if (presence_probability(logits.right) > 0.5) {
        f.right = right;
        f.right.present = true;
    }
    return f;
}

std::string serialize_heatmaps(const HeatmapFile& file) {
    if (file.hands.empty()) throw InvalidInput("heatmap file needs at least one hand");
    const Heatmap& first = file.hands.front();
    for (const auto& h : file.hands) {
        h.validate();
        if (h.joints != first.joints || h.width != first.width || h.height != first.height) {
            throw InvalidInput("all heatmaps in a file must share dimensions");
        }
    }
    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, kHeatmapFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(file.hands.size()));
    put_u32(out, static_cast<std::uint32_t>(first.joints));
    put_u32(out, static_cast<std::uint32_t>(first.width));
    put_u32(out, static_cast<std::uint32_t>(first.height));
    put_u32(out, 0);
    put_u32(out, file.handness ? 1 : 0);
    for (const auto& h : file.hands) {
        for (float v : h.values) put_f32(out, v);
    }
    if (file.handness) {
        for (float v : file.handness->left) put_f32(out, v);
        for (float v : file.handness->right) put_f32(out, v);
    }
    return out;
}

HeatmapFile deserialize_heatmaps(const std::string& bytes) {
    if (bytes.size() < sizeof(kMagic) || bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
        throw InvalidInput("not a heatmap file");
    }
    Cursor in{bytes, sizeof(kMagic)};
    const auto version = in.u32();
    if (version != kHeatmapFormatVersion) {
        throw InvalidInput("unsupported heatmap format_version " + std::to_string(version));
    }
    const auto num_hands = in.u32();
    const auto joints = in.u32();
    const auto width = in.u32();
    const auto height = in.u32();
    const auto dtype = in.u32();
    const auto has_handness = in.u32();
    if (dtype != 0) throw InvalidInput("unsupported heatmap dtype " + std::to_string(dtype));
    if (num_hands == 0 || joints == 0 || width == 0 || height == 0) throw InvalidInput("empty heatmap file");
    const std::size_t per_hand = static_cast<std::size_t>(joints) * width * height;
    const std::size_t expected = in.pos + 4 * (num_hands * per_hand + (has_handness ? 4 : 0));
    if (bytes.size() != expected) throw InvalidInput("heatmap file size does not match its header");

    HeatmapFile file;
    for (std::uint32_t h = 0; h < num_hands; ++h) {
        Heatmap hm(static_cast<int>(joints), static_cast<int>(width), static_cast<int>(height));
        for (auto& v : hm.values) v = in.f32();
        hm.validate();
        file.hands.push_back(std::move(hm));
    }
    if (has_handness) {
        HandnessLogits l;
        for (auto& v : l.left) v = in.f32();
        for (auto& v : l.right) v = in.f32();
        file.handness = l;
    }
    return file;
}

void save_heatmaps(const HeatmapFile& file, const std::filesystem::path& path) {
    const auto bytes = serialize_heatmaps(file);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

HeatmapFile load_heatmaps(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open heatmap file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_heatmaps(ss.str());
}

} // namespace egoact
