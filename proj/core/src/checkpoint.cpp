#include "egoact/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egoact/config_json.hpp"
#include "egoact/error.hpp"

namespace egoact {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'G', 'O', 'A', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_bytes(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw InvalidInput("checkpoint is truncated");
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

void put_tensor(std::string& out, const std::string& name, const Matrix<float>& m) {
    put_bytes(out, name);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(m.data()[i]));
}

void collect(std::map<std::string, Matrix<float>*>& slots, const std::string& prefix, ClassifierParams<float>& p) {
    for_each_tensor(p, [&](const std::string& name, Matrix<float>& m) { slots[prefix + name] = &m; });
}

} // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    json header;
    header["format_version"] = kCheckpointFormatVersion;
    header["net"] = to_json(ckpt.params.config);
    header["epoch"] = ckpt.epoch;
    header["rng"] = {{"seed", ckpt.seed}, {"next_epoch", ckpt.rng_next_epoch}};
    if (ckpt.optimizer) header["optimizer_step"] = ckpt.optimizer->step;
    try {
        header["extra"] = json::parse(ckpt.extra);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("checkpoint extra is not valid JSON: ") + e.what());
    }

    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, kCheckpointFormatVersion);
    put_bytes(out, header.dump());

    std::uint32_t count = 0;
    std::string body;
    for_each_tensor(ckpt.params, [&](const std::string& name, const Matrix<float>& m) {
        put_tensor(body, "model." + name, m);
        ++count;
    });
    if (ckpt.optimizer) {
        for_each_tensor(ckpt.optimizer->first_moment, [&](const std::string& name, const Matrix<float>& m) {
            put_tensor(body, "adamw.m." + name, m);
            ++count;
        });
        for_each_tensor(ckpt.optimizer->second_moment, [&](const std::string& name, const Matrix<float>& m) {
            put_tensor(body, "adamw.v." + name, m);
            ++count;
        });
    }
    put_u32(out, count);
    out += body;
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    Reader in(bytes);
    if (in.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw InvalidInput("not a checkpoint file");
    const auto version = in.u32();
    if (version != kCheckpointFormatVersion) {
        throw InvalidInput("unsupported checkpoint format_version " + std::to_string(version));
    }
    json header;
    try {
        header = json::parse(in.bytes(in.u32()));
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("corrupt checkpoint header: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        const NetConfig cfg = net_config_from_json(header.at("net"));
        ckpt.params = zero_params<float>(cfg);
        ckpt.epoch = header.at("epoch").get<int>();
        ckpt.seed = header.at("rng").at("seed").get<std::uint64_t>();
        ckpt.rng_next_epoch = header.at("rng").at("next_epoch").get<int>();
        if (header.contains("optimizer_step")) {
            ckpt.optimizer = AdamWState::zeros(cfg);
            ckpt.optimizer->step = header["optimizer_step"].get<std::int64_t>();
        }
        ckpt.extra = header.value("extra", json::object()).dump();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("corrupt checkpoint header: ") + e.what());
    }

    std::map<std::string, Matrix<float>*> slots;
    collect(slots, "model.", ckpt.params);
    if (ckpt.optimizer) {
        collect(slots, "adamw.m.", ckpt.optimizer->first_moment);
        collect(slots, "adamw.v.", ckpt.optimizer->second_moment);
    }

    const auto count = in.u32();
    if (count != slots.size()) {
        throw InvalidInput("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                           std::to_string(slots.size()));
    }
    std::map<std::string, bool> seen;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::string name = in.bytes(in.u32());
        const auto rows = in.u32();
        const auto cols = in.u32();
        auto it = slots.find(name);
        if (it == slots.end() || seen[name]) throw InvalidInput("unexpected tensor '" + name + "' in checkpoint");
        seen[name] = true;
        Matrix<float>& m = *it->second;
        if (m.rows() != rows || m.cols() != cols) throw InvalidInput("tensor '" + name + "' has the wrong shape");
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = in.f32();
    }
    if (!in.done()) throw InvalidInput("trailing bytes after checkpoint tensors");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::string bytes = serialize_checkpoint(ckpt);
    // Atomic replace.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return deserialize_checkpoint(ss.str());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

} // namespace egoact
