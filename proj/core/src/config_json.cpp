#include "egoact/config_json.hpp"

#include <set>
#include <string>

#include "egoact/error.hpp"

namespace egoact {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
    if (!j.is_object()) throw InvalidInput(std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw InvalidInput(std::string("unknown key '") + key + "' in " + what);
    }
}

template <typename V>
void read(const json& j, const char* key, V& out, const char* what) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<V>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string(what) + "." + key + " has the wrong type");
    }
}

} // namespace

json to_json(const NetConfig& cfg) {
    return {
        {"input_dim", cfg.input_dim},
        {"model_dim", cfg.model_dim},
        {"seq_len", cfg.seq_len},
        {"num_layers", cfg.num_layers},
        {"num_heads", cfg.num_heads},
        {"mlp_hidden_dim", cfg.mlp_hidden_dim},
        {"num_classes", cfg.num_classes},
        {"dropout", cfg.dropout},
        {"use_cls_token", cfg.use_cls_token},
        {"use_pos_embedding", cfg.use_pos_embedding},
    };
}

NetConfig net_config_from_json(const json& j, NetConfig cfg) {
    constexpr const char* what = "net config";
    reject_unknown(j,
                   {"input_dim", "model_dim", "seq_len", "num_layers", "num_heads", "mlp_hidden_dim", "num_classes",
                    "dropout", "use_cls_token", "use_pos_embedding"},
                   what);
    read(j, "input_dim", cfg.input_dim, what);
    read(j, "model_dim", cfg.model_dim, what);
    read(j, "seq_len", cfg.seq_len, what);
    read(j, "num_layers", cfg.num_layers, what);
    read(j, "num_heads", cfg.num_heads, what);
    read(j, "mlp_hidden_dim", cfg.mlp_hidden_dim, what);
    read(j, "num_classes", cfg.num_classes, what);
    read(j, "dropout", cfg.dropout, what);
    read(j, "use_cls_token", cfg.use_cls_token, what);
    read(j, "use_pos_embedding", cfg.use_pos_embedding, what);
    cfg.validate();
    return cfg;
}

json to_json(const AugmentConfig& cfg) {
    json targets = json::array();
    for (auto t : cfg.mask_targets) targets.push_back(to_string(t));
    return {
        {"p_hflip", cfg.p_hflip},
        {"p_vflip", cfg.p_vflip},
        {"p_rotate", cfg.p_rotate},
        {"p_crop", cfg.p_crop},
        {"p_mask", cfg.p_mask},
        {"max_rotation_deg", cfg.max_rotation_deg},
        {"crop_scale_range", {cfg.crop_scale_range.first, cfg.crop_scale_range.second}},
        {"mask_targets", targets},
    };
}

AugmentConfig augment_config_from_json(const json& j, AugmentConfig cfg) {
    constexpr const char* what = "augment config";
    reject_unknown(j,
                   {"p_hflip", "p_vflip", "p_rotate", "p_crop", "p_mask", "max_rotation_deg", "crop_scale_range",
                    "mask_targets"},
                   what);
    read(j, "p_hflip", cfg.p_hflip, what);
    read(j, "p_vflip", cfg.p_vflip, what);
    read(j, "p_rotate", cfg.p_rotate, what);
    read(j, "p_crop", cfg.p_crop, what);
    read(j, "p_mask", cfg.p_mask, what);
    read(j, "max_rotation_deg", cfg.max_rotation_deg, what);
    if (j.contains("crop_scale_range")) {
        const auto& r = j["crop_scale_range"];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
            throw InvalidInput("augment config.crop_scale_range must be [min, max]");
        }
        cfg.crop_scale_range = {r[0].get<double>(), r[1].get<double>()};
    }
    if (j.contains("mask_targets")) {
        std::vector<std::string> names;
        read(j, "mask_targets", names, what);
        cfg.mask_targets.clear();
        for (const auto& n : names) cfg.mask_targets.push_back(mask_target_from_string(n));
    }
    cfg.validate();
    return cfg;
}

} // namespace egoact
